#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace somp {

enum class ErrorCode {
    // numerical failures
    DegenerateColumn,
    DegenerateDesign,
    EmptyModel,
    NoValidCandidate,
    NoConvergence,
    CovarianceNotPD,
    ZeroSignal,
    ZeroVariance,
    // input problems
    DimensionMismatch,
    Parse,
    // configuration
    Config,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for a failure of the given kind:
/// 2 for configuration errors, 3 for data errors, 4 for numerical failures.
int exit_code(ErrorCode code);

/**
 * Library-wide exception. Carries a machine-readable code and, for errors
 * raised inside per-task work, the task that failed.
 */
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> task() const noexcept { return task_; }

    /// Same error, tagged with the task it occurred in.
    Error for_task(std::size_t task) const;

private:
    ErrorCode code_;
    std::optional<std::size_t> task_;
};

} // namespace somp
