#include <somp/errors.hpp>

namespace somp {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::DegenerateColumn: return "DegenerateColumn";
        case ErrorCode::DegenerateDesign: return "DegenerateDesign";
        case ErrorCode::EmptyModel: return "EmptyModel";
        case ErrorCode::NoValidCandidate: return "NoValidCandidate";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::CovarianceNotPD: return "CovarianceNotPD";
        case ErrorCode::ZeroSignal: return "ZeroSignal";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

int exit_code(ErrorCode code)
{
    switch (code) {
        case ErrorCode::Config:
            return 2;
        case ErrorCode::DimensionMismatch:
        case ErrorCode::Parse:
            return 3;
        default:
            return 4;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code)
{}

Error Error::for_task(std::size_t task) const
{
    Error e(code_, "task " + std::to_string(task + 1) + ": " + what());
    e.task_ = task;
    return e;
}

} // namespace somp
