#pragma once

#include <somp/alasso.hpp>
#include <somp/datamodel.hpp>
#include <somp/greedy.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace somp {

/// Zero fields select the defaults derived from n and p.
struct BaselineConfig
{
    std::size_t sis_model_size = 0;   // n - 1
    std::size_t isis_per_iter = 0;    // floor(n / log n)
    std::size_t isis_iterations = 0;  // floor(log n - 1)
    std::size_t omp_max_steps = 0;    // min(n - 1, p)

    /// Copy with defaults filled in; throws Error(Config) on invalid sizes.
    BaselineConfig resolved(std::size_t n, std::size_t p) const;
};

/// Top `size` variables by |X_j'y| / ||X_j||, ties to the smaller index.
SupportSet sis_screen(const MultiTaskDataset& data, std::size_t task, std::size_t size);

struct IsisTrace
{
    /// Variables added in each iteration, in rank order.
    std::vector<std::vector<std::size_t>> iterations;
    /// Additions dropped because they were collinear with the accumulated set.
    std::size_t skipped_collinear = 0;
};

/// Iterative SIS: the first iteration is plain SIS; later ones re-rank the
/// remaining variables by their correlation with the OLS residual of y_t on
/// everything selected so far.
SupportSet isis_screen(const MultiTaskDataset& data, std::size_t task, const BaselineConfig& config,
                       IsisTrace* trace = nullptr);

/// Forward regression on one task; the same engine as run_somp with T = 1.
SelectionPath omp_single(const MultiTaskDataset& data, std::size_t task, std::size_t max_steps = 0);

enum class Method { SisAlasso, IsisAlasso, Omp, Somp, SompAlasso };

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
std::vector<Method> all_methods();

struct PipelineConfig
{
    SompConfig somp;
    AlassoConfig alasso;
    BaselineConfig baseline;
    /// BIC dimension override for all selection steps; 0 = dataset p.
    std::size_t bic_p = 0;
    /// Workers for per-task stages.
    std::size_t threads = 1;
};

struct PipelineResult
{
    CoefficientMatrix estimate;
    /// Output of the screening stage, per task (one entry when shared by all).
    std::vector<SupportSet> screened;
    AlassoDiagnostics alasso;
};

PipelineResult run_pipeline(const MultiTaskDataset& data, Method method, const PipelineConfig& config = {});

/// OLS coefficients of every task on `support`, placed in a p x T matrix.
CoefficientMatrix ols_on_support(const MultiTaskDataset& data, const SupportSet& support);

} // namespace somp
