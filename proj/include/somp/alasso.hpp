#pragma once

#include <somp/bic.hpp>
#include <somp/datamodel.hpp>

#include <cstddef>
#include <vector>

namespace somp {

struct AlassoConfig
{
    std::size_t lambda_grid_size = 100;
    double lambda_min_ratio = 1e-3;
    /// Sweeps stop once the largest coordinate change is below
    /// cd_tolerance * (1 + max |beta|) ...
    double cd_tolerance = 1e-8;
    /// ... and the stationarity violation is below kkt_tolerance * max_j |X_j'y|.
    double kkt_tolerance = 1e-6;
    std::size_t max_cd_iterations = 10000;
    double weight_epsilon = 1e-12;

    void validate() const;
};

/// One adaptive-Lasso solution for a single task on a screened variable set.
struct AlassoFit
{
    std::size_t task = 0;
    SupportSet screened;
    double lambda = 0.0;
    Vector coefficients;  // aligned with screened
    double rss = 0.0;
    double kkt_violation = 0.0;
    /// max_j |X_j'y| over the screened columns; KKT residuals are judged against it.
    double scale = 0.0;
    std::size_t sweeps = 0;
    /// false only for fits inside alasso_per_task that hit max_cd_iterations
    bool converged = true;

    std::size_t nonzeros() const;
};

/// w_j = 1 / (|beta_ols_j| + weight_epsilon), from OLS of y_t on the screened
/// columns. Throws Error(DegenerateDesign) if those columns are collinear.
Vector compute_weights(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened,
                       const AlassoConfig& config = {});

/// Smallest lambda whose solution is all zero: 2 max_j |X_j'y| / w_j.
double alasso_lambda_max(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened,
                         const Vector& weights);

/// ||y - X_S beta||^2 + lambda sum_j w_j |beta_j|.
double alasso_objective(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened,
                        const Vector& weights, double lambda, const Vector& coefficients);

/// Coordinate descent at a fixed lambda, optionally warm-started.
/// Throws Error(NoConvergence) when max_cd_iterations sweeps are exhausted.
AlassoFit fit_alasso(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened,
                     const Vector& weights, double lambda, const AlassoConfig& config = {},
                     const Vector* warm_start = nullptr);

/// Warm-started fits over a log-spaced grid descending from lambda_max to
/// lambda_max * lambda_min_ratio.
std::vector<AlassoFit> fit_alasso_path(const MultiTaskDataset& data, std::size_t task,
                                       const SupportSet& screened, const Vector& weights,
                                       const AlassoConfig& config = {});

/// Fit minimizing bic_score(rss, nonzeros); ties go to the larger lambda.
const AlassoFit& select_fit(const std::vector<AlassoFit>& path, const BicParams& params);

struct AlassoDiagnostics
{
    std::size_t fits = 0;
    /// max over converged fits of kkt_violation / scale
    double max_kkt_ratio = 0.0;
    std::size_t no_convergence = 0;

    void merge(const AlassoDiagnostics& other);
};

struct AlassoOptions
{
    AlassoConfig config;
    /// Dimension used for p in the BIC penalty; 0 = the dataset's p.
    std::size_t bic_p = 0;
    std::size_t threads = 1;
};

/// Adaptive Lasso on each task separately, task t restricted to screened[t].
/// Coefficients land at their original variable indices. Errors carry the
/// index of the failing task.
CoefficientMatrix alasso_per_task(const MultiTaskDataset& data, const std::vector<SupportSet>& screened,
                                  const AlassoOptions& options = {}, AlassoDiagnostics* diagnostics = nullptr);

/// Same screened set for every task.
CoefficientMatrix exact_support_pipeline(const MultiTaskDataset& data, const SupportSet& screened,
                                         const AlassoOptions& options = {},
                                         AlassoDiagnostics* diagnostics = nullptr);

} // namespace somp
