#pragma once

#include <somp/datamodel.hpp>

#include <string>
#include <vector>

namespace somp {

struct SupportMetrics
{
    bool covered = false;              // M_* ⊆ S(B̂)
    double frac_correct_zeros = 1.0;   // |S^c ∩ M_*^c| / (p - s)
    double frac_incorrect_zeros = 0.0; // |S^c ∩ M_*| / s
    bool exactly_fitted = false;       // S(B̂) = M_*
    std::size_t support_size = 0;
};

struct ReplicateReport
{
    SupportMetrics union_support;
    SupportMetrics exact_support;
    double estimation_error = 0.0;
    double r2_test = 0.0;
};

/// Row-support metrics of estimate against truth.
SupportMetrics union_metrics(const TrueModel& truth, const CoefficientMatrix& estimate);

/// The same quantities over the p x T grid of individual coefficients.
SupportMetrics exact_metrics(const TrueModel& truth, const CoefficientMatrix& estimate);

/// Squared Frobenius norm of B - B̂.
double estimation_error(const TrueModel& truth, const CoefficientMatrix& estimate);

/// 1 - sum_t ||y_t - X_t b_t||^2 / sum_t ||y_t - mean(y_t)||^2 on held-out data.
/// Throws Error(ZeroVariance) when every test response is constant.
double r2_test(const MultiTaskDataset& test, const CoefficientMatrix& estimate);

/// 1 - sum_t ||y_t - X_t b_t||^2 / (nT), for data normalized to unit variance.
double r2_normalized(const MultiTaskDataset& test, const CoefficientMatrix& estimate);

ReplicateReport evaluate(const TrueModel& truth, const CoefficientMatrix& estimate, const MultiTaskDataset& test);

struct MetricSummary
{
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, 0 for one replicate
};

struct SupportSummary
{
    MetricSummary covered;
    MetricSummary frac_correct_zeros;
    MetricSummary frac_incorrect_zeros;
    MetricSummary exactly_fitted;
    MetricSummary support_size;
};

struct AggregateReport
{
    std::string method;
    std::size_t replicates = 0;
    SupportSummary union_support;
    SupportSummary exact_support;
    MetricSummary estimation_error;
    MetricSummary r2_test;
};

/// Per-field mean and sample standard deviation (two-pass).
AggregateReport aggregate(const std::vector<ReplicateReport>& reports, const std::string& method);

} // namespace somp
