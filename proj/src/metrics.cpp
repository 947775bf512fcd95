#include <somp/metrics.hpp>

#include <somp/errors.hpp>

#include <cmath>
#include <functional>

namespace somp {

namespace {

void check_dims(const TrueModel& truth, const CoefficientMatrix& estimate)
{
    const auto& b = truth.coefficients;
    if (b.p() != estimate.p() || b.tasks() != estimate.tasks()) {
        throw Error(ErrorCode::DimensionMismatch, "estimate is " + std::to_string(estimate.p()) + "x" +
                                                      std::to_string(estimate.tasks()) + ", truth is " +
                                                      std::to_string(b.p()) + "x" + std::to_string(b.tasks()));
    }
}

/// Shared formula: `total` positions, `truth` and `estimate` are the nonzero sets.
template <class Set>
SupportMetrics support_metrics(double total, const Set& truth, const Set& estimate)
{
    std::size_t hits = 0;
    for (const auto& e : estimate) hits += truth.count(e);
    const double s = static_cast<double>(truth.size());
    const double false_positives = static_cast<double>(estimate.size() - hits);
    const double misses = s - static_cast<double>(hits);

    SupportMetrics m;
    m.covered = hits == truth.size();
    m.frac_correct_zeros = total > s ? (total - s - false_positives) / (total - s) : 1.0;
    m.frac_incorrect_zeros = s > 0 ? misses / s : 0.0;
    m.exactly_fitted = m.covered && estimate.size() == truth.size();
    m.support_size = estimate.size();
    return m;
}

std::set<std::size_t> as_set(const SupportSet& s)
{
    return {s.begin(), s.end()};
}

double residual_sum(const MultiTaskDataset& test, const CoefficientMatrix& estimate)
{
    if (estimate.p() != test.p() || estimate.tasks() != test.tasks()) {
        throw Error(ErrorCode::DimensionMismatch, "estimate does not match test data dimensions");
    }
    double sse = 0.0;
    for (std::size_t t = 0; t < test.tasks(); ++t) {
        const Vector fitted = test.design(t) * estimate.column(t);
        sse += (test.response(t) - fitted).squaredNorm();
    }
    return sse;
}

MetricSummary summarize(const std::vector<ReplicateReport>& reports,
                        const std::function<double(const ReplicateReport&)>& field)
{
    const double count = static_cast<double>(reports.size());
    double sum = 0.0;
    for (const auto& r : reports) sum += field(r);
    MetricSummary out;
    out.mean = sum / count;
    if (reports.size() > 1) {
        double ss = 0.0;
        for (const auto& r : reports) {
            const double d = field(r) - out.mean;
            ss += d * d;
        }
        out.sd = std::sqrt(ss / (count - 1.0));
    }
    return out;
}

SupportSummary summarize_support(const std::vector<ReplicateReport>& reports,
                                 const SupportMetrics ReplicateReport::*which)
{
    auto get = [which](auto field) {
        return [which, field](const ReplicateReport& r) { return field(r.*which); };
    };
    SupportSummary s;
    s.covered = summarize(reports, get([](const SupportMetrics& m) { return m.covered ? 1.0 : 0.0; }));
    s.frac_correct_zeros = summarize(reports, get([](const SupportMetrics& m) { return m.frac_correct_zeros; }));
    s.frac_incorrect_zeros =
        summarize(reports, get([](const SupportMetrics& m) { return m.frac_incorrect_zeros; }));
    s.exactly_fitted = summarize(reports, get([](const SupportMetrics& m) { return m.exactly_fitted ? 1.0 : 0.0; }));
    s.support_size =
        summarize(reports, get([](const SupportMetrics& m) { return static_cast<double>(m.support_size); }));
    return s;
}

} // namespace

SupportMetrics union_metrics(const TrueModel& truth, const CoefficientMatrix& estimate)
{
    check_dims(truth, estimate);
    return support_metrics(static_cast<double>(estimate.p()), as_set(truth.relevant_set),
                           as_set(union_support(estimate)));
}

SupportMetrics exact_metrics(const TrueModel& truth, const CoefficientMatrix& estimate)
{
    check_dims(truth, estimate);
    const double grid = static_cast<double>(estimate.p()) * static_cast<double>(estimate.tasks());
    return support_metrics(grid, exact_support(truth.coefficients), exact_support(estimate));
}

double estimation_error(const TrueModel& truth, const CoefficientMatrix& estimate)
{
    check_dims(truth, estimate);
    double total = 0.0;
    const auto& b = truth.coefficients.entries();
    const auto& e = estimate.entries();
    // merge the two sorted entry maps
    auto i = b.begin();
    auto k = e.begin();
    while (i != b.end() || k != e.end()) {
        double d;
        if (k == e.end() || (i != b.end() && i->first < k->first)) {
            d = i->second;
            ++i;
        } else if (i == b.end() || k->first < i->first) {
            d = k->second;
            ++k;
        } else {
            d = i->second - k->second;
            ++i;
            ++k;
        }
        total += d * d;
    }
    return total;
}

double r2_test(const MultiTaskDataset& test, const CoefficientMatrix& estimate)
{
    const double sse = residual_sum(test, estimate);
    double sst = 0.0;
    for (std::size_t t = 0; t < test.tasks(); ++t) {
        const Vector& y = test.response(t);
        sst += (y.array() - y.mean()).square().sum();
    }
    if (sst == 0.0) throw Error(ErrorCode::ZeroVariance, "test responses have zero variance");
    return 1.0 - sse / sst;
}

double r2_normalized(const MultiTaskDataset& test, const CoefficientMatrix& estimate)
{
    const double sse = residual_sum(test, estimate);
    return 1.0 - sse / (static_cast<double>(test.n()) * static_cast<double>(test.tasks()));
}

ReplicateReport evaluate(const TrueModel& truth, const CoefficientMatrix& estimate, const MultiTaskDataset& test)
{
    ReplicateReport r;
    r.union_support = union_metrics(truth, estimate);
    r.exact_support = exact_metrics(truth, estimate);
    r.estimation_error = estimation_error(truth, estimate);
    r.r2_test = r2_test(test, estimate);
    return r;
}

AggregateReport aggregate(const std::vector<ReplicateReport>& reports, const std::string& method)
{
    if (reports.empty()) throw std::invalid_argument("aggregate: no replicates");
    AggregateReport a;
    a.method = method;
    a.replicates = reports.size();
    a.union_support = summarize_support(reports, &ReplicateReport::union_support);
    a.exact_support = summarize_support(reports, &ReplicateReport::exact_support);
    a.estimation_error = summarize(reports, [](const ReplicateReport& r) { return r.estimation_error; });
    a.r2_test = summarize(reports, [](const ReplicateReport& r) { return r.r2_test; });
    return a;
}

} // namespace somp
