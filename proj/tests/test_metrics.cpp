#include <doctest.h>

#include "oracles.hpp"

#include <somp/errors.hpp>
#include <somp/metrics.hpp>

#include <cmath>

using namespace somp;

namespace {

TrueModel truth_on(std::size_t p, std::size_t tasks, const std::vector<std::pair<std::size_t, std::size_t>>& cells)
{
    CoefficientMatrix b(p, tasks);
    for (const auto& [j, t] : cells) b.set(j, t, 1.0 + static_cast<double>(j));
    return TrueModel(b, 1.0);
}

CoefficientMatrix estimate_on(std::size_t p, std::size_t tasks,
                              const std::vector<std::pair<std::size_t, std::size_t>>& cells)
{
    CoefficientMatrix b(p, tasks);
    for (const auto& [j, t] : cells) b.set(j, t, 0.5);
    return b;
}

} // namespace

TEST_CASE("union metrics worked example")
{
    const auto truth = truth_on(10, 2, {{0, 0}, {1, 1}, {2, 0}});
    const auto m = union_metrics(truth, estimate_on(10, 2, {{0, 1}, {1, 1}, {5, 0}}));
    CHECK_FALSE(m.covered);
    CHECK(m.frac_correct_zeros == doctest::Approx(6.0 / 7.0));
    CHECK(m.frac_incorrect_zeros == doctest::Approx(1.0 / 3.0));
    CHECK_FALSE(m.exactly_fitted);
    CHECK(m.support_size == 3);

    const auto exact = union_metrics(truth, estimate_on(10, 2, {{0, 1}, {1, 0}, {2, 1}}));
    CHECK(exact.covered);
    CHECK(exact.exactly_fitted);
    CHECK(exact.frac_correct_zeros == 1.0);
    CHECK(exact.frac_incorrect_zeros == 0.0);
}

TEST_CASE("exact metrics count individual coefficients")
{
    const auto truth = truth_on(10, 2, {{0, 0}, {1, 1}, {2, 0}});
    const auto m = exact_metrics(truth, estimate_on(10, 2, {{0, 0}, {1, 1}, {2, 0}, {2, 1}}));
    CHECK(m.covered);
    CHECK_FALSE(m.exactly_fitted);
    CHECK(m.support_size == 4);
    CHECK(m.frac_correct_zeros == doctest::Approx(16.0 / 17.0));
    CHECK(m.frac_incorrect_zeros == 0.0);
    const auto empty = exact_metrics(truth, CoefficientMatrix(10, 2));
    CHECK_FALSE(empty.covered);
    CHECK(empty.frac_incorrect_zeros == 1.0);
    CHECK(empty.frac_correct_zeros == 1.0);
    CHECK(empty.support_size == 0);
}

TEST_CASE("support metrics against a double-loop count")
{
    std::mt19937_64 rng(50);
    std::bernoulli_distribution tr(0.15), est(0.25);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = 30, tasks = 4;
        std::vector<std::pair<std::size_t, std::size_t>> tc, ec;
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t t = 0; t < tasks; ++t) {
                if (tr(rng)) tc.emplace_back(j, t);
                if (est(rng)) ec.emplace_back(j, t);
            }
        }
        if (tc.empty()) continue;
        const auto truth = truth_on(p, tasks, tc);
        const auto b = estimate_on(p, tasks, ec);

        std::size_t s = 0, hit = 0, fp = 0, size = 0;
        std::size_t cs = 0, chit = 0, cfp = 0, csize = 0;
        for (std::size_t j = 0; j < p; ++j) {
            bool trow = false, erow = false;
            for (std::size_t t = 0; t < tasks; ++t) {
                const bool tv = truth.coefficients.get(j, t) != 0.0, ev = b.get(j, t) != 0.0;
                trow |= tv;
                erow |= ev;
                cs += tv;
                csize += ev;
                chit += tv && ev;
                cfp += !tv && ev;
            }
            s += trow;
            size += erow;
            hit += trow && erow;
            fp += !trow && erow;
        }
        const auto u = union_metrics(truth, b);
        CHECK(u.covered == (hit == s));
        CHECK(u.support_size == size);
        CHECK(u.frac_incorrect_zeros == doctest::Approx(static_cast<double>(s - hit) / s));
        CHECK(u.frac_correct_zeros == doctest::Approx(static_cast<double>(p - s - fp) / (p - s)));
        CHECK(u.exactly_fitted == (hit == s && size == s));
        const auto e = exact_metrics(truth, b);
        CHECK(e.covered == (chit == cs));
        CHECK(e.support_size == csize);
        CHECK(e.frac_incorrect_zeros == doctest::Approx(static_cast<double>(cs - chit) / cs));
        CHECK(e.frac_correct_zeros == doctest::Approx(static_cast<double>(p * tasks - cs - cfp) / (p * tasks - cs)));
        // complementarity on the true set
        CHECK(u.frac_incorrect_zeros + static_cast<double>(hit) / s == doctest::Approx(1.0));
    }
}

TEST_CASE("estimation error is the squared Frobenius distance")
{
    CoefficientMatrix b(4, 2);
    b.set(0, 0, 3.0);
    b.set(2, 1, -1.0);
    const TrueModel truth(b, 1.0);
    CoefficientMatrix e(4, 2);
    e.set(0, 0, 2.5);
    e.set(3, 1, 2.0);
    CHECK(estimation_error(truth, e) == doctest::Approx(0.25 + 1.0 + 4.0));
    CHECK(estimation_error(truth, b) == 0.0);
}

TEST_CASE("test R2 against a direct computation")
{
    std::mt19937_64 rng(51);
    const Matrix x = oracle::gaussian(rng, 30, 6);
    std::vector<Vector> ys{oracle::gaussian(rng, 30), oracle::gaussian(rng, 30)};
    ys[0] += 2.0 * x.col(1);
    const auto test = MultiTaskDataset::shared(x, ys);
    CoefficientMatrix b(6, 2);
    b.set(1, 0, 1.9);
    b.set(4, 1, 0.3);
    double sse = 0.0, sst = 0.0, raw = 0.0;
    for (std::size_t t = 0; t < 2; ++t) {
        const Vector r = ys[t] - x * b.column(t);
        const double mean = ys[t].mean();
        for (Eigen::Index i = 0; i < 30; ++i) {
            sse += r[i] * r[i];
            sst += (ys[t][i] - mean) * (ys[t][i] - mean);
        }
        raw += r.squaredNorm();
    }
    CHECK(r2_test(test, b) == doctest::Approx(1.0 - sse / sst).epsilon(1e-12));
    CHECK(r2_normalized(test, b) == doctest::Approx(1.0 - raw / 60.0).epsilon(1e-12));

    const auto flat = MultiTaskDataset::shared(x, {Vector::Constant(30, 2.0)});
    CHECK_THROWS_AS((void)r2_test(flat, CoefficientMatrix(6, 1)), Error);
}

TEST_CASE("aggregate uses mean and sample standard deviation")
{
    std::vector<ReplicateReport> reps(3);
    reps[0].estimation_error = 1.0;
    reps[1].estimation_error = 2.0;
    reps[2].estimation_error = 6.0;
    reps[0].union_support.covered = true;
    reps[1].union_support.covered = true;
    reps[0].union_support.support_size = 4;
    reps[1].union_support.support_size = 3;
    reps[2].union_support.support_size = 5;
    const auto a = aggregate(reps, "X");
    CHECK(a.method == "X");
    CHECK(a.replicates == 3);
    CHECK(a.estimation_error.mean == doctest::Approx(3.0));
    CHECK(a.estimation_error.sd == doctest::Approx(std::sqrt(7.0)));
    CHECK(a.union_support.covered.mean == doctest::Approx(2.0 / 3.0));
    CHECK(a.union_support.support_size.mean == doctest::Approx(4.0));
    CHECK(a.union_support.support_size.sd == doctest::Approx(1.0));

    // large offset: a one-pass formula would lose the spread
    std::vector<ReplicateReport> shifted(3);
    for (int i = 0; i < 3; ++i) shifted[static_cast<std::size_t>(i)].estimation_error = 1e9 + i;
    CHECK(aggregate(shifted, "Y").estimation_error.sd == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(aggregate({reps[0]}, "Z").estimation_error.sd == 0.0);
}
