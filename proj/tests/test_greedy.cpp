#include <doctest.h>

#include "oracles.hpp"

#include <somp/baselines.hpp>
#include <somp/errors.hpp>
#include <somp/greedy.hpp>
#include <somp/simgen.hpp>

#include <algorithm>
#include <cmath>

using namespace somp;

namespace {

std::vector<std::size_t> path_indices(const SelectionPath& path)
{
    std::vector<std::size_t> out;
    for (const auto& s : path.steps) out.push_back(s.index);
    return out;
}

} // namespace

TEST_CASE("modified BIC worked examples")
{
    CHECK(bic_score(100.0, 0, BicParams(100, 1, 1000)) == 0.0);
    CHECK(bic_score(std::exp(1.0) * 200.0, 0, BicParams(100, 2, 50)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bic_score(50.0, 3, BicParams(100, 1, 1000)) == doctest::Approx(-0.14052675824137428).epsilon(1e-14));
    CHECK(bic_score(0.0, 0, BicParams(10, 1, 5)) == doctest::Approx(std::log(1e-12)).epsilon(1e-14));
}

TEST_CASE("modified BIC agrees with the written-out formula")
{
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> rss(1e-3, 1e3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 10 + trial, tasks = 1 + trial % 7, p = 20 + 13 * trial, k = trial % 9;
        const double r = rss(rng);
        CHECK(oracle::relative_error(bic_score(r, k, BicParams(n, tasks, p)), oracle::bic_by_hand(r, k, n, tasks, p)) <
              1e-13);
    }
}

TEST_CASE("BIC increases with RSS and with model size")
{
    const BicParams params(50, 4, 300);
    for (double r = 0.5; r < 500.0; r *= 1.7) {
        CHECK(bic_score(r * 1.01, 3, params) > bic_score(r, 3, params));
        CHECK(bic_score(r, 4, params) > bic_score(r, 3, params));
    }
}

TEST_CASE("single-task S-OMP is forward regression")
{
    std::mt19937_64 rng(21);
    const Matrix x = oracle::gaussian(rng, 15, 30);
    const Vector y = oracle::gaussian(rng, 15);
    const auto data = MultiTaskDataset::shared(x, {y});
    CHECK(run_somp(data) == omp_single(data, 0));
}

TEST_CASE("every S-OMP step maximizes the pooled refit RSS reduction")
{
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 25; ++trial) {
        const Matrix x = oracle::gaussian(rng, 6, 4);
        const std::vector<Vector> ys{oracle::gaussian(rng, 6), oracle::gaussian(rng, 6)};
        const auto path = run_somp(MultiTaskDataset::shared(x, ys));
        std::vector<std::size_t> chosen;
        for (const auto& step : path.steps) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t j = 0; j < 4; ++j) {
                if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
                auto cols = chosen;
                cols.push_back(j);
                const double r = oracle::total_refit_rss({x, x}, ys, cols);
                if (r < best) {
                    best = r;
                    arg = j;
                }
            }
            CHECK(step.index == arg);
            CHECK(oracle::relative_error(step.rss, best) < 1e-9);
            chosen.push_back(arg);
        }
        CHECK(path.size() == 4);
    }
}

TEST_CASE("equal gains go to the smaller index and the copy is skipped")
{
    std::mt19937_64 rng(23);
    Matrix x = oracle::gaussian(rng, 10, 6);
    x.col(4) = x.col(1);
    const Vector y = 3.0 * x.col(1) + 0.01 * oracle::gaussian(rng, 10);
    const auto path = run_somp(MultiTaskDataset::shared(x, {y}));
    CHECK(path.steps.front().index == 1);
    const auto idx = path_indices(path);
    CHECK(std::find(idx.begin(), idx.end(), 4) == idx.end());
    CHECK(path.degenerate_skips == 1);
}

TEST_CASE("parallel candidate scans give the same path")
{
    std::mt19937_64 rng(24);
    const Matrix x = oracle::gaussian(rng, 40, 3000);
    std::vector<Vector> ys;
    for (int t = 0; t < 5; ++t) ys.push_back(oracle::gaussian(rng, 40));
    const auto data = MultiTaskDataset::shared(x, ys);
    SompConfig serial;
    serial.max_steps = 25;
    SompConfig parallel = serial;
    parallel.parallel_candidates = true;
    parallel.threads = 8;
    CHECK(run_somp(data, serial) == run_somp(data, parallel));
}

TEST_CASE("paths are nested and RSS never increases")
{
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 20; ++trial) {
        const auto tasks = static_cast<std::size_t>(1 + trial % 4);
        const Matrix x = oracle::gaussian(rng, 20, 50);
        std::vector<Vector> ys;
        for (std::size_t t = 0; t < tasks; ++t) ys.push_back(oracle::gaussian(rng, 20));
        const auto data = MultiTaskDataset::shared(x, ys);
        SompConfig shortcfg;
        shortcfg.max_steps = 7;
        const auto full = run_somp(data);
        const auto part = run_somp(data, shortcfg);
        CHECK(full.size() == 19);
        for (std::size_t k = 0; k < part.size(); ++k) CHECK(part.steps[k] == full.steps[k]);
        double prev = full.rss_empty;
        for (const auto& s : full.steps) {
            CHECK(s.rss <= prev + 1e-12 * prev);
            prev = s.rss;
        }
    }
}

TEST_CASE("an all-zero design has no valid candidate")
{
    const auto data = MultiTaskDataset::shared(Matrix::Zero(5, 3), {Vector::Ones(5)});
    try {
        (void)run_somp(data);
        FAIL("expected NoValidCandidate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoValidCandidate);
    }
}

TEST_CASE("a zero response stops before the first step")
{
    std::mt19937_64 rng(26);
    const auto path = run_somp(MultiTaskDataset::shared(oracle::gaussian(rng, 8, 5), {Vector::Zero(8)}));
    CHECK(path.size() == 0);
    CHECK(path.rss_empty == 0.0);
}

TEST_CASE("select_by_bic picks the argmin of the recorded scores")
{
    SelectionPath path;
    path.rss_empty = 100.0;
    path.steps = {{3, 40.0, 0.0}, {1, 39.0, 0.0}, {7, 10.0, 0.0}, {0, 9.9, 0.0}};
    const std::size_t n = 50, p = 200, tasks = 1;
    std::size_t want = 0;
    double best = oracle::bic_by_hand(path.rss_empty, 0, n, tasks, p);
    for (std::size_t k = 1; k <= path.size(); ++k) {
        const double b = oracle::bic_by_hand(path.rss_at(k), k, n, tasks, p);
        if (b < best) {
            best = b;
            want = k;
        }
    }
    const auto sel = select_by_bic(path, n, p, tasks);
    CHECK(sel.steps == want);
    CHECK(sel.steps == 3);
    CHECK(sel.support == SupportSet({3, 1, 7}));
    CHECK(sel.bic == doctest::Approx(best).epsilon(1e-14));
}

TEST_CASE("select_by_bic ties go to the smaller model")
{
    // RSS drop exactly compensates the penalty of one variable
    const std::size_t n = 10, p = 10;
    const double pen = (std::log(10.0) + 2.0 * std::log(10.0)) / 10.0;
    SelectionPath path;
    path.rss_empty = 10.0;
    path.steps = {{2, 10.0 * std::exp(-pen), 0.0}};
    const BicParams params(n, 1, p);
    if (bic_score(path.rss_at(1), 1, params) == bic_score(path.rss_empty, 0, params)) {
        CHECK(select_by_bic(path, n, p, 1).steps == 0);
    }
    path.steps = {{2, 10.0, 0.0}};
    CHECK(select_by_bic(path, n, p, 1).steps == 0);
}

TEST_CASE("pure noise selects few variables")
{
    std::mt19937_64 rng(27);
    std::size_t total = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = oracle::gaussian(rng, 100, 500);
        std::vector<Vector> ys;
        for (int t = 0; t < 20; ++t) ys.push_back(oracle::gaussian(rng, 100));
        const auto path = run_somp(MultiTaskDataset::shared(x, ys));
        total += select_by_bic(path, 100, 500, 20).steps;
    }
    CHECK(total == 0);
}

TEST_CASE("strong shared signal is screened within s steps")
{
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
        SimulationSpec spec;
        spec.scenario = Scenario::Sim1;
        spec.n = 100;
        spec.p = 400;
        spec.s = 5;
        spec.tasks = 20;
        spec.t_nonzero = 20;
        spec.snr = 10.0;
        spec.seed = 99;
        spec.replicate = rep;
        const auto inst = generate(spec);
        SompConfig cfg;
        cfg.max_steps = 5;
        const auto path = run_somp(inst.train, cfg);
        CHECK(path.support(5).same_elements(inst.truth.relevant_set));
        CHECK(select_by_bic(run_somp(inst.train), 100, 400, 20).support.same_elements(inst.truth.relevant_set));
    }
}

TEST_CASE("max_path_length bounds")
{
    CHECK(max_path_length(100, 1000) == 99);
    CHECK(max_path_length(100, 20) == 20);
    CHECK(max_path_length(1, 20) == 1);
}
