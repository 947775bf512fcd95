#pragma once

#include <somp/datamodel.hpp>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace somp {

enum class Scenario { Sim1, Sim2, Sim3, Sim4, Sim5 };

std::string_view scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

/**
 * Parameters of one synthetic multi-task regression problem.
 *
 *  Sim1, Sim2  iid N(0, 1) design; relevant rows 1..s.
 *  Sim3        AR(1) design, Corr(X_a, X_b) = rho^|a-b|; s = 3 relevant rows
 *              at 1, 4, 7 with coefficients 3, 1.5, 2.
 *  Sim4        block-compound design: blocks of 10 consecutive variables,
 *              correlation rho, rho^2, rho^3 for variables in the same block,
 *              adjacent blocks, and blocks two apart; relevant rows 1, 11, 21, ...
 *  Sim5        masked design, x_j = (z_j + z'_j)/sqrt 2 for j <= s and
 *              x_j = (z_j + sum_{k<=s} z_k)/2 otherwise; beta_{t,j} = 2j.
 *
 * Sims 1, 2 and 4 draw beta_{t,j} = (-1)^u (4 log(n)/sqrt(n) + |z|) with
 * u ~ Bernoulli(0.4), z ~ N(0, 1). Each relevant row is nonzero on a uniformly
 * drawn subset of t_nonzero tasks, redrawn per row.
 */
struct SimulationSpec
{
    Scenario scenario = Scenario::Sim1;
    std::size_t n = 200;
    std::size_t p = 2000;
    std::size_t s = 10;
    std::size_t tasks = 100;
    std::size_t t_nonzero = 100;
    /// Exactly one of snr / sigma must be set.
    std::optional<double> snr;
    std::optional<double> sigma;
    double rho = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    /// 0 = n.
    std::size_t test_n = 0;

    void validate() const;
    std::size_t test_rows() const { return test_n == 0 ? n : test_n; }
};

/// Counter-based generator: the k-th draw of a stream is a pure function of
/// (key, k), so streams can be consumed in any order or on any thread.
class CounterRng
{
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64();
    /// Uniform on [0, 1).
    double uniform();
    double normal();
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> spare_;
};

enum class Stream : std::uint64_t {
    Coefficients = 1,
    TrainDesign = 2,
    TestDesign = 3,
    TrainNoise = 4,
    TestNoise = 5,
};

CounterRng make_stream(std::uint64_t seed, std::uint64_t replicate, Stream stream);

/// 0-based indices of the relevant variables.
std::vector<std::size_t> relevant_positions(const SimulationSpec& spec);

/// Population covariance Cov(x_a, x_b) of the scenario's design.
double covariance_entry(const SimulationSpec& spec, std::size_t a, std::size_t b);

/// Largest |a - b| with nonzero covariance (p - 1 for Sim5).
std::size_t covariance_bandwidth(const SimulationSpec& spec);

/// Sign/magnitude law of Sims 1, 2 and 4 on the rows in `positions`.
CoefficientMatrix gen_coefficients_sim1(const SimulationSpec& spec, const std::vector<std::size_t>& positions,
                                        CounterRng& rng);

/// Ground-truth B for the scenario.
CoefficientMatrix gen_coefficients(const SimulationSpec& spec, CounterRng& rng);

/// rows x p draw from the scenario's design law. Throws
/// Error(CovarianceNotPD) if the Sim4 covariance is not positive definite.
Matrix gen_design(const SimulationSpec& spec, CounterRng& rng, std::size_t rows);

/// sqrt(mean_t beta_t' Sigma beta_t / SNR). Throws Error(ZeroSignal) if B = 0.
double sigma_from_snr(const SimulationSpec& spec, const CoefficientMatrix& b);

/**
 * Lower-triangular banded Cholesky factor of a symmetric positive-definite
 * matrix with entries a(i, j) = 0 for |i - j| > bandwidth.
 */
class BandedCholesky
{
public:
    template <class Entry>
    BandedCholesky(std::size_t dim, std::size_t bandwidth, Entry&& entry);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t bandwidth() const noexcept { return band_; }
    double at(std::size_t i, std::size_t j) const;  // L(i, j), zero outside the band

    /// out = L * in
    void multiply(const double* in, double* out) const;

private:
    void factor(const std::vector<double>& lower_band);

    std::size_t dim_;
    std::size_t band_;
    std::vector<double> l_;  // row i holds L(i, i - band .. i)
};

struct GeneratedInstance
{
    MultiTaskDataset train;
    MultiTaskDataset test;
    TrueModel truth;
};

GeneratedInstance generate(const SimulationSpec& spec);

// ---------------------------------------------------------------------------

template <class Entry>
BandedCholesky::BandedCholesky(std::size_t dim, std::size_t bandwidth, Entry&& entry)
    : dim_(dim), band_(std::min(bandwidth, dim == 0 ? 0 : dim - 1))
{
    std::vector<double> lower((band_ + 1) * dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        const std::size_t first = i >= band_ ? i - band_ : 0;
        for (std::size_t j = first; j <= i; ++j) lower[i * (band_ + 1) + (j + band_ - i)] = entry(i, j);
    }
    factor(lower);
}

} // namespace somp
