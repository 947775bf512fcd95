#include <somp/simgen.hpp>

#include <somp/errors.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

namespace somp {

namespace {

constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Error config_error(const std::string& msg)
{
    return Error(ErrorCode::Config, msg);
}

constexpr std::size_t sim4_block = 10;

} // namespace

std::string_view scenario_name(Scenario s)
{
    switch (s) {
        case Scenario::Sim1: return "sim1";
        case Scenario::Sim2: return "sim2";
        case Scenario::Sim3: return "sim3";
        case Scenario::Sim4: return "sim4";
        case Scenario::Sim5: return "sim5";
    }
    return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name)
{
    std::string key;
    for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (auto s : {Scenario::Sim1, Scenario::Sim2, Scenario::Sim3, Scenario::Sim4, Scenario::Sim5}) {
        if (key == scenario_name(s) || key == std::string(1, scenario_name(s).back())) return s;
    }
    return std::nullopt;
}

void SimulationSpec::validate() const
{
    if (n < 2) throw config_error("simulation n must be >= 2");
    if (p < 1 || tasks < 1) throw config_error("simulation p and T must be >= 1");
    if (s > p) throw config_error("simulation s must be <= p");
    if (t_nonzero > tasks) throw config_error("simulation t_nonzero must be <= T");
    if (snr.has_value() == sigma.has_value()) throw config_error("set exactly one of snr and sigma");
    if (snr && !(*snr > 0.0)) throw config_error("snr must be positive");
    if (sigma && !(*sigma > 0.0)) throw config_error("sigma must be positive");
    if ((scenario == Scenario::Sim3 || scenario == Scenario::Sim4) && !(rho >= 0.0 && rho < 1.0)) {
        throw config_error("rho must lie in [0, 1)");
    }
    if (scenario == Scenario::Sim3 && s != 3) throw config_error("sim3 has exactly s = 3 relevant variables");
    if (scenario == Scenario::Sim3 && p < 7) throw config_error("sim3 needs p >= 7");
    if (scenario == Scenario::Sim4 && s > 0 && sim4_block * (s - 1) >= p) {
        throw config_error("sim4 relevant positions 1, 11, ... exceed p");
    }
}

// ---------------------------------------------------------------------------

std::uint64_t CounterRng::next_u64()
{
    return mix64(key_ + golden * ++counter_);
}

double CounterRng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal()
{
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    // Box-Muller; u1 in (0, 1] keeps the log finite
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

std::uint64_t CounterRng::below(std::uint64_t bound)
{
    if (bound == 0) throw std::invalid_argument("below: empty range");
    const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x >= limit) return x % bound;
    }
}

CounterRng make_stream(std::uint64_t seed, std::uint64_t replicate, Stream stream)
{
    std::uint64_t key = mix64(seed ^ 0x5D588B656C078965ULL);
    key = mix64(key ^ (replicate * golden + 0x2545F4914F6CDD1DULL));
    key = mix64(key ^ static_cast<std::uint64_t>(stream));
    return CounterRng(key);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> relevant_positions(const SimulationSpec& spec)
{
    std::vector<std::size_t> pos;
    switch (spec.scenario) {
        case Scenario::Sim3:
            pos = {0, 3, 6};
            break;
        case Scenario::Sim4:
            for (std::size_t i = 0; i < spec.s; ++i) pos.push_back(sim4_block * i);
            break;
        default:
            pos.resize(spec.s);
            std::iota(pos.begin(), pos.end(), std::size_t{0});
    }
    return pos;
}

double covariance_entry(const SimulationSpec& spec, std::size_t a, std::size_t b)
{
    switch (spec.scenario) {
        case Scenario::Sim1:
        case Scenario::Sim2:
            return a == b ? 1.0 : 0.0;
        case Scenario::Sim3: {
            const std::size_t gap = a > b ? a - b : b - a;
            return std::pow(spec.rho, static_cast<double>(gap));
        }
        case Scenario::Sim4: {
            if (a == b) return 1.0;
            const std::size_t ba = a / sim4_block, bb = b / sim4_block;
            const std::size_t gap = ba > bb ? ba - bb : bb - ba;
            return gap <= 2 ? std::pow(spec.rho, static_cast<double>(gap + 1)) : 0.0;
        }
        case Scenario::Sim5: {
            const double s = static_cast<double>(spec.s);
            const bool ra = a < spec.s, rb = b < spec.s;
            if (a == b) return ra ? 1.0 : (1.0 + s) / 4.0;
            if (ra && rb) return 0.0;
            if (ra || rb) return 1.0 / (2.0 * std::sqrt(2.0));
            return s / 4.0;
        }
    }
    return 0.0;
}

std::size_t covariance_bandwidth(const SimulationSpec& spec)
{
    switch (spec.scenario) {
        case Scenario::Sim1:
        case Scenario::Sim2:
            return 0;
        case Scenario::Sim4:
            return 3 * sim4_block - 1;
        default:
            return spec.p - 1;
    }
}

namespace {

/// Uniform t_nonzero-subset of [0, T), ascending.
std::vector<std::size_t> draw_tasks(std::size_t tasks, std::size_t k, CounterRng& rng)
{
    std::vector<std::size_t> perm(tasks);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto r = i + static_cast<std::size_t>(rng.below(tasks - i));
        std::swap(perm[i], perm[r]);
    }
    perm.resize(k);
    std::sort(perm.begin(), perm.end());
    return perm;
}

} // namespace

CoefficientMatrix gen_coefficients_sim1(const SimulationSpec& spec, const std::vector<std::size_t>& positions,
                                        CounterRng& rng)
{
    CoefficientMatrix b(spec.p, spec.tasks);
    const double dn = static_cast<double>(spec.n);
    const double floor_magnitude = 4.0 * std::log(dn) / std::sqrt(dn);
    for (auto j : positions) {
        for (auto t : draw_tasks(spec.tasks, spec.t_nonzero, rng)) {
            const bool negative = rng.uniform() < 0.4;
            const double magnitude = floor_magnitude + std::abs(rng.normal());
            b.set(j, t, negative ? -magnitude : magnitude);
        }
    }
    return b;
}

CoefficientMatrix gen_coefficients(const SimulationSpec& spec, CounterRng& rng)
{
    const auto positions = relevant_positions(spec);
    switch (spec.scenario) {
        case Scenario::Sim3: {
            static constexpr double values[] = {3.0, 1.5, 2.0};
            CoefficientMatrix b(spec.p, spec.tasks);
            for (std::size_t i = 0; i < positions.size(); ++i) {
                for (auto t : draw_tasks(spec.tasks, spec.t_nonzero, rng)) b.set(positions[i], t, values[i]);
            }
            return b;
        }
        case Scenario::Sim5: {
            CoefficientMatrix b(spec.p, spec.tasks);
            for (auto j : positions) {
                for (auto t : draw_tasks(spec.tasks, spec.t_nonzero, rng)) {
                    b.set(j, t, 2.0 * static_cast<double>(j + 1));
                }
            }
            return b;
        }
        default:
            return gen_coefficients_sim1(spec, positions, rng);
    }
}

// ---------------------------------------------------------------------------

void BandedCholesky::factor(const std::vector<double>& a)
{
    const std::size_t w = band_ + 1;
    l_.assign(w * dim_, 0.0);
    auto idx = [&](std::size_t i, std::size_t j) { return i * w + (j + band_ - i); };
    for (std::size_t i = 0; i < dim_; ++i) {
        const std::size_t first = i >= band_ ? i - band_ : 0;
        for (std::size_t j = first; j <= i; ++j) {
            double sum = a[idx(i, j)];
            const std::size_t kfirst = std::max(first, j >= band_ ? j - band_ : 0);
            for (std::size_t k = kfirst; k < j; ++k) sum -= l_[idx(i, k)] * l_[idx(j, k)];
            if (i == j) {
                if (!(sum > 0.0)) {
                    throw Error(ErrorCode::CovarianceNotPD,
                                "covariance is not positive definite (pivot " + std::to_string(i + 1) + ")");
                }
                l_[idx(i, i)] = std::sqrt(sum);
            } else {
                l_[idx(i, j)] = sum / l_[idx(j, j)];
            }
        }
    }
}

double BandedCholesky::at(std::size_t i, std::size_t j) const
{
    if (j > i || i - j > band_) return 0.0;
    return l_[i * (band_ + 1) + (j + band_ - i)];
}

void BandedCholesky::multiply(const double* in, double* out) const
{
    const std::size_t w = band_ + 1;
    for (std::size_t i = 0; i < dim_; ++i) {
        const std::size_t first = i >= band_ ? i - band_ : 0;
        const double* row = &l_[i * w + (first + band_ - i)];
        double sum = 0.0;
        for (std::size_t k = first; k <= i; ++k) sum += row[k - first] * in[k];
        out[i] = sum;
    }
}

// ---------------------------------------------------------------------------

Matrix gen_design(const SimulationSpec& spec, CounterRng& rng, std::size_t rows)
{
    if (rows == 0) throw std::invalid_argument("gen_design: rows must be >= 1");
    const std::size_t p = spec.p;
    Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
    std::vector<double> buf(p), out(p);

    auto store = [&](std::size_t i, const std::vector<double>& v) {
        for (std::size_t j = 0; j < p; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
    };

    switch (spec.scenario) {
        case Scenario::Sim1:
        case Scenario::Sim2:
            for (std::size_t i = 0; i < rows; ++i) {
                for (auto& v : buf) v = rng.normal();
                store(i, buf);
            }
            break;
        case Scenario::Sim3: {
            const double rho = spec.rho;
            const double innovation = std::sqrt(1.0 - rho * rho);
            for (std::size_t i = 0; i < rows; ++i) {
                buf[0] = rng.normal();
                for (std::size_t j = 1; j < p; ++j) buf[j] = rho * buf[j - 1] + innovation * rng.normal();
                store(i, buf);
            }
            break;
        }
        case Scenario::Sim4: {
            const BandedCholesky chol(p, covariance_bandwidth(spec),
                                      [&](std::size_t a, std::size_t b) { return covariance_entry(spec, a, b); });
            for (std::size_t i = 0; i < rows; ++i) {
                for (auto& v : buf) v = rng.normal();
                chol.multiply(buf.data(), out.data());
                store(i, out);
            }
            break;
        }
        case Scenario::Sim5: {
            const std::size_t s = spec.s;
            std::vector<double> z2(s);
            for (std::size_t i = 0; i < rows; ++i) {
                for (auto& v : buf) v = rng.normal();
                for (auto& v : z2) v = rng.normal();
                double shared = 0.0;
                for (std::size_t k = 0; k < s; ++k) shared += buf[k];
                for (std::size_t j = 0; j < p; ++j) {
                    out[j] = j < s ? (buf[j] + z2[j]) / std::sqrt(2.0) : (buf[j] + shared) / 2.0;
                }
                store(i, out);
            }
            break;
        }
    }
    return x;
}

double sigma_from_snr(const SimulationSpec& spec, const CoefficientMatrix& b)
{
    if (!spec.snr || !(*spec.snr > 0.0)) throw std::invalid_argument("sigma_from_snr needs a positive SNR");
    std::vector<std::vector<std::pair<std::size_t, double>>> columns(b.tasks());
    for (const auto& [key, v] : b.entries()) columns[key.second].emplace_back(key.first, v);
    double total = 0.0;
    for (const auto& col : columns) {
        for (const auto& [ja, va] : col) {
            for (const auto& [jb, vb] : col) total += va * vb * covariance_entry(spec, ja, jb);
        }
    }
    const double mean = total / static_cast<double>(b.tasks());
    if (!(mean > 0.0)) throw Error(ErrorCode::ZeroSignal, "all regression coefficients are zero");
    return std::sqrt(mean / *spec.snr);
}

namespace {

MultiTaskDataset simulate_responses(const Matrix& design, const CoefficientMatrix& b, double sigma,
                                    CounterRng& noise)
{
    const auto n = design.rows();
    std::vector<Vector> ys(b.tasks(), Vector::Zero(n));
    for (const auto& [key, v] : b.entries()) ys[key.second] += v * design.col(static_cast<Eigen::Index>(key.first));
    for (auto& y : ys) {
        for (Eigen::Index i = 0; i < n; ++i) y[i] += sigma * noise.normal();
    }
    return MultiTaskDataset::shared(design, std::move(ys));
}

} // namespace

GeneratedInstance generate(const SimulationSpec& spec)
{
    spec.validate();
    auto coef_rng = make_stream(spec.seed, spec.replicate, Stream::Coefficients);
    CoefficientMatrix b = gen_coefficients(spec, coef_rng);
    const double sigma = spec.sigma ? *spec.sigma : sigma_from_snr(spec, b);

    auto train_rng = make_stream(spec.seed, spec.replicate, Stream::TrainDesign);
    auto test_rng = make_stream(spec.seed, spec.replicate, Stream::TestDesign);
    auto train_noise = make_stream(spec.seed, spec.replicate, Stream::TrainNoise);
    auto test_noise = make_stream(spec.seed, spec.replicate, Stream::TestNoise);

    const Matrix x_train = gen_design(spec, train_rng, spec.n);
    const Matrix x_test = gen_design(spec, test_rng, spec.test_rows());
    auto train = simulate_responses(x_train, b, sigma, train_noise);
    auto test = simulate_responses(x_test, b, sigma, test_noise);
    return GeneratedInstance{std::move(train), std::move(test), TrueModel(std::move(b), sigma)};
}

} // namespace somp
