#include <somp/alasso.hpp>

#include <somp/errors.hpp>
#include <somp/numerics.hpp>
#include <somp/projector.hpp>

#include <cassert>
#include <cmath>
#include <exception>
#include <sstream>

namespace somp {

namespace {

/// Screened columns of one task in Gram form.
struct LassoProblem
{
    Matrix x;     // n x m
    Matrix gram;  // m x m
    Vector xty;   // m
    std::shared_ptr<const Vector> y;
    double scale = 0.0;

    LassoProblem(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened)
    {
        screened.check_bounds(data.p());
        const Matrix& full = data.design(task);
        const auto m = static_cast<Eigen::Index>(screened.size());
        x.resize(full.rows(), m);
        for (Eigen::Index i = 0; i < m; ++i) x.col(i) = full.col(static_cast<Eigen::Index>(screened[i]));
        y = data.response_ptr(task);
        gram.resize(m, m);
        xty.resize(m);
        const auto n = static_cast<std::size_t>(x.rows());
        for (Eigen::Index a = 0; a < m; ++a) {
            const std::span<const double> ca{x.col(a).data(), n};
            xty[a] = pairwise_dot(ca, {y->data(), n});
            for (Eigen::Index b = 0; b <= a; ++b) {
                gram(a, b) = gram(b, a) = pairwise_dot(ca, {x.col(b).data(), n});
            }
        }
        scale = m > 0 ? xty.cwiseAbs().maxCoeff() : 0.0;
    }

    Eigen::Index size() const { return xty.size(); }

    double rss(const Vector& beta) const
    {
        const Vector r = *y - x * beta;
        return pairwise_sum_squares({r.data(), static_cast<std::size_t>(r.size())});
    }
};

double soft_threshold(double a, double t)
{
    if (a > t) return a - t;
    if (a < -t) return a + t;
    return 0.0;
}

double kkt_violation(const LassoProblem& prob, const Vector& weights, double lambda, const Vector& beta)
{
    const Vector grad = prob.xty - prob.gram * beta;  // X'(y - X beta)
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double pen = lambda * weights[j];
        double v;
        if (beta[j] != 0.0) {
            v = std::abs(-2.0 * grad[j] + pen * (beta[j] > 0.0 ? 1.0 : -1.0));
        } else {
            v = std::max(0.0, 2.0 * std::abs(grad[j]) - pen);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

[[maybe_unused]] double objective(const LassoProblem& prob, const Vector& weights, double lambda,
                                  const Vector& beta)
{
    return prob.rss(beta) + lambda * weights.cwiseProduct(beta.cwiseAbs()).sum();
}

// Feature-sign search: repeatedly solves the smooth problem on the active set
// with fixed signs, line-searching back to the first sign change. Exact and
// finite; used to finish coordinate descent when it stalls on ill-conditioned
// Gram matrices. Returns true once the KKT conditions hold within kkt_limit.
bool feature_sign(const LassoProblem& prob, const Vector& weights, double lambda, double kkt_limit, Vector& beta)
{
    const Eigen::Index m = prob.size();
    const double inner_tol = 0.25 * kkt_limit;
    auto restricted_objective = [&](const std::vector<Eigen::Index>& idx, const Vector& b) {
        double quad = 0.0;
        double lin = 0.0;
        double pen = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto ji = idx[i];
            double row = 0.0;
            for (std::size_t k = 0; k < idx.size(); ++k) row += prob.gram(ji, idx[k]) * b[static_cast<Eigen::Index>(k)];
            quad += b[static_cast<Eigen::Index>(i)] * row;
            lin += prob.xty[ji] * b[static_cast<Eigen::Index>(i)];
            pen += weights[ji] * std::abs(b[static_cast<Eigen::Index>(i)]);
        }
        return quad - 2.0 * lin + lambda * pen;
    };

    Vector theta = Vector::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j) theta[j] = beta[j] > 0.0 ? 1.0 : (beta[j] < 0.0 ? -1.0 : 0.0);

    const std::size_t limit = 20 * static_cast<std::size_t>(m) + 100;
    for (std::size_t iter = 0; iter < limit; ++iter) {
        const Vector grad = prob.xty - prob.gram * beta;
        bool active_ok = true;
        for (Eigen::Index j = 0; j < m && active_ok; ++j) {
            if (theta[j] != 0.0) active_ok = std::abs(2.0 * grad[j] - lambda * weights[j] * theta[j]) <= inner_tol;
        }
        if (active_ok) {
            Eigen::Index worst = -1;
            double worst_excess = inner_tol;
            for (Eigen::Index j = 0; j < m; ++j) {
                if (theta[j] != 0.0) continue;
                const double excess = 2.0 * std::abs(grad[j]) - lambda * weights[j];
                if (excess > worst_excess) {
                    worst_excess = excess;
                    worst = j;
                }
            }
            if (worst < 0) return kkt_violation(prob, weights, lambda, beta) <= kkt_limit;
            theta[worst] = grad[worst] > 0.0 ? 1.0 : -1.0;
        }

        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (theta[j] != 0.0) idx.push_back(j);
        }
        const auto a = static_cast<Eigen::Index>(idx.size());
        Matrix g(a, a);
        Vector rhs(a);
        Vector current(a);
        for (Eigen::Index i = 0; i < a; ++i) {
            const auto ji = idx[static_cast<std::size_t>(i)];
            rhs[i] = prob.xty[ji] - 0.5 * lambda * weights[ji] * theta[ji];
            current[i] = beta[ji];
            for (Eigen::Index k = 0; k < a; ++k) g(i, k) = prob.gram(ji, idx[static_cast<std::size_t>(k)]);
        }
        const Eigen::LLT<Matrix> llt(g);
        if (llt.info() != Eigen::Success) return false;
        const Vector target = llt.solve(rhs);
        if (!target.allFinite()) return false;

        // candidate points: the target and every zero crossing on the way to it
        Vector best = target;
        double best_value = restricted_objective(idx, target);
        for (Eigen::Index i = 0; i < a; ++i) {
            if (current[i] == 0.0 || current[i] * target[i] > 0.0) continue;
            const double t = current[i] / (current[i] - target[i]);
            Vector point = current + t * (target - current);
            point[i] = 0.0;
            const double value = restricted_objective(idx, point);
            if (value < best_value) {
                best_value = value;
                best = point;
            }
        }
        for (Eigen::Index i = 0; i < a; ++i) {
            const auto ji = idx[static_cast<std::size_t>(i)];
            beta[ji] = best[i];
            theta[ji] = best[i] > 0.0 ? 1.0 : (best[i] < 0.0 ? -1.0 : 0.0);
        }
    }
    return false;
}

AlassoFit solve(const LassoProblem& prob, std::size_t task, const SupportSet& screened, const Vector& weights,
                double lambda, const AlassoConfig& config, const Vector* warm_start, bool throw_on_failure = true)
{
    const Eigen::Index m = prob.size();
    Vector beta = warm_start ? *warm_start : Vector::Zero(m);
    if (beta.size() != m) throw std::invalid_argument("warm start has the wrong length");
    Vector grad = prob.xty - prob.gram * beta;
    const double kkt_limit = config.kkt_tolerance * (prob.scale > 0.0 ? prob.scale : 1.0);

    std::vector<Eigen::Index> active;
    auto update = [&](Eigen::Index j) {
        const double gjj = prob.gram(j, j);
        if (gjj <= 0.0) return 0.0;
        const double a = grad[j] + gjj * beta[j];
        const double next = soft_threshold(a, 0.5 * lambda * weights[j]) / gjj;
        const double delta = next - beta[j];
        if (delta != 0.0) {
            grad -= prob.gram.col(j) * delta;
            beta[j] = next;
        }
        return std::abs(delta);
    };
    auto converged_change = [&](double change) {
        return change < config.cd_tolerance * (1.0 + (m > 0 ? beta.cwiseAbs().maxCoeff() : 0.0));
    };

#ifndef NDEBUG
    double previous = objective(prob, weights, lambda, beta);
    auto check_descent = [&] {
        const double now = objective(prob, weights, lambda, beta);
        assert(now <= previous + 1e-10 * (1.0 + std::abs(previous)));
        previous = now;
    };
#else
    auto check_descent = [] {};
#endif

    constexpr std::size_t stall_sweeps = 50;
    std::size_t sweeps = 0;
    double violation = 0.0;
    bool done = false;
    while (!done && sweeps < config.max_cd_iterations) {
        // full sweep, which also refreshes the active set
        double change = 0.0;
        active.clear();
        for (Eigen::Index j = 0; j < m; ++j) {
            change = std::max(change, update(j));
            if (beta[j] != 0.0) active.push_back(j);
        }
        ++sweeps;
        check_descent();

        if (converged_change(change)) {
            grad = prob.xty - prob.gram * beta;  // drop accumulated update error
            violation = kkt_violation(prob, weights, lambda, beta);
            done = violation <= kkt_limit;
            if (!done) {
                done = feature_sign(prob, weights, lambda, kkt_limit, beta);
                grad = prob.xty - prob.gram * beta;
            }
            continue;
        }
        if (sweeps >= stall_sweeps) {
            done = feature_sign(prob, weights, lambda, kkt_limit, beta);
            grad = prob.xty - prob.gram * beta;
            if (done) break;
        }
        // sweeps restricted to the active set until it settles or stalls
        for (std::size_t phase = 0; phase < stall_sweeps && sweeps < config.max_cd_iterations; ++phase) {
            double inner = 0.0;
            for (auto j : active) inner = std::max(inner, update(j));
            ++sweeps;
            check_descent();
            if (converged_change(inner)) break;
        }
    }
    if (!done && throw_on_failure) {
        std::ostringstream msg;
        msg << "coordinate descent did not converge within " << config.max_cd_iterations
            << " sweeps at lambda = " << lambda;
        throw Error(ErrorCode::NoConvergence, msg.str());
    }

    for (Eigen::Index j = 0; j < m; ++j) {
        if (std::abs(beta[j]) < coefficient_zero_threshold) beta[j] = 0.0;
    }

    AlassoFit fit;
    fit.task = task;
    fit.screened = screened;
    fit.lambda = lambda;
    fit.rss = prob.rss(beta);
    fit.kkt_violation = kkt_violation(prob, weights, lambda, beta);
    fit.scale = prob.scale;
    fit.sweeps = sweeps;
    fit.converged = done;
    fit.coefficients = std::move(beta);
    return fit;
}

void check_weights(const Vector& weights, const SupportSet& screened)
{
    if (static_cast<std::size_t>(weights.size()) != screened.size()) {
        throw std::invalid_argument("one weight per screened variable required");
    }
    for (Eigen::Index j = 0; j < weights.size(); ++j) {
        if (!(weights[j] > 0.0) || !std::isfinite(weights[j])) {
            throw std::invalid_argument("adaptive weights must be positive and finite");
        }
    }
}

double lambda_max_of(const LassoProblem& prob, const Vector& weights)
{
    double best = 0.0;
    for (Eigen::Index j = 0; j < prob.size(); ++j) best = std::max(best, std::abs(prob.xty[j]) / weights[j]);
    return 2.0 * best;
}

std::vector<AlassoFit> path_for(const LassoProblem& prob, std::size_t task, const SupportSet& screened,
                                const Vector& weights, const AlassoConfig& config, bool throw_on_failure = true)
{
    const double top = lambda_max_of(prob, weights);
    std::vector<AlassoFit> path;
    if (top == 0.0) {
        path.push_back(solve(prob, task, screened, weights, 0.0, config, nullptr, throw_on_failure));
        return path;
    }
    const std::size_t grid = config.lambda_grid_size;
    path.reserve(grid);
    const double log_ratio = std::log(config.lambda_min_ratio);
    for (std::size_t i = 0; i < grid; ++i) {
        const double frac = grid == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(grid - 1);
        const double lambda = top * std::exp(frac * log_ratio);
        const Vector* warm = path.empty() ? nullptr : &path.back().coefficients;
        path.push_back(solve(prob, task, screened, weights, lambda, config, warm, throw_on_failure));
    }
    return path;
}

} // namespace

void AlassoConfig::validate() const
{
    if (lambda_grid_size == 0) throw Error(ErrorCode::Config, "alasso lambda_grid_size must be >= 1");
    if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
        throw Error(ErrorCode::Config, "alasso lambda_min_ratio must lie in (0, 1)");
    }
    if (!(cd_tolerance > 0.0) || !(kkt_tolerance > 0.0) || !(weight_epsilon > 0.0)) {
        throw Error(ErrorCode::Config, "alasso tolerances must be positive");
    }
    if (max_cd_iterations == 0) throw Error(ErrorCode::Config, "alasso max_cd_iterations must be >= 1");
}

std::size_t AlassoFit::nonzeros() const
{
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < coefficients.size(); ++j) count += coefficients[j] != 0.0 ? 1 : 0;
    return count;
}

Vector compute_weights(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened,
                       const AlassoConfig& config)
{
    if (screened.empty()) return Vector();
    if (screened.size() >= data.n()) {
        throw Error(ErrorCode::DegenerateDesign, "screened set must be smaller than n for OLS weights");
    }
    screened.check_bounds(data.p());
    const Matrix& full = data.design(task);
    Matrix x(full.rows(), static_cast<Eigen::Index>(screened.size()));
    for (std::size_t i = 0; i < screened.size(); ++i) {
        x.col(static_cast<Eigen::Index>(i)) = full.col(static_cast<Eigen::Index>(screened[i]));
    }
    auto sub = MultiTaskDataset::shared(std::make_shared<const Matrix>(std::move(x)), {data.response_ptr(task)});
    CholeskyState state = init_state(sub, 0);
    for (std::size_t i = 0; i < screened.size(); ++i) {
        try {
            state.extend(i);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateColumn) throw;
            throw Error(ErrorCode::DegenerateDesign,
                        "screened columns are collinear at variable " + std::to_string(screened[i] + 1));
        }
    }
    const Vector beta = state.coefficients();
    return (beta.cwiseAbs().array() + config.weight_epsilon).inverse().matrix();
}

double alasso_lambda_max(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened,
                         const Vector& weights)
{
    check_weights(weights, screened);
    return lambda_max_of(LassoProblem(data, task, screened), weights);
}

double alasso_objective(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened,
                        const Vector& weights, double lambda, const Vector& coefficients)
{
    check_weights(weights, screened);
    const LassoProblem prob(data, task, screened);
    return prob.rss(coefficients) + lambda * weights.cwiseProduct(coefficients.cwiseAbs()).sum();
}

AlassoFit fit_alasso(const MultiTaskDataset& data, std::size_t task, const SupportSet& screened,
                     const Vector& weights, double lambda, const AlassoConfig& config, const Vector* warm_start)
{
    config.validate();
    check_weights(weights, screened);
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    return solve(LassoProblem(data, task, screened), task, screened, weights, lambda, config, warm_start);
}

std::vector<AlassoFit> fit_alasso_path(const MultiTaskDataset& data, std::size_t task,
                                       const SupportSet& screened, const Vector& weights,
                                       const AlassoConfig& config)
{
    config.validate();
    check_weights(weights, screened);
    return path_for(LassoProblem(data, task, screened), task, screened, weights, config);
}

const AlassoFit& select_fit(const std::vector<AlassoFit>& path, const BicParams& params)
{
    if (path.empty()) throw std::invalid_argument("select_fit: empty path");
    std::size_t best = 0;
    double best_score = bic_score(path[0].rss, path[0].nonzeros(), params);
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double score = bic_score(path[i].rss, path[i].nonzeros(), params);
        // strict: on ties keep the earlier (larger-lambda) fit
        if (score < best_score) {
            best_score = score;
            best = i;
        }
    }
    return path[best];
}

void AlassoDiagnostics::merge(const AlassoDiagnostics& other)
{
    fits += other.fits;
    max_kkt_ratio = std::max(max_kkt_ratio, other.max_kkt_ratio);
    no_convergence += other.no_convergence;
}

CoefficientMatrix alasso_per_task(const MultiTaskDataset& data, const std::vector<SupportSet>& screened,
                                  const AlassoOptions& options, AlassoDiagnostics* diagnostics)
{
    options.config.validate();
    const std::size_t tasks = data.tasks();
    if (screened.size() != tasks) {
        throw Error(ErrorCode::DimensionMismatch, "alasso_per_task: one screened set per task required");
    }
    const BicParams bic(data.n(), 1, options.bic_p == 0 ? data.p() : options.bic_p);

    struct TaskResult
    {
        std::vector<std::pair<std::size_t, double>> coefficients;
        AlassoDiagnostics diag;
        std::exception_ptr error;
    };
    std::vector<TaskResult> results(tasks);

    parallel_chunks(tasks, options.threads, 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            auto& out = results[t];
            if (screened[t].empty()) continue;
            try {
                const Vector w = compute_weights(data, t, screened[t], options.config);
                const LassoProblem prob(data, t, screened[t]);
                const auto path = path_for(prob, t, screened[t], w, options.config, false);
                for (const auto& fit : path) {
                    ++out.diag.fits;
                    if (!fit.converged) {
                        ++out.diag.no_convergence;
                        continue;
                    }
                    const double ratio = fit.kkt_violation / (fit.scale > 0.0 ? fit.scale : 1.0);
                    out.diag.max_kkt_ratio = std::max(out.diag.max_kkt_ratio, ratio);
                }
                const AlassoFit& chosen = select_fit(path, bic);
                for (std::size_t i = 0; i < chosen.screened.size(); ++i) {
                    const double v = chosen.coefficients[static_cast<Eigen::Index>(i)];
                    if (v != 0.0) out.coefficients.emplace_back(chosen.screened[i], v);
                }
            } catch (const Error& e) {
                if (e.code() == ErrorCode::NoConvergence) ++out.diag.no_convergence;
                out.error = std::make_exception_ptr(e.for_task(t));
            } catch (...) {
                out.error = std::current_exception();
            }
        }
    });

    CoefficientMatrix b(data.p(), tasks);
    AlassoDiagnostics total;
    for (std::size_t t = 0; t < tasks; ++t) total.merge(results[t].diag);
    if (diagnostics) diagnostics->merge(total);
    for (std::size_t t = 0; t < tasks; ++t) {
        if (results[t].error) std::rethrow_exception(results[t].error);
        for (const auto& [j, v] : results[t].coefficients) b.set(j, t, v);
    }
    return b;
}

CoefficientMatrix exact_support_pipeline(const MultiTaskDataset& data, const SupportSet& screened,
                                         const AlassoOptions& options, AlassoDiagnostics* diagnostics)
{
    if (screened.empty()) throw std::invalid_argument("exact_support_pipeline: empty screened set");
    return alasso_per_task(data, std::vector<SupportSet>(data.tasks(), screened), options, diagnostics);
}

} // namespace somp
