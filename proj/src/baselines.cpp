#include <somp/baselines.hpp>

#include <somp/errors.hpp>
#include <somp/numerics.hpp>
#include <somp/projector.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <numeric>

namespace somp {

namespace {

std::vector<double> column_norms(const Matrix& x)
{
    std::vector<double> norms(static_cast<std::size_t>(x.cols()));
    const auto n = static_cast<std::size_t>(x.rows());
    for (std::size_t j = 0; j < norms.size(); ++j) {
        norms[j] = std::sqrt(pairwise_sum_squares({x.col(static_cast<Eigen::Index>(j)).data(), n}));
    }
    return norms;
}

/// Indices of `candidates` sorted by statistic descending, ties by index.
std::vector<std::size_t> rank_by(std::vector<std::size_t> candidates, const std::vector<double>& stat,
                                 std::size_t keep)
{
    keep = std::min(keep, candidates.size());
    auto cmp = [&](std::size_t a, std::size_t b) { return stat[a] > stat[b] || (stat[a] == stat[b] && a < b); };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      cmp);
    candidates.resize(keep);
    return candidates;
}

Matrix gather_columns(const Matrix& x, const SupportSet& support)
{
    Matrix out(x.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        out.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(support[i]));
    }
    return out;
}

template <class Fn>
void for_each_task(std::size_t tasks, std::size_t threads, Fn&& fn)
{
    std::vector<std::exception_ptr> errors(tasks);
    parallel_chunks(tasks, threads, 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            try {
                fn(t);
            } catch (const Error& e) {
                errors[t] = std::make_exception_ptr(e.for_task(t));
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    });
    // lowest failing task wins, whatever the scheduling
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace

BaselineConfig BaselineConfig::resolved(std::size_t n, std::size_t p) const
{
    BaselineConfig out = *this;
    const double dn = static_cast<double>(n);
    if (out.sis_model_size == 0) out.sis_model_size = std::min(n > 1 ? n - 1 : 1, p);
    if (out.isis_iterations == 0) {
        out.isis_iterations = n > 2 ? static_cast<std::size_t>(std::max(1.0, std::floor(std::log(dn) - 1.0))) : 1;
    }
    if (out.isis_per_iter == 0) {
        const std::size_t by_n = n > 1 ? static_cast<std::size_t>(std::floor(dn / std::log(dn))) : 1;
        out.isis_per_iter = std::max<std::size_t>(1, std::min(by_n, p / out.isis_iterations));
    }
    if (out.omp_max_steps == 0) out.omp_max_steps = max_path_length(n, p);

    if (out.sis_model_size >= n && n > 1) throw Error(ErrorCode::Config, "sis_model_size must be < n");
    if (out.sis_model_size > p) throw Error(ErrorCode::Config, "sis_model_size must be <= p");
    if (out.isis_per_iter * out.isis_iterations > p) {
        throw Error(ErrorCode::Config, "isis_per_iter * isis_iterations must be <= p");
    }
    return out;
}

SupportSet sis_screen(const MultiTaskDataset& data, std::size_t task, std::size_t size)
{
    if (size == 0 || size > data.p()) throw std::invalid_argument("sis_screen: size must lie in [1, p]");
    const Matrix& x = data.design(task);
    const Vector& y = data.response(task);
    const auto n = static_cast<std::size_t>(x.rows());
    const auto norms = column_norms(x);
    std::vector<double> stat(data.p());
    for (std::size_t j = 0; j < stat.size(); ++j) {
        const double c = pairwise_dot({x.col(static_cast<Eigen::Index>(j)).data(), n}, {y.data(), n});
        stat[j] = norms[j] > 0.0 ? std::abs(c) / norms[j] : 0.0;
    }
    std::vector<std::size_t> all(data.p());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return SupportSet(rank_by(std::move(all), stat, size));
}

SupportSet isis_screen(const MultiTaskDataset& data, std::size_t task, const BaselineConfig& config,
                       IsisTrace* trace)
{
    const BaselineConfig cfg = config.resolved(data.n(), data.p());
    const std::size_t p = data.p();
    const auto norms = column_norms(data.design(task));

    ProjectorOptions options;
    options.capacity = std::min(cfg.isis_per_iter * cfg.isis_iterations, data.n());
    CholeskyState state = init_state(data, task, options);

    std::vector<char> used(p, 0);
    IsisTrace local;
    std::vector<double> stat(p);
    for (std::size_t it = 0; it < cfg.isis_iterations; ++it) {
        std::vector<std::size_t> remaining;
        for (std::size_t j = 0; j < p; ++j) {
            if (used[j]) continue;
            remaining.push_back(j);
            // X_j'r; the first iteration's residual is y itself
            stat[j] = norms[j] > 0.0 ? std::abs(state.residual_correlation(j)) / norms[j] : 0.0;
        }
        if (remaining.empty()) break;
        auto picked = rank_by(std::move(remaining), stat, cfg.isis_per_iter);
        std::vector<std::size_t> added;
        for (auto j : picked) {
            used[j] = 1;
            if (state.degenerate(j)) {
                ++local.skipped_collinear;
                continue;
            }
            state.extend(j);
            added.push_back(j);
        }
        local.iterations.push_back(std::move(added));
    }
    if (trace) *trace = local;
    return state.selected();
}

SelectionPath omp_single(const MultiTaskDataset& data, std::size_t task, std::size_t max_steps)
{
    SompConfig config;
    config.max_steps = max_steps;
    return run_somp(data.task_view(task), config);
}

std::string_view method_name(Method m)
{
    switch (m) {
        case Method::SisAlasso: return "SIS-ALASSO";
        case Method::IsisAlasso: return "ISIS-ALASSO";
        case Method::Omp: return "OMP";
        case Method::Somp: return "S-OMP";
        case Method::SompAlasso: return "S-OMP-ALASSO";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view name)
{
    std::string key;
    for (char c : name) {
        if (c == '-' || c == '_') continue;
        key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (key == "SISALASSO") return Method::SisAlasso;
    if (key == "ISISALASSO") return Method::IsisAlasso;
    if (key == "OMP") return Method::Omp;
    if (key == "SOMP") return Method::Somp;
    if (key == "SOMPALASSO") return Method::SompAlasso;
    return std::nullopt;
}

std::vector<Method> all_methods()
{
    return {Method::SisAlasso, Method::IsisAlasso, Method::Omp, Method::Somp, Method::SompAlasso};
}

CoefficientMatrix ols_on_support(const MultiTaskDataset& data, const SupportSet& support)
{
    CoefficientMatrix b(data.p(), data.tasks());
    if (support.empty()) return b;
    support.check_bounds(data.p());

    auto place = [&](std::size_t t, const Vector& beta) {
        for (std::size_t i = 0; i < support.size(); ++i) b.set(support[i], t, beta[static_cast<Eigen::Index>(i)]);
    };
    auto fit = [&](const MultiTaskDataset& sub, auto&& on_task) {
        Projector proj(sub);
        for (std::size_t i = 0; i < support.size(); ++i) proj.extend(i);
        for (std::size_t t = 0; t < sub.tasks(); ++t) on_task(t, proj.coefficients(t));
    };

    if (data.shared_design()) {
        std::vector<std::shared_ptr<const Vector>> ys;
        for (std::size_t t = 0; t < data.tasks(); ++t) ys.push_back(data.response_ptr(t));
        auto sub = MultiTaskDataset::shared(std::make_shared<const Matrix>(gather_columns(data.design(0), support)),
                                            std::move(ys));
        fit(sub, place);
    } else {
        for (std::size_t t = 0; t < data.tasks(); ++t) {
            auto sub = MultiTaskDataset::shared(
                std::make_shared<const Matrix>(gather_columns(data.design(t), support)), {data.response_ptr(t)});
            fit(sub, [&](std::size_t, const Vector& beta) { place(t, beta); });
        }
    }
    return b;
}

PipelineResult run_pipeline(const MultiTaskDataset& data, Method method, const PipelineConfig& config)
{
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    const std::size_t tasks = data.tasks();
    const std::size_t bic_p = config.bic_p == 0 ? p : config.bic_p;
    const BaselineConfig base = config.baseline.resolved(n, p);

    AlassoOptions alasso;
    alasso.config = config.alasso;
    alasso.bic_p = bic_p;
    alasso.threads = config.threads;

    PipelineResult result{CoefficientMatrix(p, tasks), {}, {}};
    switch (method) {
        case Method::SisAlasso:
        case Method::IsisAlasso: {
            result.screened.resize(tasks);
            for_each_task(tasks, config.threads, [&](std::size_t t) {
                result.screened[t] = method == Method::SisAlasso ? sis_screen(data, t, base.sis_model_size)
                                                                 : isis_screen(data, t, base);
            });
            result.estimate = alasso_per_task(data, result.screened, alasso, &result.alasso);
            break;
        }
        case Method::Omp: {
            result.screened.resize(tasks);
            std::vector<CoefficientMatrix> per_task(tasks, CoefficientMatrix(p, 1));
            for_each_task(tasks, config.threads, [&](std::size_t t) {
                const auto view = data.task_view(t);
                SompConfig sc = config.somp;
                sc.max_steps = base.omp_max_steps;
                sc.bic_p = bic_p;
                sc.parallel_candidates = false;
                const auto path = run_somp(view, sc);
                result.screened[t] = path.support(path.size());
                per_task[t] = ols_on_support(view, select_by_bic(path, n, bic_p, 1).support);
            });
            for (std::size_t t = 0; t < tasks; ++t) {
                for (const auto& [key, v] : per_task[t].entries()) result.estimate.set(key.first, t, v);
            }
            break;
        }
        case Method::Somp:
        case Method::SompAlasso: {
            SompConfig sc = config.somp;
            sc.bic_p = bic_p;
            const auto path = run_somp(data, sc);
            const auto chosen = select_by_bic(path, n, bic_p, tasks);
            result.screened = {chosen.support};
            if (method == Method::Somp) {
                result.estimate = ols_on_support(data, chosen.support);
            } else if (!chosen.support.empty()) {
                result.estimate = exact_support_pipeline(data, chosen.support, alasso, &result.alasso);
            }
            break;
        }
    }
    return result;
}

} // namespace somp
