#include <somp/greedy.hpp>

#include <somp/errors.hpp>
#include <somp/numerics.hpp>
#include <somp/projector.hpp>

#include <limits>
#include <vector>

namespace somp {

namespace {

struct Candidate
{
    double gain = -std::numeric_limits<double>::infinity();
    std::size_t index = std::numeric_limits<std::size_t>::max();

    bool valid() const { return index != std::numeric_limits<std::size_t>::max(); }
};

constexpr std::size_t min_candidates_per_worker = 1024;

} // namespace

std::size_t max_path_length(std::size_t n, std::size_t p)
{
    return std::max<std::size_t>(1, std::min(n > 0 ? n - 1 : 0, p));
}

SelectionPath run_somp(const MultiTaskDataset& data, const SompConfig& config, const ProgressCallback& progress)
{
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    const std::size_t bound = max_path_length(n, p);
    const std::size_t max_steps = config.max_steps == 0 ? bound : std::min(config.max_steps, bound);
    const std::size_t threads = config.parallel_candidates ? resolve_threads(config.threads) : 1;

    ProjectorOptions options;
    options.column_tolerance = config.candidate_tolerance;
    options.capacity = max_steps;
    options.threads = threads;
    Projector projector(data, options);

    const BicParams bic_params(n, data.tasks(), config.bic_p == 0 ? p : config.bic_p);
    const double response_total = projector.total_response_sq_norm();
    const double perfect_fit = 1e-12 * response_total;

    SelectionPath path;
    path.rss_empty = projector.total_rss();
    path.bic_empty = bic_score(path.rss_empty, 0, bic_params);

    std::vector<double> gains(p);
    std::vector<char> seen_degenerate(p, 0);
    constexpr double excluded = -std::numeric_limits<double>::infinity();

    for (std::size_t k = 1; k <= max_steps; ++k) {
        if (projector.total_rss() <= perfect_fit) break;

        parallel_chunks(p, threads, min_candidates_per_worker, [&](std::size_t begin, std::size_t end) {
            projector.total_gains(begin, end, std::span<double>(gains).subspan(begin, end - begin));
        });

        // ascending scan with strict comparison: max gain, then min index
        Candidate best;
        const GramFactor& factor = projector.state(0).factor();
        for (std::size_t j = 0; j < p; ++j) {
            const double g = gains[j];
            if (g == excluded) {
                if (!factor.in_model(j) && !seen_degenerate[j]) {
                    seen_degenerate[j] = 1;
                    ++path.degenerate_skips;
                }
                continue;
            }
            if (!best.valid() || g > best.gain) best = {g, j};
        }

        if (!best.valid()) {
            if (k == 1) {
                throw Error(ErrorCode::NoValidCandidate,
                            "every column of the design is numerically zero; nothing can be selected");
            }
            break;
        }

        projector.extend(best.index);
        const double rss = projector.total_rss();
        const double bic = bic_score(rss, k, bic_params);
        path.steps.push_back({best.index, rss, bic});
        if (progress) progress(k, best.index, rss, bic);
    }
    return path;
}

BicSelection select_by_bic(const SelectionPath& path, std::size_t n, std::size_t p, std::size_t tasks)
{
    const BicParams params(n, tasks, p);
    std::size_t best_k = 0;
    double best = bic_score(path.rss_empty, 0, params);
    for (std::size_t k = 1; k <= path.size(); ++k) {
        const double value = bic_score(path.rss_at(k), k, params);
        if (value < best) {
            best = value;
            best_k = k;
        }
    }
    return {best_k, path.support(best_k), best};
}

} // namespace somp
