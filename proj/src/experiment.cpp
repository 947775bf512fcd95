#include <somp/experiment.hpp>

#include <somp/errors.hpp>
#include <somp/numerics.hpp>

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace somp {

namespace {

struct ReplicateOutcome
{
    std::vector<ReplicateReport> per_method;
    AlassoDiagnostics alasso;
};

ReplicateOutcome run_replicate(const RunConfig& config, std::size_t replicate, std::size_t inner_threads)
{
    auto spec = config.simulation;
    spec.replicate = replicate;
    const auto instance = generate(spec);
    const auto pipeline = config.pipeline(inner_threads);

    ReplicateOutcome out;
    for (auto method : config.methods) {
        auto result = run_pipeline(instance.train, method, pipeline);
        auto report = evaluate(instance.truth, result.estimate, instance.test);
        if (config.r2 == R2Formula::Normalized) report.r2_test = r2_normalized(instance.test, result.estimate);
        out.per_method.push_back(report);
        out.alasso.merge(result.alasso);
    }
    return out;
}

} // namespace

SimulationResult run_simulation(const RunConfig& config, const ReplicateCallback& progress)
{
    config.validate();
    const auto total = config.replicates;
    const auto threads = std::min(resolve_threads(config.threads), total);
    const std::size_t inner = threads == 1 ? resolve_threads(config.threads) : 1;

    std::vector<ReplicateOutcome> outcomes(total);
    std::vector<std::exception_ptr> errors(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            const auto r = next.fetch_add(1);
            if (r >= total) return;
            try {
                outcomes[r] = run_replicate(config, r, inner);
            } catch (...) {
                errors[r] = std::current_exception();
            }
            const auto finished = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(finished, total);
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    // report the lowest failing replicate so errors are reproducible too
    for (std::size_t r = 0; r < total; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const Error& e) {
            throw Error(e.code(), "replicate " + std::to_string(r + 1) + ": " + e.what());
        }
    }

    SimulationResult result;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        std::vector<ReplicateReport> reports;
        reports.reserve(total);
        for (const auto& o : outcomes) reports.push_back(o.per_method[m]);
        result.reports.push_back(aggregate(reports, std::string(method_name(config.methods[m]))));
    }
    for (std::size_t r = 0; r < total; ++r) {
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            result.records.push_back({r, std::string(method_name(config.methods[m])), outcomes[r].per_method[m]});
        }
        result.alasso.merge(outcomes[r].alasso);
    }
    return result;
}

} // namespace somp
