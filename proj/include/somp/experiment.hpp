#pragma once

#include <somp/config.hpp>
#include <somp/report.hpp>

#include <functional>
#include <vector>

namespace somp {

struct SimulationResult
{
    std::vector<AggregateReport> reports;  // in config.methods order
    std::vector<ReplicateRecord> records;  // replicate-major, then method order
    AlassoDiagnostics alasso;
};

/// Called once per finished replicate with (done, total). May run on any worker.
using ReplicateCallback = std::function<void(std::size_t, std::size_t)>;

/**
 * Runs every configured method on `replicates` independent draws. Replicate
 * r always uses the random streams keyed by (seed, r), and results are stored
 * by replicate index, so output does not depend on the thread count.
 */
SimulationResult run_simulation(const RunConfig& config, const ReplicateCallback& progress = {});

} // namespace somp
