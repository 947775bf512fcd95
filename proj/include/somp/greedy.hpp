#pragma once

#include <somp/bic.hpp>
#include <somp/datamodel.hpp>

#include <cstddef>
#include <functional>

namespace somp {

struct SompConfig
{
    /// 0 selects min(n - 1, p). Larger values are clamped to that bound.
    std::size_t max_steps = 0;
    /// Passed to ProjectorOptions::column_tolerance (0 = 1e-10 * n).
    double candidate_tolerance = 0.0;
    bool parallel_candidates = false;
    /// Worker count when parallel_candidates is set (0 = hardware concurrency).
    std::size_t threads = 0;
    /// Ambient dimension used in the recorded BIC; 0 means the dataset's p.
    std::size_t bic_p = 0;
};

/// Called after every step with (k, selected variable, total RSS, BIC).
using ProgressCallback = std::function<void(std::size_t, std::size_t, double, double)>;

/// min(n - 1, p), and at least 1.
std::size_t max_path_length(std::size_t n, std::size_t p);

/**
 * Simultaneous orthogonal matching pursuit. Each step adds the variable that
 * maximizes the RSS reduction summed over all tasks (ties go to the smaller
 * index), until max_steps, a numerically perfect fit, or no non-degenerate
 * candidate remains.
 */
SelectionPath run_somp(const MultiTaskDataset& data, const SompConfig& config = {},
                       const ProgressCallback& progress = {});

struct BicSelection
{
    std::size_t steps;   // number of variables in the chosen prefix (0 = empty model)
    SupportSet support;
    double bic;
};

/// Prefix of the path minimizing the modified BIC; ties go to the smaller model.
BicSelection select_by_bic(const SelectionPath& path, std::size_t n, std::size_t p, std::size_t tasks);

} // namespace somp
