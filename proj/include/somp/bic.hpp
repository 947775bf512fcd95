#pragma once

#include <cstddef>

namespace somp {

/// Constants of the modified BIC
///   BIC(M) = log(RSS(M) / (nT)) + |M| (log n + 2 log p) / n.
struct BicParams
{
    std::size_t n = 1;
    std::size_t tasks = 1;
    std::size_t p = 1;
    /// RSS values below this are clamped; 0 selects 1e-12 * nT.
    double rss_floor = 0.0;

    BicParams() = default;
    BicParams(std::size_t n, std::size_t tasks, std::size_t p, double rss_floor = 0.0);

    double floor() const;
    /// Penalty added per selected variable.
    double size_penalty() const;
};

double bic_score(double rss, std::size_t model_size, const BicParams& params);

} // namespace somp
