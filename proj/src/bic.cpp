#include <somp/bic.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace somp {

BicParams::BicParams(std::size_t n_, std::size_t tasks_, std::size_t p_, double rss_floor_)
    : n(n_), tasks(tasks_), p(p_), rss_floor(rss_floor_)
{
    if (n == 0 || tasks == 0 || p == 0) throw std::invalid_argument("BicParams: n, T and p must be >= 1");
    if (rss_floor < 0.0) throw std::invalid_argument("BicParams: rss_floor must be positive");
}

double BicParams::floor() const
{
    return rss_floor > 0.0 ? rss_floor : 1e-12 * static_cast<double>(n) * static_cast<double>(tasks);
}

double BicParams::size_penalty() const
{
    const double dn = static_cast<double>(n);
    return (std::log(dn) + 2.0 * std::log(static_cast<double>(p))) / dn;
}

double bic_score(double rss, std::size_t model_size, const BicParams& params)
{
    if (rss < 0.0) throw std::invalid_argument("bic_score: negative RSS");
    const double nt = static_cast<double>(params.n) * static_cast<double>(params.tasks);
    return std::log(std::max(rss, params.floor()) / nt) +
           static_cast<double>(model_size) * params.size_penalty();
}

} // namespace somp
