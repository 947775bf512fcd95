#include <somp/numerics.hpp>

#include <stdexcept>

namespace somp {

namespace {

constexpr std::size_t leaf_size = 128;

double leaf_dot(const double* a, const double* b, std::size_t n)
{
    // four interleaved accumulators; fixed order, so still deterministic
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

double cascade(const double* a, const double* b, std::size_t n)
{
    if (n <= leaf_size) return leaf_dot(a, b, n);
    const std::size_t half = n / 2;
    return cascade(a, b, half) + cascade(a + half, b + half, n - half);
}

} // namespace

double pairwise_dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw std::invalid_argument("pairwise_dot: length mismatch");
    return cascade(a.data(), b.data(), a.size());
}

std::size_t resolve_threads(std::size_t requested)
{
    if (requested > 0) return requested;
    const auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace somp
