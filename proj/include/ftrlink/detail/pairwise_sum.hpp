#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace ftrlink::detail {

template <class F>
double pairwise_sum(const std::vector<double>& x, F f, std::size_t block)
{
    if (x.empty()) return 0.0;
    const std::size_t nb = (x.size() + block - 1) / block;
    std::vector<double> part(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        const std::size_t lo = b * block, hi = std::min(x.size(), lo + block);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(x[i]);
        part[b] = s;
    }
    for (std::size_t w = 1; w < nb; w *= 2)
        for (std::size_t i = 0; i + w < nb; i += 2 * w) part[i] += part[i + w];
    return part[0];
}

}  // namespace ftrlink::detail
