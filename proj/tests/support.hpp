#pragma once

#include "bns/quadrature.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <vector>

namespace test_support {

// Cdf of a density on [lo, hi] tabulated by 16-point Gauss-Legendre per cell,
// linearly interpolated between cells.
inline std::function<double(double)> tabulated_cdf(const std::function<double(double)>& density, double lo, double hi,
                                                   int cells = 2000)
{
    auto table = std::make_shared<std::vector<double>>(cells + 1, 0.0);
    const double h = (hi - lo) / cells;
    for (int i = 0; i < cells; ++i)
        (*table)[i + 1] = (*table)[i] + bns::quad::gauss_legendre_integrate(density, lo + i * h, lo + (i + 1) * h, 16);
    const double total = table->back();
    for (auto& v : *table) v /= total;
    return [table, lo, h, cells](double x) {
        const double u = (x - lo) / h;
        if (u <= 0.0) return 0.0;
        if (u >= cells) return 1.0;
        const int k = static_cast<int>(u);
        const double f = u - k;
        return (*table)[k] + f * ((*table)[k + 1] - (*table)[k]);
    };
}

} // namespace test_support
