#include "mp/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mp {

GridPtr make_grid(double L, int n, bool dealias) {
    if (n < 4 || n % 2 != 0) throw std::invalid_argument("grid: n must be even and >= 4");
    if (!(L > 0.0)) throw std::invalid_argument("grid: L must be positive");
    auto g = std::make_shared<SpectralGrid>();
    g->L = L;
    g->n = n;
    g->dealias = dealias;
    g->k1.resize(n);
    g->k1d.resize(n);
    g->keep1.resize(n);
    for (int i = 0; i < n; ++i) {
        const int m = (i < n / 2) ? i : i - n;
        g->k1[i] = 2.0 * std::numbers::pi * m / L;
        g->k1d[i] = (i == n / 2) ? 0.0 : g->k1[i];
        g->keep1[i] = (3 * std::abs(m) <= n) ? 1 : 0;
    }
    return g;
}

}  // namespace mp
