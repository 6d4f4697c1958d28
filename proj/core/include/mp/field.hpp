#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "mp/grid.hpp"
#include "mp/reduce.hpp"

namespace mp {

using cplx = std::complex<double>;

struct ScalarField {
    GridPtr grid;
    std::vector<cplx> v;  // samples, x-major: ((i*n)+j)*n+l

    ScalarField() = default;
    explicit ScalarField(GridPtr g) : grid(std::move(g)), v(grid->n3()) {}
};

struct VectorField {
    GridPtr grid;
    std::array<std::vector<double>, 3> c;  // real samples per component
    bool divergence_free = false;

    VectorField() = default;
    explicit VectorField(GridPtr g) : grid(std::move(g)) {
        for (auto& comp : c) comp.assign(grid->n3(), 0.0);
    }
};

// N-electron two-component spinor field, N in {1, 2}.
// Layout, x-major flat spatial index x in [0, n^3):
//   N = 1: v[s * n^3 + x]
//   N = 2: v[(s1 + 2*s2) * n^6 + x2 * n^3 + x1]
struct SpinorField {
    GridPtr grid;
    int N = 1;
    std::vector<cplx> v;
    bool antisymmetric = false;

    SpinorField() = default;
    SpinorField(GridPtr g, int electrons) : grid(std::move(g)), N(electrons) {
        v.assign(components(), cplx{});
    }
    std::size_t space_size() const {
        const std::size_t n3 = grid->n3();
        return N == 1 ? n3 : n3 * n3;
    }
    std::size_t spin_blocks() const { return std::size_t{1} << N; }
    std::size_t components() const { return spin_blocks() * space_size(); }
    // quadrature weight of one sample point (cell volume per electron)
    double weight() const {
        const double w = grid->cell_volume();
        return N == 1 ? w : w * w;
    }
};

// L^2 inner products with the grid quadrature weight; fixed-order pairwise
// reduction so results do not depend on thread count.
inline cplx inner(const SpinorField& a, const SpinorField& b) {
    return a.weight() * pairwise_sum_c(a.v.size(), [&](std::size_t i) {
        return std::conj(a.v[i]) * b.v[i];
    });
}

inline double norm2_sq(const SpinorField& a) {
    return a.weight() * pairwise_sum(a.v.size(), [&](std::size_t i) {
        return std::norm(a.v[i]);
    });
}

inline double norm2(const SpinorField& a) { return std::sqrt(norm2_sq(a)); }

inline double norm2_sq(const VectorField& a) {
    const std::size_t n3 = a.grid->n3();
    double s = 0.0;
    for (int d = 0; d < 3; ++d)
        s += pairwise_sum(n3, [&](std::size_t i) { return a.c[d][i] * a.c[d][i]; });
    return s * a.grid->cell_volume();
}

inline double norm2(const VectorField& a) { return std::sqrt(norm2_sq(a)); }

inline double norm2_sq(const ScalarField& a) {
    return a.grid->cell_volume() * pairwise_sum(a.v.size(), [&](std::size_t i) {
        return std::norm(a.v[i]);
    });
}

inline double norm2(const ScalarField& a) { return std::sqrt(norm2_sq(a)); }

}  // namespace mp
