#pragma once

// shared generators for the test batteries: reproducible random states,
// optionally band-limited so that pointwise products stay below the
// dealiasing cutoff and operator identities hold to roundoff

#include <cmath>
#include <numbers>
#include <random>

#include "mp/evolve.hpp"
#include "mp/io.hpp"

namespace testutil {

using namespace mp;

// zero every mode with any axis index |m| > mmax; mmax < 0 keeps everything
inline SpinorField random_spinor(GridPtr grid, int N, std::uint64_t seed, int mmax = -1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    SpinorField f(grid, N);
    for (auto& z : f.v) z = cplx(g(rng), g(rng));
    if (mmax >= 0) {
        const double kcut = 2.0 * std::numbers::pi / grid->L * (mmax + 0.5);
        to_modes(f);
        const std::size_t n3 = grid->n3();
        auto in_band = [&](std::size_t x) {
            double kx, ky, kz;
            grid->kvec(x, kx, ky, kz);
            return std::fabs(kx) <= kcut && std::fabs(ky) <= kcut && std::fabs(kz) <= kcut;
        };
        const std::size_t blocks = f.spin_blocks(), sp = f.space_size();
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::size_t i = 0; i < sp; ++i) {
                const bool keep = N == 1 ? in_band(i) : in_band(i % n3) && in_band(i / n3);
                if (!keep) f.v[b * sp + i] = cplx{};
            }
        to_samples(f);
    }
    const double nn = norm2(f);
    for (auto& z : f.v) z /= nn;
    return f;
}

inline VectorField random_vector(GridPtr grid, std::uint64_t seed, int mmax = -1,
                                 bool project = false) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    VectorField A(grid);
    for (int d = 0; d < 3; ++d)
        for (auto& x : A.c[d]) x = g(rng);
    if (mmax >= 0) {
        const double kcut = 2.0 * std::numbers::pi / grid->L * (mmax + 0.5);
        A = apply_symbol(A, [kcut](double kx, double ky, double kz) {
            return (std::fabs(kx) <= kcut && std::fabs(ky) <= kcut && std::fabs(kz) <= kcut)
                       ? 1.0
                       : 0.0;
        });
    }
    if (project) A = leray_project(A);
    return A;
}

inline double rel_diff(const SpinorField& a, const SpinorField& b) {
    SpinorField d = a;
    for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] -= b.v[i];
    return norm2(d) / norm2(a);
}

// the coupled configuration used throughout the verification battery:
// one electron, one softened hydrogen-like nucleus at the box center
inline RunConfig coupled_config() {
    RunConfig cfg;  // defaults: L = 8, n = 16, alpha = 0.06, eps = 0.05
    cfg.nuclei.R.push_back({4.0, 4.0, 4.0});
    cfg.nuclei.Z.push_back(1.0);
    cfg.softening = 1.0;
    cfg.h = 1e-3;
    cfg.T_final = 0.2;
    cfg.stability = validate_stability_hypothesis(cfg.alpha, cfg.nuclei, cfg.N);
    return cfg;
}

}  // namespace testutil
