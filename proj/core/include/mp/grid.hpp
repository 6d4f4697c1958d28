#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace mp {

// Periodic box [0, L)^3 sampled on n points per axis, with the wavenumber
// lattice k = 2*pi*m/L, m in [-n/2, n/2), stored in transform order
// (m = 0..n/2-1, then -n/2..-1).
struct SpectralGrid {
    double L = 0.0;
    int n = 0;
    bool dealias = true;
    std::vector<double> k1;           // per-axis wavenumbers, transform order
    // derivative wavenumbers: identical except the unpaired Nyquist mode is
    // zeroed, so first-derivative multipliers commute with conjugation of
    // real fields
    std::vector<double> k1d;
    std::vector<std::uint8_t> keep1;  // per-axis 2/3-rule keep flag (|m| <= n/3)

    std::size_t n3() const { return static_cast<std::size_t>(n) * n * n; }
    double dx() const { return L / n; }
    double cell_volume() const { return dx() * dx() * dx(); }

    // flat index of the sample/mode at axis indices (i, j, l)
    std::size_t at(int i, int j, int l) const {
        return (static_cast<std::size_t>(i) * n + j) * n + l;
    }
    void kvec(std::size_t idx, double& kx, double& ky, double& kz) const {
        const int l = static_cast<int>(idx % n);
        const int j = static_cast<int>((idx / n) % n);
        const int i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
        kx = k1[i]; ky = k1[j]; kz = k1[l];
    }
    void kvec_d(std::size_t idx, double& kx, double& ky, double& kz) const {
        const int l = static_cast<int>(idx % n);
        const int j = static_cast<int>((idx / n) % n);
        const int i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
        kx = k1d[i]; ky = k1d[j]; kz = k1d[l];
    }
    double k2(std::size_t idx) const {
        double kx, ky, kz;
        kvec(idx, kx, ky, kz);
        return kx * kx + ky * ky + kz * kz;
    }
    bool keep(std::size_t idx) const {
        const int l = static_cast<int>(idx % n);
        const int j = static_cast<int>((idx / n) % n);
        const int i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
        return keep1[i] && keep1[j] && keep1[l];
    }
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

// Throws std::invalid_argument for odd n, n < 4, or L <= 0.
GridPtr make_grid(double L, int n, bool dealias = true);

}  // namespace mp
