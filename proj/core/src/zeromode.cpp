#include "mp/zeromode.hpp"

#include <cmath>
#include <stdexcept>

namespace mp {
namespace {

void normalize(SpinorField& psi) {
    const double n = norm2(psi);
    if (n == 0.0) throw std::invalid_argument("zero mode: psi vanishes");
    for (auto& z : psi.v) z /= n;
}

}  // namespace

double zero_mode_residual(const SpinorField& psi, const VectorField& A) {
    const double n = norm2(psi);
    if (n == 0.0) throw std::invalid_argument("zero_mode_residual: psi vanishes");
    return norm2(dirac_apply(psi, A, 1)) / n;
}

ZeroModeCandidate loss_yau_pair(GridPtr grid) {
    const int n = grid->n;
    const double L = grid->L;
    const double dx = grid->dx();
    const std::size_t n3 = grid->n3();

    ZeroModeCandidate cand;
    cand.psi = SpinorField(grid, 1);
    cand.A = VectorField(grid);

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                const double x = i * dx - L / 2;
                const double y = j * dx - L / 2;
                const double z = l * dx - L / 2;
                const double r2 = x * x + y * y + z * z;
                const double f = std::pow(1.0 + r2, -1.5);
                const std::size_t idx = grid->at(i, j, l);
                cand.psi.v[idx] = f * cplx(1.0, z);           // spin up
                cand.psi.v[n3 + idx] = f * cplx(-y, x);       // spin down
                const double pref = -3.0 / ((1.0 + r2) * (1.0 + r2));
                cand.A.c[0][idx] = pref * (2.0 * z * x - 2.0 * y);
                cand.A.c[1][idx] = pref * (2.0 * z * y + 2.0 * x);
                cand.A.c[2][idx] = pref * ((1.0 - r2) + 2.0 * z * z);
            }

    cand.A = leray_project(cand.A);
    normalize(cand.psi);
    cand.residual = zero_mode_residual(cand.psi, cand.A);
    cand.within_tolerance = cand.residual <= 1e-3;
    return cand;
}

ZeroModeCandidate variational_zero_mode(ZeroModeCandidate cand, int iterations,
                                        double learning_rate, bool optimize_A) {
    normalize(cand.psi);
    cand.residual = zero_mode_residual(cand.psi, cand.A);
    if (cand.residual < 1e-13) {
        cand.within_tolerance = true;
        return cand;  // already a zero mode
    }

    double lr = learning_rate;
    for (int it = 0; it < iterations; ++it) {
        const SpinorField D = dirac_apply(cand.psi, cand.A, 1);
        // gradients of ||D psi||^2: D^2 psi in psi, -2 J in A
        const SpinorField gpsi = dirac_apply(D, cand.A, 1);
        VectorField J;
        if (optimize_A) J = current(cand.psi, cand.A, 1);

        for (const auto& z : gpsi.v)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw std::runtime_error("variational_zero_mode: non-finite gradient");

        bool accepted = false;
        while (lr > 1e-14) {
            SpinorField trial_psi = cand.psi;
            for (std::size_t i = 0; i < trial_psi.v.size(); ++i)
                trial_psi.v[i] -= lr * gpsi.v[i];
            normalize(trial_psi);
            VectorField trial_A = cand.A;
            if (optimize_A) {
                for (int d = 0; d < 3; ++d)
                    for (std::size_t i = 0; i < trial_A.c[d].size(); ++i)
                        trial_A.c[d][i] += 2.0 * lr * J.c[d][i];
                trial_A = leray_project(trial_A);
            }
            const double r = zero_mode_residual(trial_psi, trial_A);
            if (r < cand.residual) {
                cand.psi = std::move(trial_psi);
                cand.A = std::move(trial_A);
                cand.residual = r;
                accepted = true;
                break;
            }
            lr /= 2;  // backtrack
        }
        if (!accepted) break;
    }
    cand.within_tolerance = cand.residual <= 1e-3;
    return cand;
}

double zc_functional(const SpinorField& psi, const VectorField& A, double alpha) {
    const auto& grid = *psi.grid;
    const VectorField zero(psi.grid);
    const double F = field_energy(A, zero, alpha);

    const std::array<double, 3> center = {grid.L / 2, grid.L / 2, grid.L / 2};
    const ScalarField ker = coulomb_kernel(psi.grid, center, 0.0);
    const std::size_t n3 = grid.n3();
    const double denom = grid.cell_volume() * pairwise_sum(n3, [&](std::size_t x) {
        return ker.v[x].real() * (std::norm(psi.v[x]) + std::norm(psi.v[n3 + x]));
    });
    if (std::fabs(denom) < 1e-300)
        throw std::invalid_argument("zc_functional: vanishing Coulomb expectation");
    return F / denom;
}

double one_body_energy_slope(const ZeroModeCandidate& cand, double Z, double alpha) {
    const VectorField zero(cand.psi.grid);
    const double F = field_energy(cand.A, zero, alpha);
    const double zc = zc_functional(cand.psi, cand.A, alpha);
    return F - Z * (F / zc);
}

}  // namespace mp
