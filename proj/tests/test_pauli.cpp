#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "helpers.hpp"

using namespace mp;
using testutil::random_spinor;
using testutil::random_vector;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// E(x, k) = e^{i k.x}; momentum and Laplacian as dense sample-space matrices
Eigen::MatrixXcd fourier_matrix(const SpectralGrid& grid) {
    const std::size_t n3 = grid.n3();
    Eigen::MatrixXcd E(n3, n3);
    const int n = grid.n;
    const double dx = grid.dx();
    for (std::size_t kk = 0; kk < n3; ++kk) {
        double kx, ky, kz;
        grid.kvec(kk, kx, ky, kz);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l)
                    E(grid.at(i, j, l), kk) =
                        std::polar(1.0, kx * i * dx + ky * j * dx + kz * l * dx);
    }
    return E;
}

Eigen::MatrixXcd momentum_matrix(const SpectralGrid& grid, const Eigen::MatrixXcd& E,
                                 int axis) {
    const std::size_t n3 = grid.n3();
    Eigen::VectorXcd d(n3);
    for (std::size_t kk = 0; kk < n3; ++kk) {
        double k[3];
        grid.kvec(kk, k[0], k[1], k[2]);
        d(kk) = k[axis];
    }
    return E * d.asDiagonal() * E.adjoint() / double(n3);
}

}  // namespace

TEST_CASE("Pauli matrix algebra through sigma_dot") {
    GridPtr grid = make_grid(8.0, 4, true);
    SpinorField up(grid, 1);
    for (std::size_t x = 0; x < grid->n3(); ++x) up.v[x] = 1.0;  // spin-up constant

    SpinorField sz = sigma_dot({cplx(0), cplx(0), cplx(1)}, up, 1);
    CHECK(max_abs_diff(sz.v, up.v) < 1e-14);  // sigma^3 eigenvector, +1

    SpinorField phi = random_spinor(grid, 1, 21);
    SpinorField sx_sy = sigma_dot({cplx(1), cplx(0), cplx(0)},
                                  sigma_dot({cplx(0), cplx(1), cplx(0)}, phi, 1), 1);
    SpinorField i_sz = sigma_dot({cplx(0), cplx(0), cplx(0, 1)}, phi, 1);
    CHECK(max_abs_diff(sx_sy.v, i_sz.v) < 1e-13);

    SpinorField sx_sx = sigma_dot({cplx(1), cplx(0), cplx(0)},
                                  sigma_dot({cplx(1), cplx(0), cplx(0)}, phi, 1), 1);
    CHECK(max_abs_diff(sx_sx.v, phi.v) < 1e-13);
}

TEST_CASE("plane wave with constant A: Fourier diagonalization") {
    GridPtr grid = make_grid(8.0, 8, true);
    const int n = grid->n;
    SpinorField phi(grid, 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                phi.v[grid->at(i, j, l)] = std::polar(1.0, kTwoPi * (i + 2.0 * l) / n);
    const std::array<double, 3> k = {kTwoPi / 8.0, 0.0, 2.0 * kTwoPi / 8.0};

    VectorField A(grid);
    const std::array<double, 3> a = {0.3, -0.2, 0.15};
    for (int d = 0; d < 3; ++d)
        for (auto& x : A.c[d]) x = a[d];

    // sigma.(k+A) on the spin components, computed by hand
    const std::array<double, 3> q = {k[0] + a[0], k[1] + a[1], k[2] + a[2]};
    SpinorField got = dirac_apply(phi, A, 1);
    const std::size_t n3 = grid->n3();
    double worst = 0;
    for (std::size_t x = 0; x < n3; ++x) {
        const cplx u = phi.v[x], dwn = phi.v[n3 + x];
        const cplx want_up = q[2] * u + (q[0] - cplx(0, 1) * q[1]) * dwn;
        const cplx want_dn = (q[0] + cplx(0, 1) * q[1]) * u - q[2] * dwn;
        worst = std::max({worst, std::abs(got.v[x] - want_up),
                          std::abs(got.v[n3 + x] - want_dn)});
    }
    CHECK(worst < 1e-12);

    // squared: eigenvalue |k + A|^2 (B = 0 for constant A)
    const double q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
    SpinorField sq = apply_pauli(phi, A, 1);
    double w2 = 0;
    for (std::size_t i = 0; i < sq.v.size(); ++i)
        w2 = std::max(w2, std::abs(sq.v[i] - q2 * phi.v[i]));
    CHECK(w2 < 1e-11);
}

TEST_CASE("dense-operator oracle for the squared operator on 6^3") {
    GridPtr grid = make_grid(6.0, 6, false);
    const std::size_t n3 = grid->n3();
    const Eigen::MatrixXcd E = fourier_matrix(*grid);

    VectorField A = random_vector(grid, 22);
    SpinorField phi = random_spinor(grid, 1, 23);

    // S = sum_a kron(sigma_a, P_a + diag(A_a)), spin as the slow index
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(2 * n3, 2 * n3);
    for (int a = 0; a < 3; ++a) {
        Eigen::MatrixXcd D = momentum_matrix(*grid, E, a);
        for (std::size_t i = 0; i < n3; ++i) D(i, i) += A.c[a][i];
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp)
                if (kPauli[a][s][sp] != cplx(0))
                    S.block(s * n3, sp * n3, n3, n3) += kPauli[a][s][sp] * D;
    }
    Eigen::VectorXcd pv(2 * n3);
    for (std::size_t i = 0; i < 2 * n3; ++i) pv(i) = phi.v[i];
    const Eigen::VectorXcd want = S * (S * pv);

    SpinorField got = apply_pauli(phi, A, 1);
    double worst = 0;
    for (std::size_t i = 0; i < 2 * n3; ++i)
        worst = std::max(worst, std::abs(got.v[i] - want(i)));
    CHECK(worst < 1e-10);
}

TEST_CASE("expansion identity holds to roundoff on band-limited states") {
    GridPtr grid = make_grid(8.0, 16, true);
    for (int trial = 0; trial < 5; ++trial) {
        SpinorField phi = random_spinor(grid, 1, 30 + trial, 2);
        VectorField A = random_vector(grid, 40 + trial, 2, true);
        CHECK(pauli_identity_residual(phi, A, 1) < 1e-12);

        // -Lap phi + L phi rebuilds the squared operator
        SpinorField lhs = apply_pauli(phi, A, 1);
        SpinorField rhs = slot_neg_laplacian(phi, 1);
        SpinorField L = apply_L(phi, A, 1);
        for (std::size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] += L.v[i];
        CHECK(testutil::rel_diff(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("spin-current identity on band-limited states") {
    GridPtr grid = make_grid(8.0, 16, true);
    for (int trial = 0; trial < 5; ++trial) {
        SpinorField phi = random_spinor(grid, 1, 50 + trial, 2);
        VectorField A = random_vector(grid, 60 + trial, 2, true);
        CHECK(spin_current_identity_residual(phi, A, 1) < 1e-12);
    }
    GridPtr g8 = make_grid(8.0, 8, true);
    SpinorField phi2 = random_spinor(g8, 2, 70, 1);
    VectorField A2 = random_vector(g8, 71, 1, true);
    CHECK(spin_current_identity_residual(phi2, A2, 1) < 1e-12);
    CHECK(spin_current_identity_residual(phi2, A2, 2) < 1e-12);
}

TEST_CASE("two-electron current matches a direct double-loop evaluation on 4^3") {
    GridPtr grid = make_grid(4.0, 4, false);
    const std::size_t n3 = grid->n3();
    const std::size_t n6 = n3 * n3;
    SpinorField phi = random_spinor(grid, 2, 80);
    VectorField A = random_vector(grid, 81);

    // slot-1 derivative by explicit slice transforms
    auto slice_momentum = [&](int axis) {
        std::vector<cplx> out(phi.v.size());
        for (std::size_t blk = 0; blk < 4; ++blk)
            for (std::size_t x2 = 0; x2 < n3; ++x2) {
                ScalarField s(grid);
                for (std::size_t x1 = 0; x1 < n3; ++x1)
                    s.v[x1] = phi.v[blk * n6 + x2 * n3 + x1];
                to_modes(s);
                for (std::size_t kk = 0; kk < n3; ++kk) {
                    double k[3];
                    grid->kvec(kk, k[0], k[1], k[2]);
                    s.v[kk] *= k[axis];
                }
                to_samples(s);
                for (std::size_t x1 = 0; x1 < n3; ++x1)
                    out[blk * n6 + x2 * n3 + x1] = s.v[x1];
            }
        return out;
    };
    std::array<std::vector<cplx>, 3> pphi = {slice_momentum(0), slice_momentum(1),
                                             slice_momentum(2)};
    // D phi = sum_a sigma_a^{(1)} (p_a + A_a(x1)) phi
    std::vector<cplx> Dphi(phi.v.size(), cplx{});
    for (int a = 0; a < 3; ++a)
        for (std::size_t s2 = 0; s2 < 2; ++s2)
            for (std::size_t s1 = 0; s1 < 2; ++s1)
                for (std::size_t sp = 0; sp < 2; ++sp) {
                    const cplx m = kPauli[a][s1][sp];
                    if (m == cplx(0)) continue;
                    const std::size_t dst = (s1 + 2 * s2) * n6;
                    const std::size_t src = (sp + 2 * s2) * n6;
                    for (std::size_t x2 = 0; x2 < n3; ++x2)
                        for (std::size_t x1 = 0; x1 < n3; ++x1) {
                            const std::size_t off = x2 * n3 + x1;
                            Dphi[dst + off] +=
                                m * (pphi[a][src + off] + A.c[a][x1] * phi.v[src + off]);
                        }
                }
    // J_a(x1) = -Re sum_{s1,s2,x2} conj(sigma_a phi) D phi * dV
    VectorField want(grid);
    for (int a = 0; a < 3; ++a)
        for (std::size_t s2 = 0; s2 < 2; ++s2)
            for (std::size_t s1 = 0; s1 < 2; ++s1)
                for (std::size_t sp = 0; sp < 2; ++sp) {
                    const cplx m = kPauli[a][s1][sp];
                    if (m == cplx(0)) continue;
                    for (std::size_t x2 = 0; x2 < n3; ++x2)
                        for (std::size_t x1 = 0; x1 < n3; ++x1)
                            want.c[a][x1] -=
                                grid->cell_volume() *
                                std::real(std::conj(m * phi.v[(sp + 2 * s2) * n6 +
                                                              x2 * n3 + x1]) *
                                          Dphi[(s1 + 2 * s2) * n6 + x2 * n3 + x1]);
                }

    VectorField got = current(phi, A, 1);
    double worst = 0;
    for (int a = 0; a < 3; ++a)
        for (std::size_t x = 0; x < n3; ++x)
            worst = std::max(worst, std::fabs(got.c[a][x] - want.c[a][x]));
    CHECK(worst < 1e-11);
}

TEST_CASE("total current sums the slots") {
    GridPtr grid = make_grid(4.0, 4, true);
    SpinorField phi = random_spinor(grid, 2, 90, 1);
    VectorField A = random_vector(grid, 91, 1);
    VectorField j1 = current(phi, A, 1), j2 = current(phi, A, 2), tot = total_current(phi, A);
    double worst = 0;
    for (int d = 0; d < 3; ++d)
        for (std::size_t i = 0; i < grid->n3(); ++i)
            worst = std::max(worst, std::fabs(tot.c[d][i] - j1.c[d][i] - j2.c[d][i]));
    CHECK(worst < 1e-13);
}

TEST_CASE("particle exchange and antisymmetrization") {
    GridPtr grid = make_grid(4.0, 4, true);
    const std::size_t n3 = grid->n3(), n6 = n3 * n3;

    // a single delta entry moves to the transposed position
    SpinorField delta(grid, 2);
    const std::size_t s1 = 1, s2 = 0, x1 = 3, x2 = 17;
    delta.v[(s1 + 2 * s2) * n6 + x2 * n3 + x1] = cplx(2.0, -1.0);
    SpinorField swapped = swap_particles(delta);
    CHECK(std::abs(swapped.v[(s2 + 2 * s1) * n6 + x1 * n3 + x2] - cplx(2.0, -1.0)) < 1e-15);
    double mass = 0;
    for (const auto& z : swapped.v) mass += std::norm(z);
    CHECK(mass == doctest::Approx(5.0));

    SpinorField phi = random_spinor(grid, 2, 92);
    SpinorField twice = swap_particles(swap_particles(phi));
    CHECK(testutil::rel_diff(phi, twice) < 1e-15);

    SpinorField anti = antisymmetrize(phi);
    CHECK(anti.antisymmetric);
    CHECK(antisymmetry_residual(anti) < 1e-13);
    SpinorField again = antisymmetrize(anti);
    for (std::size_t i = 0; i < anti.v.size(); ++i) again.v[i] -= anti.v[i];
    CHECK(norm2(again) < 1e-13 * norm2(anti));
}
