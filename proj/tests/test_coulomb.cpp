#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "helpers.hpp"

using namespace mp;
using testutil::random_spinor;
using testutil::random_vector;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

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

}  // namespace

TEST_CASE("Coulomb kernel: mode-by-mode symbol and symmetry") {
    GridPtr grid = make_grid(8.0, 8, true);
    const std::array<double, 3> c = {3.0, 5.0, 1.0};
    const double a = 0.7;
    ScalarField ker = coulomb_kernel(grid, c, a);
    to_modes(ker);
    double worst = 0;
    for (std::size_t i = 0; i < grid->n3(); ++i) {
        double kx, ky, kz;
        grid->kvec(i, kx, ky, kz);
        const double k2 = kx * kx + ky * ky + kz * kz;
        cplx want = 0.0;
        if (k2 > 0)
            want = 4.0 * std::numbers::pi / k2 * std::exp(-a * a * k2 / 4.0) *
                   std::polar(1.0, -(kx * c[0] + ky * c[1] + kz * c[2])) /
                   std::pow(grid->L, 3);
        worst = std::max(worst, std::abs(ker.v[i] - want));
    }
    CHECK(worst < 1e-13);

    // even around the center
    ScalarField k2s = coulomb_kernel(grid, {4.0, 4.0, 4.0}, a);
    const int n = grid->n;
    double asym = 0;
    for (int i = 1; i < n; ++i)
        asym = std::max(asym, std::abs(k2s.v[grid->at(i, 4, 4)] -
                                       k2s.v[grid->at(n - i, 4, 4)]));
    CHECK(asym < 1e-12);
}

TEST_CASE("kernel differences approximate erf(r/a)/r in a large box") {
    // softening a = 1 keeps the spectral tail far below the band edge, so the
    // free-space profile erf(r/a)/r is the right comparison up to images
    GridPtr grid = make_grid(20.0, 40, true);
    ScalarField ker = coulomb_kernel(grid, {10.0, 10.0, 10.0}, 1.0);
    auto at_r = [&](int off) { return ker.v[grid->at(20 + off, 20, 20)].real(); };
    const double diff = at_r(3) - at_r(5);  // r = 1.5 vs 2.5
    const double want = std::erf(1.5) / 1.5 - std::erf(2.5) / 2.5;
    CHECK(std::fabs(diff - want) < 0.02 * want);
}

TEST_CASE("external potential and nuclear repulsion") {
    GridPtr grid = make_grid(8.0, 8, true);
    NuclearConfig nz;
    nz.R = {{1.0, 1.0, 1.0}, {7.0, 1.0, 1.0}};  // min-image distance 2
    nz.Z = {2.0, 3.0};
    auto [v, rep] = build_potential(grid, nz, 0.5);
    CHECK(rep == doctest::Approx(6.0 / 2.0).epsilon(1e-12));

    ScalarField k1 = coulomb_kernel(grid, nz.R[0], 0.5);
    ScalarField k2 = coulomb_kernel(grid, nz.R[1], 0.5);
    double worst = 0;
    for (std::size_t i = 0; i < grid->n3(); ++i)
        worst = std::max(worst, std::abs(v.v[i] - (-2.0 * k1.v[i] - 3.0 * k2.v[i])));
    CHECK(worst < 1e-12);

    NuclearConfig bad = nz;
    bad.Z[0] = -1.0;
    CHECK_THROWS_AS((void)build_potential(grid, bad, 0.0), std::invalid_argument);
    NuclearConfig dup;
    dup.R = {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
    dup.Z = {1.0, 1.0};
    CHECK_THROWS_AS((void)build_potential(grid, dup, 0.0), std::invalid_argument);
}

TEST_CASE("two-electron Coulomb energy vs a direct double sum on 4^3") {
    GridPtr grid = make_grid(4.0, 4, false);
    const std::size_t n3 = grid->n3(), n6 = n3 * n3;
    NuclearConfig nz;
    nz.R = {{1.0, 2.0, 3.0}};
    nz.Z = {1.5};
    const double soft = 0.8;
    SpinorField phi = random_spinor(grid, 2, 100);

    const CoulombContext coul = CoulombContext::make(grid, nz, soft, 2);
    const double got = coul.energy(phi);

    auto [vext, rep] = build_potential(grid, nz, soft);
    ScalarField pair = coulomb_kernel(grid, {0.0, 0.0, 0.0}, soft);
    const int n = grid->n;
    auto wrap_diff = [&](std::size_t xa, std::size_t xb) {
        const int ia = int(xa / (n * n)), ja = int((xa / n) % n), la = int(xa % n);
        const int ib = int(xb / (n * n)), jb = int((xb / n) % n), lb = int(xb % n);
        const int di = ((ia - ib) % n + n) % n;
        const int dj = ((ja - jb) % n + n) % n;
        const int dl = ((la - lb) % n + n) % n;
        return grid->at(di, dj, dl);
    };
    const double w = grid->cell_volume() * grid->cell_volume();
    double want = 0;
    for (std::size_t blk = 0; blk < 4; ++blk)
        for (std::size_t x2 = 0; x2 < n3; ++x2)
            for (std::size_t x1 = 0; x1 < n3; ++x1) {
                const double rho = std::norm(phi.v[blk * n6 + x2 * n3 + x1]);
                want += w * rho *
                        (vext.v[x1].real() + vext.v[x2].real() +
                         pair.v[wrap_diff(x1, x2)].real() + rep);
            }
    CHECK(got == doctest::Approx(want).epsilon(1e-11));

    CHECK(coulomb_energy(phi, nz, soft) == doctest::Approx(got).epsilon(1e-12));
}

TEST_CASE("kinetic energy at A = 0 equals the gradient norm") {
    GridPtr grid = make_grid(8.0, 8, true);
    SpinorField phi = random_spinor(grid, 1, 101);
    const VectorField zero(grid);
    const double T = kinetic_energy(phi, zero);
    const double h1 = sobolev_norm(phi, 1.0), l2 = sobolev_norm(phi, 0.0);
    CHECK(T == doctest::Approx(h1 * h1 - l2 * l2).epsilon(1e-10));

    SpinorField phi2 = random_spinor(grid, 2, 102);
    const double T2 = kinetic_energy(phi2, zero);
    const double h12 = sobolev_norm(phi2, 1.0), l22 = sobolev_norm(phi2, 0.0);
    CHECK(T2 == doctest::Approx(h12 * h12 - l22 * l22).epsilon(1e-10));
}

TEST_CASE("field energy: single-mode value and parameter checks") {
    GridPtr grid = make_grid(8.0, 8, true);
    const int n = grid->n;
    VectorField A(grid), Adot(grid);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                A.c[0][grid->at(i, j, l)] = std::sin(kTwoPi * j / n);
    for (auto& x : Adot.c[1]) x = 0.5;
    const double alpha = 0.1;
    const double k = kTwoPi / 8.0;
    const double vol = 8.0 * 8.0 * 8.0;
    // ||curl A||^2 = k^2 * vol/2; ||Adot||^2 = vol/4
    const double want =
        (k * k * vol / 2.0 / (alpha * alpha) + 4.0 * vol / 4.0) / (8.0 * std::numbers::pi);
    CHECK(field_energy(A, Adot, alpha) == doctest::Approx(want).epsilon(1e-12));
    CHECK_THROWS_AS((void)field_energy(A, Adot, 0.0), std::invalid_argument);
}

TEST_CASE("total energy is the expectation of the assembled operator") {
    GridPtr grid = make_grid(8.0, 16, true);
    SpinorField phi = random_spinor(grid, 1, 103, 2);
    VectorField A = random_vector(grid, 104, 2, true);
    VectorField Adot = random_vector(grid, 105, 2, true);
    NuclearConfig nz;
    nz.R = {{4.0, 4.0, 4.0}};
    nz.Z = {1.0};
    const double alpha = 0.06, eps = 0.05, soft = 1.0;

    EnergyReport rep = total_energy(phi, A, Adot, nz, alpha, eps, soft);
    SpinorField H = apply_hamiltonian(phi, A, Adot, nz, alpha, eps, soft);
    const cplx expect = inner(phi, H);
    CHECK(std::fabs(expect.real() - rep.E) < 1e-11 * std::max(1.0, std::fabs(rep.E)));
    CHECK(std::fabs(expect.imag()) < 1e-11);
    CHECK(rep.E == doctest::Approx(rep.T + rep.V + rep.F * rep.charge).epsilon(1e-12));
    CHECK(rep.charge == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dense assembly of the full operator on 4^3") {
    GridPtr grid = make_grid(4.0, 4, false);
    const std::size_t n3 = grid->n3();
    SpinorField phi = random_spinor(grid, 1, 106);
    VectorField A = random_vector(grid, 107, -1, true);
    VectorField Adot = random_vector(grid, 108, -1, true);
    NuclearConfig nz;
    nz.R = {{1.0, 1.0, 2.0}};
    nz.Z = {2.0};
    const double alpha = 0.08, eps = 0.03, soft = 0.6;

    const Eigen::MatrixXcd E = fourier_matrix(*grid);
    std::array<Eigen::MatrixXcd, 3> P, Pd;
    for (int a = 0; a < 3; ++a) {
        Eigen::VectorXcd d(n3), dd(n3);
        for (std::size_t kk = 0; kk < n3; ++kk) {
            double k[3], kd[3];
            grid->kvec(kk, k[0], k[1], k[2]);
            grid->kvec_d(kk, kd[0], kd[1], kd[2]);
            d(kk) = k[a];
            dd(kk) = kd[a];
        }
        P[a] = E * d.asDiagonal() * E.adjoint() / double(n3);
        Pd[a] = E * dd.asDiagonal() * E.adjoint() / double(n3);
    }
    const VectorField At = lambda_eps_inv(A, eps);
    // B = curl At, each component via the dense momentum matrices
    std::array<Eigen::VectorXcd, 3> Atv;
    for (int a = 0; a < 3; ++a) {
        Atv[a].resize(n3);
        for (std::size_t i = 0; i < n3; ++i) Atv[a](i) = At.c[a][i];
    }
    std::array<Eigen::VectorXcd, 3> B;
    B[0] = cplx(0, 1) * (Pd[1] * Atv[2] - Pd[2] * Atv[1]);  // d/dx = i Pd
    B[1] = cplx(0, 1) * (Pd[2] * Atv[0] - Pd[0] * Atv[2]);
    B[2] = cplx(0, 1) * (Pd[0] * Atv[1] - Pd[1] * Atv[0]);

    auto [vext, repn] = build_potential(grid, nz, soft);
    const double F = field_energy(A, Adot, alpha);

    // H = p^2 + 2 At.p + |At|^2 + sigma.B + V + rep + F, expanded form
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2 * n3, 2 * n3);
    Eigen::MatrixXcd scalar = Eigen::MatrixXcd::Zero(n3, n3);
    for (int a = 0; a < 3; ++a) {
        scalar += P[a] * P[a];
        scalar += 2.0 * Atv[a].asDiagonal() * P[a];
    }
    for (std::size_t i = 0; i < n3; ++i) {
        double at2 = 0;
        for (int a = 0; a < 3; ++a) at2 += At.c[a][i] * At.c[a][i];
        scalar(i, i) += at2 + vext.v[i].real() + repn + F;
    }
    for (int s = 0; s < 2; ++s) H.block(s * n3, s * n3, n3, n3) = scalar;
    for (int a = 0; a < 3; ++a)
        for (int s = 0; s < 2; ++s)
            for (int sp = 0; sp < 2; ++sp)
                if (kPauli[a][s][sp] != cplx(0))
                    H.block(s * n3, sp * n3, n3, n3) +=
                        kPauli[a][s][sp] * Eigen::MatrixXcd(B[a].asDiagonal());

    Eigen::VectorXcd pv(2 * n3);
    for (std::size_t i = 0; i < 2 * n3; ++i) pv(i) = phi.v[i];
    const Eigen::VectorXcd want = H * pv;

    SpinorField got = apply_hamiltonian(phi, A, Adot, nz, alpha, eps, soft);
    double worst = 0;
    for (std::size_t i = 0; i < 2 * n3; ++i)
        worst = std::max(worst, std::abs(got.v[i] - want(i)));
    CHECK(worst < 1e-9);
}

TEST_CASE("scaling map and the parabola gap") {
    GridPtr grid = make_grid(8.0, 8, true);
    SpinorField phi = random_spinor(grid, 1, 109, 1);
    VectorField A = random_vector(grid, 110, 1, true);
    ScaledState sc = scale_state(phi, A, 2.0);
    CHECK(sc.grid->L == doctest::Approx(4.0));
    CHECK(norm2(sc.phi) == doctest::Approx(norm2(phi)).epsilon(1e-12));
    CHECK(kinetic_energy(sc.phi, sc.A) ==
          doctest::Approx(4.0 * kinetic_energy(phi, A)).epsilon(1e-12));
    CHECK_THROWS_AS((void)scale_state(phi, A, 0.0), std::invalid_argument);

    std::mt19937_64 rng(111);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double T = u(rng), VF = -u(rng);
        const double gap = coulomb_bound_gap(T, VF);
        auto f = [&](double l) { return l * l * T + l * VF; };
        double a = 1e-9, b = 50.0;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        while (b - a > 1e-11) {
            const double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
            (f(c1) < f(c2) ? b : a) = (f(c1) < f(c2) ? c2 : c1);
        }
        CHECK(std::fabs(gap - f((a + b) / 2)) < 1e-9);
    }
    CHECK(coulomb_bound_gap(1.0, 0.5) == 0.0);
    CHECK_THROWS_AS((void)coulomb_bound_gap(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("time-dependent phase removal") {
    GridPtr grid = make_grid(8.0, 8, true);
    SpinorField phi = random_spinor(grid, 1, 112);
    const std::vector<double> times = {0.0, 0.1, 0.2, 0.3};
    const std::vector<double> F = {2.0, 2.0, 2.0, 2.0};
    SpinorField out = gauge_transform(phi, times, F);
    const cplx phase = std::polar(1.0, 2.0 * 0.3);
    double worst = 0;
    for (std::size_t i = 0; i < phi.v.size(); ++i)
        worst = std::max(worst, std::abs(out.v[i] - phase * phi.v[i]));
    CHECK(worst < 1e-13);
    CHECK(norm2(out) == doctest::Approx(norm2(phi)).epsilon(1e-13));
}

TEST_CASE("stability hypothesis constants") {
    NuclearConfig nz;
    nz.R = {{0.0, 0.0, 0.0}};
    nz.Z = {11.0};
    CHECK(validate_stability_hypothesis(0.06, nz, 1).pass);
    nz.Z = {12.0};
    CHECK_FALSE(validate_stability_hypothesis(0.06, nz, 1).pass);
    CHECK_FALSE(validate_stability_hypothesis(0.07, NuclearConfig{{{{0, 0, 0}}}, {1.0}}, 1)
                    .pass);
    StabilityReport free_particle = validate_stability_hypothesis(0.5, {}, 1);
    CHECK(free_particle.exempt);
    CHECK(free_particle.pass);
}
