#include "mp/coulomb.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace mp {
namespace {

constexpr double kPi = std::numbers::pi;

double min_image_distance(const std::array<double, 3>& a, const std::array<double, 3>& b,
                          double L) {
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) {
        double d = std::fabs(a[c] - b[c]);
        d = std::fmod(d, L);
        if (d > L / 2) d = L - d;
        d2 += d * d;
    }
    return std::sqrt(d2);
}

void axpy(SpinorField& y, const SpinorField& x, cplx a) {
    parallel_for(y.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) y.v[i] += a * x.v[i];
    });
}

}  // namespace

ScalarField coulomb_kernel(GridPtr grid, const std::array<double, 3>& center,
                           double softening) {
    ScalarField ker(grid);
    const auto& g = *grid;
    const double invvol = 1.0 / (g.L * g.L * g.L);
    for (std::size_t i = 0; i < ker.v.size(); ++i) {
        double kx, ky, kz;
        g.kvec(i, kx, ky, kz);
        const double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0) {
            ker.v[i] = cplx{};
            continue;
        }
        const double sym = 4.0 * kPi / k2 * std::exp(-softening * softening * k2 / 4.0);
        const double phase = -(kx * center[0] + ky * center[1] + kz * center[2]);
        ker.v[i] = sym * invvol * std::polar(1.0, phase);
    }
    to_samples(ker);
    for (auto& z : ker.v) z = cplx(z.real(), 0.0);
    return ker;
}

std::pair<ScalarField, double> build_potential(GridPtr grid, const NuclearConfig& nuclei,
                                               double softening) {
    for (std::size_t i = 0; i < nuclei.K(); ++i) {
        if (nuclei.Z[i] < 0.0) throw std::invalid_argument("nuclei: negative atomic number");
        for (std::size_t j = i + 1; j < nuclei.K(); ++j)
            if (min_image_distance(nuclei.R[i], nuclei.R[j], grid->L) < 1e-12)
                throw std::invalid_argument("nuclei: coincident positions");
    }
    ScalarField v(grid);
    for (std::size_t j = 0; j < nuclei.K(); ++j) {
        const ScalarField ker = coulomb_kernel(grid, nuclei.R[j], softening);
        for (std::size_t i = 0; i < v.v.size(); ++i) v.v[i] -= nuclei.Z[j] * ker.v[i];
    }
    double rep = 0.0;
    for (std::size_t i = 0; i < nuclei.K(); ++i)
        for (std::size_t j = i + 1; j < nuclei.K(); ++j)
            rep += nuclei.Z[i] * nuclei.Z[j] /
                   min_image_distance(nuclei.R[i], nuclei.R[j], grid->L);
    return {std::move(v), rep};
}

CoulombContext CoulombContext::make(GridPtr grid, const NuclearConfig& nuclei,
                                    double softening, int N) {
    CoulombContext ctx;
    ctx.grid = grid;
    ctx.nuclei = nuclei;
    ctx.softening = softening;
    auto [v, rep] = build_potential(grid, nuclei, softening);
    ctx.repulsion = rep;
    ctx.v_ext.resize(v.v.size());
    for (std::size_t i = 0; i < v.v.size(); ++i) ctx.v_ext[i] = v.v[i].real();
    if (N == 2) {
        const int n = grid->n;
        const std::size_t n3 = grid->n3();
        const ScalarField ker0 = coulomb_kernel(grid, {0.0, 0.0, 0.0}, softening);
        ctx.pair_kernel.resize(n3 * n3);
        parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t x2 = lo; x2 < hi; ++x2) {
                const int i2 = static_cast<int>(x2) / (n * n);
                const int j2 = (static_cast<int>(x2) / n) % n;
                const int l2 = static_cast<int>(x2) % n;
                double* row = ctx.pair_kernel.data() + x2 * n3;
                for (std::size_t x1 = 0; x1 < n3; ++x1) {
                    const int i1 = static_cast<int>(x1) / (n * n);
                    const int j1 = (static_cast<int>(x1) / n) % n;
                    const int l1 = static_cast<int>(x1) % n;
                    const int di = (i1 - i2 + n) % n;
                    const int dj = (j1 - j2 + n) % n;
                    const int dl = (l1 - l2 + n) % n;
                    row[x1] = ker0.v[(static_cast<std::size_t>(di) * n + dj) * n + dl].real();
                }
            }
        });
    }
    return ctx;
}

SpinorField CoulombContext::apply(const SpinorField& phi) const {
    const std::size_t n3 = grid->n3();
    SpinorField out(phi.grid, phi.N);
    if (phi.N == 1) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            const cplx* src = phi.v.data() + sp * n3;
            cplx* dst = out.v.data() + sp * n3;
            parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t x = lo; x < hi; ++x)
                    dst[x] = (v_ext[x] + repulsion) * src[x];
            });
        }
        return out;
    }
    const std::size_t n6 = n3 * n3;
    for (std::size_t sp = 0; sp < 4; ++sp) {
        const cplx* src = phi.v.data() + sp * n6;
        cplx* dst = out.v.data() + sp * n6;
        parallel_for(n6, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t x1 = i % n3, x2 = i / n3;
                dst[i] = (v_ext[x1] + v_ext[x2] + pair_kernel[i] + repulsion) * src[i];
            }
        });
    }
    return out;
}

double CoulombContext::energy(const SpinorField& phi) const {
    const std::size_t n3 = grid->n3();
    double s;
    if (phi.N == 1) {
        s = pairwise_sum(n3, [&](std::size_t x) {
            return (v_ext[x] + repulsion) *
                   (std::norm(phi.v[x]) + std::norm(phi.v[n3 + x]));
        });
    } else {
        const std::size_t n6 = n3 * n3;
        s = pairwise_sum(n6, [&](std::size_t i) {
            const std::size_t x1 = i % n3, x2 = i / n3;
            double rho = 0.0;
            for (std::size_t sp = 0; sp < 4; ++sp) rho += std::norm(phi.v[sp * n6 + i]);
            return (v_ext[x1] + v_ext[x2] + pair_kernel[i] + repulsion) * rho;
        });
    }
    return s * phi.weight();
}

double coulomb_energy(const SpinorField& phi, const NuclearConfig& nuclei,
                      double softening) {
    return CoulombContext::make(phi.grid, nuclei, softening, phi.N).energy(phi);
}

double kinetic_energy(const SpinorField& phi, const VectorField& A) {
    double T = 0.0;
    for (int j = 1; j <= phi.N; ++j) T += norm2_sq(dirac_apply(phi, A, j));
    return T;
}

double field_energy(const VectorField& A, const VectorField& Adot, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("field_energy: alpha must be positive");
    const double c2 = norm2_sq(curl(A));
    const double d2 = norm2_sq(Adot);
    return (c2 / (alpha * alpha) + 4.0 * d2) / (8.0 * kPi);
}

EnergyReport total_energy(const SpinorField& phi, const VectorField& A,
                          const VectorField& Adot, const CoulombContext& coul,
                          double alpha, double eps) {
    EnergyReport r;
    const VectorField At = lambda_eps_inv(A, eps);
    r.T = kinetic_energy(phi, At);
    r.V = coul.energy(phi);
    r.F = field_energy(A, Adot, alpha);
    r.charge = norm2_sq(phi);
    r.E = r.T + r.V + r.F * r.charge;
    return r;
}

EnergyReport total_energy(const SpinorField& phi, const VectorField& A,
                          const VectorField& Adot, const NuclearConfig& nuclei,
                          double alpha, double eps, double softening) {
    return total_energy(phi, A, Adot,
                        CoulombContext::make(phi.grid, nuclei, softening, phi.N),
                        alpha, eps);
}

SpinorField apply_hamiltonian(const SpinorField& phi, const VectorField& A,
                              const VectorField& Adot, const CoulombContext& coul,
                              double alpha, double eps) {
    const VectorField At = lambda_eps_inv(A, eps);
    const double F = field_energy(A, Adot, alpha);
    SpinorField out(phi.grid, phi.N);
    for (int j = 1; j <= phi.N; ++j) {
        axpy(out, slot_neg_laplacian(phi, j), cplx(1, 0));
        axpy(out, apply_L(phi, At, j), cplx(1, 0));
    }
    axpy(out, coul.apply(phi), cplx(1, 0));
    axpy(out, phi, cplx(F, 0));
    return out;
}

SpinorField apply_hamiltonian(const SpinorField& phi, const VectorField& A,
                              const VectorField& Adot, const NuclearConfig& nuclei,
                              double alpha, double eps, double softening) {
    return apply_hamiltonian(phi, A, Adot,
                             CoulombContext::make(phi.grid, nuclei, softening, phi.N),
                             alpha, eps);
}

ScaledState scale_state(const SpinorField& phi, const VectorField& A, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("scale_state: lambda must be positive");
    ScaledState s;
    s.grid = make_grid(phi.grid->L / lambda, phi.grid->n, phi.grid->dealias);
    s.phi = SpinorField(s.grid, phi.N);
    const double pf = std::pow(lambda, 1.5 * phi.N);
    for (std::size_t i = 0; i < phi.v.size(); ++i) s.phi.v[i] = pf * phi.v[i];
    s.phi.antisymmetric = phi.antisymmetric;
    s.A = VectorField(s.grid);
    for (int d = 0; d < 3; ++d)
        for (std::size_t i = 0; i < A.c[d].size(); ++i) s.A.c[d][i] = lambda * A.c[d][i];
    s.A.divergence_free = A.divergence_free;
    return s;
}

double coulomb_bound_gap(double T, double VF) {
    if (!(T > 0.0)) throw std::invalid_argument("coulomb_bound_gap: T must be positive");
    return VF < 0.0 ? -VF * VF / (4.0 * T) : 0.0;
}

SpinorField gauge_transform(const SpinorField& phi, const std::vector<double>& times,
                            const std::vector<double>& F_history) {
    if (times.size() != F_history.size())
        throw std::invalid_argument("gauge_transform: mismatched history lengths");
    double integral = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i)
        integral += 0.5 * (F_history[i] + F_history[i - 1]) * (times[i] - times[i - 1]);
    const cplx phase = std::polar(1.0, integral);
    SpinorField out = phi;
    for (auto& z : out.v) z *= phase;
    return out;
}

StabilityReport validate_stability_hypothesis(double alpha, const NuclearConfig& nuclei,
                                              int N) {
    if (!(alpha > 0.0)) throw std::invalid_argument("stability: alpha must be positive");
    StabilityReport r;
    r.alpha = alpha;
    r.max_Z = 0.0;
    for (double z : nuclei.Z) r.max_Z = std::max(r.max_Z, z);
    r.exempt = (N == 1 && nuclei.K() == 0);
    const bool a_ok = alpha <= 0.06;
    const bool az_ok = alpha * alpha * r.max_Z <= 0.041;
    r.pass = r.exempt || (a_ok && az_ok);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "alpha=%.6g (<=0.06: %s), alpha^2*maxZ=%.6g (<=0.041: %s)%s",
                  alpha, a_ok ? "yes" : "no", alpha * alpha * r.max_Z,
                  az_ok ? "yes" : "no", r.exempt ? ", exempt (single free electron)" : "");
    r.detail = buf;
    return r;
}

}  // namespace mp
