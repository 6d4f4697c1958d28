#pragma once

#include <string>
#include <utility>

#include "mp/pauli.hpp"

namespace mp {

struct NuclearConfig {
    std::vector<std::array<double, 3>> R;  // positions in box coordinates
    std::vector<double> Z;                 // atomic numbers, >= 0
    std::size_t K() const { return R.size(); }
};

struct EnergyReport {
    double T = 0, V = 0, F = 0, E = 0, charge = 0;
};

// Samples of the periodic Coulomb kernel centered at `center`: Fourier
// symbol 4 pi / |k|^2 for k != 0 (zero mean), optionally Gaussian-softened
// by exp(-a^2 |k|^2 / 4).
ScalarField coulomb_kernel(GridPtr grid, const std::array<double, 3>& center,
                           double softening);

// Electron-nucleus attraction -sum_j Z_j ker(x - R_j) plus the
// nucleus-nucleus repulsion constant (minimum-image distances).
// Coincident nuclei are rejected.
std::pair<ScalarField, double> build_potential(GridPtr grid, const NuclearConfig& nuclei,
                                               double softening = 0.0);

// Precomputed potential tables; what the time stepper holds between steps.
struct CoulombContext {
    GridPtr grid;
    NuclearConfig nuclei;
    double softening = 0.0;
    std::vector<double> v_ext;        // external potential samples
    std::vector<double> pair_kernel;  // N = 2: ker(x1 - x2), index x2*n^3 + x1
    double repulsion = 0.0;

    static CoulombContext make(GridPtr grid, const NuclearConfig& nuclei,
                               double softening, int N);
    // multiplication by the full Coulomb potential (attraction + pair term
    // + repulsion constant)
    SpinorField apply(const SpinorField& phi) const;
    double energy(const SpinorField& phi) const;  // <phi, V phi>
};

// <phi, V phi> with all three Coulomb sums
double coulomb_energy(const SpinorField& phi, const NuclearConfig& nuclei,
                      double softening = 0.0);

// T = sum_j || sigma_j.(p_j + A_j) phi ||^2; pass the regularized potential
// when evaluating the modified system's energy
double kinetic_energy(const SpinorField& phi, const VectorField& A);

// F = (||curl A||^2 / alpha^2 + 4 ||Adot||^2) / (8 pi)
double field_energy(const VectorField& A, const VectorField& Adot, double alpha);

// Total energy with the kinetic term at (1 - eps Lap)^{-1/2} A and the field
// energy weighted by the charge.
EnergyReport total_energy(const SpinorField& phi, const VectorField& A,
                          const VectorField& Adot, const NuclearConfig& nuclei,
                          double alpha, double eps, double softening = 0.0);
EnergyReport total_energy(const SpinorField& phi, const VectorField& A,
                          const VectorField& Adot, const CoulombContext& coul,
                          double alpha, double eps);

// sum_j [ -Lap_j + L_j(At) ] phi + V phi + F phi, At = (1 - eps Lap)^{-1/2} A
SpinorField apply_hamiltonian(const SpinorField& phi, const VectorField& A,
                              const VectorField& Adot, const NuclearConfig& nuclei,
                              double alpha, double eps, double softening = 0.0);
SpinorField apply_hamiltonian(const SpinorField& phi, const VectorField& A,
                              const VectorField& Adot, const CoulombContext& coul,
                              double alpha, double eps);

// phi_l(x) = l^{3N/2} phi(l x), A_l(y) = l A(l y), realized by shrinking the
// box to L/l with identical sample layout. Sends T -> l^2 T, V -> l V,
// F -> l F.
struct ScaledState {
    SpinorField phi;
    VectorField A;
    GridPtr grid;
};
ScaledState scale_state(const SpinorField& phi, const VectorField& A, double lambda);

// min over l > 0 of l^2 T + l VF: -VF^2/(4T) when VF < 0, else 0
double coulomb_bound_gap(double T, double VF);

// phi times exp(i * trapezoid integral of F over the recorded times)
SpinorField gauge_transform(const SpinorField& phi, const std::vector<double>& times,
                            const std::vector<double>& F_history);

struct StabilityReport {
    bool pass = false;
    bool exempt = false;
    double alpha = 0.0;
    double max_Z = 0.0;
    std::string detail;
};

// Checks alpha <= 0.06 and alpha^2 * max Z <= 0.041. A single electron with
// no nuclei is exempt.
StabilityReport validate_stability_hypothesis(double alpha, const NuclearConfig& nuclei,
                                              int N);

}  // namespace mp
