#pragma once

#include <array>

#include "mp/spectral.hpp"

namespace mp {

// sigma^1, sigma^2, sigma^3; sigma[a][row][col]
extern const std::array<std::array<std::array<cplx, 2>, 2>, 3> kPauli;

// sum_a v[a] * sigma_a acting on the spin index of electron j
SpinorField sigma_dot(const std::array<cplx, 3>& v, const SpinorField& phi, int j);

// pointwise version: sum_a v_a(x_j) * sigma_a phi, dealiased after the product
SpinorField sigma_dot(const VectorField& v, const SpinorField& phi, int j);

// sigma_j . (p_j + A_j) with p = -i grad (spectral); the A phi product is
// dealiased. This is the first-order building block of the kinetic term.
SpinorField dirac_apply(const SpinorField& phi, const VectorField& A, int j);

// [sigma_j . (p_j + A_j)]^2, assembled by composing dirac_apply
SpinorField apply_pauli(const SpinorField& phi, const VectorField& A, int j);

// -Laplacian acting on the coordinates of electron j only
SpinorField slot_neg_laplacian(const SpinorField& phi, int j);

// || pauli(phi) - [(p+A)^2 phi + sigma.B phi] ||_2 / ||phi||_2 with the two
// sides assembled independently
double pauli_identity_residual(const SpinorField& phi, const VectorField& A, int j);

// 2 A_j.p_j + |A_j|^2 + sigma_j.B_j  (the Pauli operator minus the free
// Laplacian in slot j)
SpinorField apply_L(const SpinorField& phi, const VectorField& A, int j);

// probability current of electron j: J_j = -Re <sigma phi, sigma.(p+A) phi>,
// the other electron's coordinates and spin summed out
VectorField current(const SpinorField& phi, const VectorField& A, int j);

VectorField total_current(const SpinorField& phi, const VectorField& A);

// residual of Re<psi, sigma sigma.(p+A) psi> = Re<psi,(p+A)psi> + curl<psi,sigma psi>/2
double spin_current_identity_residual(const SpinorField& phi, const VectorField& A, int j);

// particle exchange (x1,s1) <-> (x2,s2); N = 2 only
SpinorField swap_particles(const SpinorField& phi);

// (phi - swap(phi)) / 2, flagged antisymmetric; N = 2 only
SpinorField antisymmetrize(const SpinorField& phi);

// || phi + swap(phi) ||_2 / || phi ||_2
double antisymmetry_residual(const SpinorField& phi);

}  // namespace mp
