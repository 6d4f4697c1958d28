#pragma once

#include "mp/coulomb.hpp"

namespace mp {

struct ZeroModeCandidate {
    SpinorField psi;  // N = 1, normalized
    VectorField A;    // divergence-free
    double residual = 0.0;
    bool within_tolerance = false;  // residual <= 1e-3
};

// || sigma.(p+A) psi ||_2 / || psi ||_2
double zero_mode_residual(const SpinorField& psi, const VectorField& A);

// The classical closed-form kernel pair of the magnetic Dirac operator
// (Loss & Yau 1986), sampled about the box center with minimum-image
// coordinates, A projected divergence-free, psi normalized:
//   psi = (1 + r^2)^{-3/2} (1 + i x.sigma) (1, 0)^T
//   A   = -3 (1 + r^2)^{-2} [ (1 - r^2) w + 2 (w.x) x + 2 w cross x ],
//   w = e_z.
// The recorded residual is dominated by the field's algebraic tails, which
// the periodic box truncates.
ZeroModeCandidate loss_yau_pair(GridPtr grid);

// Backtracking gradient descent on ||sigma.(p+A) psi||^2 with psi
// renormalized and A reprojected every accepted step. The residual never
// increases across accepted iterations.
ZeroModeCandidate variational_zero_mode(ZeroModeCandidate init, int iterations,
                                        double learning_rate, bool optimize_A = true);

// F[A, 0] / <psi, |x|^{-1} psi>, nucleus at the box center; an upper-bound
// sample of the critical charge for this candidate. Scaling-invariant.
double zc_functional(const SpinorField& psi, const VectorField& A, double alpha);

// d/dl at l = 1 of the scaled one-body energy l^2 T + l (F - Z <1/r>) for a
// zero mode (T = 0): F[A,0] - Z <psi, |x|^{-1} psi>. Negative means the
// energy collapses along the scaling direction.
double one_body_energy_slope(const ZeroModeCandidate& cand, double Z, double alpha);

}  // namespace mp
