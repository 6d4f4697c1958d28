#pragma once

#include <functional>
#include <utility>

#include "mp/field.hpp"

namespace mp {

// In-place transforms between samples and mode amplitudes. The forward
// transform carries the 1/n^3 factor (per electron coordinate block), so
// samples are the canonical representation and a single mode amplitude c_k
// means the sample function c_k * exp(i k.x).
void to_modes(ScalarField& f);
void to_samples(ScalarField& f);
void to_modes(SpinorField& f);
void to_samples(SpinorField& f);

// Transform over a single electron's coordinates only (j in [1, N]).
void slot_to_modes(SpinorField& f, int j);
void slot_to_samples(SpinorField& f, int j);

// e^{z Laplacian}: each mode multiplied by exp(-z |k|^2). Re z >= 0 required
// (backward heat flow rejected). For N = 2 the Laplacian is the full
// 6-dimensional one.
ScalarField heat_propagate(const ScalarField& f, cplx z);
SpinorField heat_propagate(const SpinorField& f, cplx z);

// Free wave flow of (2 alpha)^2 A_tt = Laplacian A: mode frequency
// omega = |k| / (2 alpha), returns (cos(omega t) A + sin(omega t)/omega Adot,
// time derivative of the same). The k = 0 mode of sin(omega t)/omega takes
// its limit t.
std::pair<VectorField, VectorField> wave_propagate(const VectorField& A,
                                                   const VectorField& Adot,
                                                   double t, double alpha);

// (sin(omega t)/omega * f, cos(omega t) * f): the response of the free wave
// flow to an impulsive source, used by the forced-field update.
std::pair<VectorField, VectorField> wave_response(const VectorField& f,
                                                  double t, double alpha);

// Divergence-free (Leray-Helmholtz) projection; k = 0 mode passes through.
VectorField leray_project(const VectorField& v);

// (1 - eps Laplacian)^{-1/2}; eps >= 0 required.
ScalarField lambda_eps_inv(const ScalarField& f, double eps);
VectorField lambda_eps_inv(const VectorField& f, double eps);

// Discrete H^m norm: || (1 + |k|^2)^{m/2} f^ ||, |k|^2 over all 3N
// coordinates for spinor fields. m = 0 is the L^2 norm.
double sobolev_norm(const ScalarField& f, double m);
double sobolev_norm(const VectorField& f, double m);
double sobolev_norm(const SpinorField& f, double m);

VectorField curl(const VectorField& v);
ScalarField divergence(const VectorField& v);
VectorField gradient(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);

// Apply a real Fourier symbol g(kx, ky, kz) to every component.
VectorField apply_symbol(const VectorField& v,
                         const std::function<double(double, double, double)>& g);

// 2/3-rule mask, applied only when the grid was built with dealiasing
// enabled (no-op otherwise). Call after pointwise products.
void apply_dealias(ScalarField& f);
void apply_dealias(VectorField& f);
void apply_dealias(SpinorField& f);

}  // namespace mp
