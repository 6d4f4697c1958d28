#pragma once

#include <functional>
#include <string>

#include "mp/coulomb.hpp"

namespace mp {

struct SystemState {
    SpinorField phi;
    VectorField A, Adot;
    double t = 0.0;
    double eps = 0.0;
    double alpha = 1.0;
    NuclearConfig nuclei;
    double softening = 0.0;
};

// Leray-projects A and Adot (gauge constraint at construction time).
void enforce_gauge(SystemState& s);

struct StepConfig {
    double h = 1e-3;
    double tol_p = 1e-10;
    int max_picard = 25;
    int max_halvings = 8;
    // When false the field pair is held fixed and no current is driven;
    // this is the decoupled (Schrodinger/Pauli-only) evolution.
    bool evolve_field = true;
};

struct LedgerRow {
    double t = 0, charge = 0, T = 0, V = 0, F = 0, E = 0;
    double var_H = 0, diss_integral = 0;
    int picard_iters = 0;
    double contraction_ratio = 0;
};

struct EnergyLedger {
    std::vector<LedgerRow> rows;
};

// One Duhamel update of phi over [t, t+h]: the free (i+eps)-heat flow of
// s.phi plus the midpoint exponential rule applied to the nonlinearity,
// evaluated on the average of the step's endpoints (s and the candidate).
SpinorField duhamel_phi_step(const SystemState& s, const CoulombContext& coul,
                             const SpinorField& phi1, const VectorField& A1,
                             const VectorField& Adot1, double h);

// Matching update of (A, Adot): free wave flow plus the 2 pi weighted
// quadrature of the propagated, regularized, projected current.
std::pair<VectorField, VectorField> duhamel_A_step(const SystemState& s,
                                                   const CoulombContext& coul,
                                                   const SpinorField& phi1,
                                                   const VectorField& A1,
                                                   const VectorField& Adot1, double h);

struct StepStats {
    int iters = 0;
    double ratio = 0.0;   // last observed successive-difference ratio
    int halvings = 0;
    double h_used = 0.0;
    bool ok = false;
    std::string error;
};

// Fixed-point iteration of the Duhamel map from the free-flow predictor.
// Convergence is measured in max(H1(phi), H1(A), L2(Adot)); failure to
// converge within max_picard iterations halves h (up to max_halvings).
StepStats picard_step(SystemState& s, const CoulombContext& coul, const StepConfig& cfg);

struct RunResult {
    SystemState final_state;
    EnergyLedger ledger;
    bool completed = false;
    std::string failure_stage;
    double h_final = 0.0;
};

using StepCallback = std::function<void(const SystemState&, const LedgerRow&)>;

// Advances to T_final (step size may shrink, never grows). The ledger gets
// one row per step plus the initial row; the dissipation integral is the
// trapezoid rule over the recorded H-variance.
RunResult run(SystemState initial, double T_final, const StepConfig& cfg,
              const StepCallback& on_step = {});

struct AuditReport {
    double E0 = 0.0;
    double max_defect = 0.0;        // max |E(t) + diss(t) - E0|
    double max_charge_dev = 0.0;    // max | ||phi|| - 1 |
    double max_energy_increase = 0.0;  // most positive per-step E jump
    bool charge_tracked = false;    // initial data was normalized
};

AuditReport dissipation_audit(const EnergyLedger& ledger, double eps);

struct MemberTrace {
    double eps = 0.0;
    bool ok = false;
    double max_grad_phi = 0.0;
    double max_F = 0.0;
    double max_A_growth = 0.0;  // max ||A||_2 / (1 + t)
};

struct ContinuationTable {
    std::vector<MemberTrace> members;
    // D[n] = distance between the trajectories of eps[n] and eps[n+1]
    std::vector<double> D;
};

// Runs the same initial data for each eps (descending) and tabulates
// pairwise trajectory distances sup_t max(H1(dphi), H1(dA), L2(dAdot)),
// sampled every sample_every steps.
ContinuationTable epsilon_continuation(const SystemState& initial,
                                       const std::vector<double>& eps_list,
                                       double T_final, const StepConfig& cfg,
                                       int sample_every = 1);

}  // namespace mp
