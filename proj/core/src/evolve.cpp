#include "mp/evolve.hpp"

#include <cmath>
#include <numbers>

namespace mp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void axpy(SpinorField& y, const SpinorField& x, cplx a) {
    parallel_for(y.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) y.v[i] += a * x.v[i];
    });
}

SpinorField midpoint(const SpinorField& a, const SpinorField& b) {
    SpinorField m = a;
    for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = 0.5 * (a.v[i] + b.v[i]);
    return m;
}

VectorField midpoint(const VectorField& a, const VectorField& b) {
    VectorField m = a;
    for (int d = 0; d < 3; ++d)
        for (std::size_t i = 0; i < m.c[d].size(); ++i)
            m.c[d][i] = 0.5 * (a.c[d][i] + b.c[d][i]);
    m.divergence_free = a.divergence_free && b.divergence_free;
    return m;
}

// the nonlinear right-hand side of the phi equation at the midpoint state:
// eps * E * phi - (i + eps) (L(At) phi + V phi + F phi)
SpinorField phi_rhs(const SpinorField& phim, const VectorField& Atm, double F,
                    double E, double eps, const CoulombContext& coul) {
    SpinorField lin(phim.grid, phim.N);
    for (int j = 1; j <= phim.N; ++j) axpy(lin, apply_L(phim, Atm, j), cplx(1, 0));
    axpy(lin, coul.apply(phim), cplx(1, 0));
    axpy(lin, phim, cplx(F, 0));

    SpinorField nl = phim;
    const cplx ie(eps, 1.0);  // i + eps
    parallel_for(nl.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            nl.v[i] = eps * E * phim.v[i] - ie * lin.v[i];
    });
    return nl;
}

struct PsiOutput {
    SpinorField phi;
    VectorField A, Adot;
};

PsiOutput psi_apply(const SystemState& s, const CoulombContext& coul,
                    const SpinorField& phi1, const VectorField& A1,
                    const VectorField& Adot1, double h, bool evolve_field) {
    const cplx ie(s.eps, 1.0);

    const SpinorField phim = midpoint(s.phi, phi1);
    const VectorField Am = midpoint(s.A, A1);
    const VectorField Adm = midpoint(s.Adot, Adot1);
    const EnergyReport er = total_energy(phim, Am, Adm, coul, s.alpha, s.eps);
    const VectorField Atm = lambda_eps_inv(Am, s.eps);

    PsiOutput out;
    out.phi = heat_propagate(s.phi, ie * h);
    const SpinorField nl = heat_propagate(phi_rhs(phim, Atm, er.F, er.E, s.eps, coul),
                                          ie * (h / 2));
    axpy(out.phi, nl, cplx(h, 0));

    if (!evolve_field) {
        out.A = s.A;
        out.Adot = s.Adot;
        return out;
    }

    auto [A, Adot] = wave_propagate(s.A, s.Adot, h, s.alpha);
    const VectorField J = total_current(phim, Atm);
    const VectorField S = lambda_eps_inv(leray_project(J), s.eps);
    auto [sS, cS] = wave_response(S, h / 2, s.alpha);
    for (int d = 0; d < 3; ++d)
        for (std::size_t i = 0; i < A.c[d].size(); ++i) {
            A.c[d][i] += kTwoPi * h * sS.c[d][i];
            Adot.c[d][i] += kTwoPi * h * cS.c[d][i];
        }
    out.A = std::move(A);
    out.Adot = std::move(Adot);
    out.A.divergence_free = out.Adot.divergence_free = true;
    return out;
}

double vec_l2(const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (int d = 0; d < 3; ++d)
        s += pairwise_sum(a.c[d].size(), [&](std::size_t i) {
            const double x = a.c[d][i] - b.c[d][i];
            return x * x;
        });
    return std::sqrt(s * a.grid->cell_volume());
}

double spinor_h1(const SpinorField& a, const SpinorField& b) {
    SpinorField d = a;
    for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] -= b.v[i];
    return sobolev_norm(d, 1.0);
}

double vec_h1(const VectorField& a, const VectorField& b) {
    VectorField d = a;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < d.c[c].size(); ++i) d.c[c][i] -= b.c[c][i];
    return sobolev_norm(d, 1.0);
}

bool finite_state(const PsiOutput& o) {
    for (const auto& z : o.phi.v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    for (int d = 0; d < 3; ++d)
        for (double x : o.A.c[d])
            if (!std::isfinite(x)) return false;
    return true;
}

double grad_norm(const SpinorField& phi) {
    const double h1 = sobolev_norm(phi, 1.0);
    const double l2 = norm2(phi);
    return std::sqrt(std::max(0.0, h1 * h1 - l2 * l2));
}

}  // namespace

void enforce_gauge(SystemState& s) {
    s.A = leray_project(s.A);
    s.Adot = leray_project(s.Adot);
}

SpinorField duhamel_phi_step(const SystemState& s, const CoulombContext& coul,
                             const SpinorField& phi1, const VectorField& A1,
                             const VectorField& Adot1, double h) {
    if (s.eps < 0.0) throw std::invalid_argument("duhamel_phi_step: eps must be >= 0");
    return psi_apply(s, coul, phi1, A1, Adot1, h, false).phi;
}

std::pair<VectorField, VectorField> duhamel_A_step(const SystemState& s,
                                                   const CoulombContext& coul,
                                                   const SpinorField& phi1,
                                                   const VectorField& A1,
                                                   const VectorField& Adot1, double h) {
    auto out = psi_apply(s, coul, phi1, A1, Adot1, h, true);
    return {std::move(out.A), std::move(out.Adot)};
}

StepStats picard_step(SystemState& s, const CoulombContext& coul, const StepConfig& cfg) {
    StepStats stats;
    double h = cfg.h;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving, h /= 2) {
        stats.halvings = halving;
        stats.h_used = h;

        // free-flow predictor: the contraction's base point
        SpinorField phi1 = heat_propagate(s.phi, cplx(s.eps, 1.0) * h);
        VectorField A1 = s.A, Adot1 = s.Adot;
        if (cfg.evolve_field) {
            auto free_wave = wave_propagate(s.A, s.Adot, h, s.alpha);
            A1 = std::move(free_wave.first);
            Adot1 = std::move(free_wave.second);
        }

        double d_prev = -1.0;
        stats.ratio = 0.0;
        for (int it = 1; it <= cfg.max_picard; ++it) {
            PsiOutput next = psi_apply(s, coul, phi1, A1, Adot1, h, cfg.evolve_field);
            if (!finite_state(next)) break;  // blow-up: treat like non-contraction
            const double d = std::max({spinor_h1(next.phi, phi1), vec_h1(next.A, A1),
                                       vec_l2(next.Adot, Adot1)});
            if (d_prev > 0.0) stats.ratio = d / d_prev;
            d_prev = d;
            phi1 = std::move(next.phi);
            A1 = std::move(next.A);
            Adot1 = std::move(next.Adot);
            const double scale = std::max(1.0, sobolev_norm(phi1, 1.0));
            // values can be finite while their squared norms overflow; an
            // infinite distance must never satisfy inf <= inf here
            if (std::isfinite(d) && d <= cfg.tol_p * scale) {
                stats.iters = it;
                stats.ok = true;
                s.phi = std::move(phi1);
                s.A = std::move(A1);
                s.Adot = std::move(Adot1);
                s.t += h;
                return stats;
            }
        }
        // no contraction at this h; halve and retry
    }
    stats.ok = false;
    stats.error = "fixed-point iteration failed to contract after max halvings";
    return stats;
}

RunResult run(SystemState initial, double T_final, const StepConfig& cfg,
              const StepCallback& on_step) {
    RunResult res;
    enforce_gauge(initial);
    const CoulombContext coul = CoulombContext::make(
        initial.phi.grid, initial.nuclei, initial.softening, initial.phi.N);

    StepConfig step_cfg = cfg;
    SystemState s = std::move(initial);

    auto make_row = [&](int iters, double ratio, double diss) {
        LedgerRow row;
        const EnergyReport er = total_energy(s.phi, s.A, s.Adot, coul, s.alpha, s.eps);
        row.t = s.t;
        row.charge = er.charge;
        row.T = er.T;
        row.V = er.V;
        row.F = er.F;
        row.E = er.E;
        const SpinorField Hphi = apply_hamiltonian(s.phi, s.A, s.Adot, coul, s.alpha, s.eps);
        const double h2 = norm2_sq(Hphi);
        const double exp_h = inner(s.phi, Hphi).real();
        row.var_H = h2 - exp_h * exp_h;
        row.diss_integral = diss;
        row.picard_iters = iters;
        row.contraction_ratio = ratio;
        return row;
    };

    double diss = 0.0;
    LedgerRow row = make_row(0, 0.0, 0.0);
    res.ledger.rows.push_back(row);
    if (on_step) on_step(s, row);
    double var_prev = row.var_H;

    while (s.t < T_final - step_cfg.h / 2) {
        StepStats st = picard_step(s, coul, step_cfg);
        if (!st.ok) {
            res.final_state = std::move(s);
            res.completed = false;
            res.failure_stage = "picard_step";
            res.h_final = step_cfg.h;
            return res;
        }
        // step size never increases mid-run
        step_cfg.h = st.h_used;

        LedgerRow next = make_row(st.iters, st.ratio, diss);
        if (!std::isfinite(next.E) || !std::isfinite(next.charge)) {
            res.final_state = std::move(s);
            res.completed = false;
            res.failure_stage = "nan_guard";
            res.h_final = step_cfg.h;
            return res;
        }
        diss += 2.0 * s.eps * 0.5 * (next.var_H + var_prev) * st.h_used;
        next.diss_integral = diss;
        var_prev = next.var_H;
        res.ledger.rows.push_back(next);
        if (on_step) on_step(s, next);
    }

    res.final_state = std::move(s);
    res.completed = true;
    res.h_final = step_cfg.h;
    return res;
}

AuditReport dissipation_audit(const EnergyLedger& ledger, double eps) {
    (void)eps;  // the dissipation integral is already accumulated in the rows
    AuditReport rep;
    if (ledger.rows.empty()) return rep;
    rep.E0 = ledger.rows.front().E;
    rep.charge_tracked = std::fabs(std::sqrt(ledger.rows.front().charge) - 1.0) < 1e-6;
    double prev_E = rep.E0;
    for (const auto& row : ledger.rows) {
        rep.max_defect = std::max(rep.max_defect,
                                  std::fabs(row.E + row.diss_integral - rep.E0));
        rep.max_charge_dev = std::max(rep.max_charge_dev,
                                      std::fabs(std::sqrt(row.charge) - 1.0));
        rep.max_energy_increase = std::max(rep.max_energy_increase, row.E - prev_E);
        prev_E = row.E;
    }
    return rep;
}

ContinuationTable epsilon_continuation(const SystemState& initial,
                                       const std::vector<double>& eps_list,
                                       double T_final, const StepConfig& cfg,
                                       int sample_every) {
    ContinuationTable table;
    std::vector<SystemState> prev_samples, cur_samples;

    for (std::size_t n = 0; n < eps_list.size(); ++n) {
        SystemState member = initial;
        member.eps = eps_list[n];
        cur_samples.clear();

        int step_idx = 0;
        auto sampler = [&](const SystemState& s, const LedgerRow&) {
            if (step_idx++ % sample_every == 0) cur_samples.push_back(s);
        };
        RunResult rr = run(member, T_final, cfg, sampler);

        MemberTrace trace;
        trace.eps = eps_list[n];
        trace.ok = rr.completed;
        for (const auto& row : rr.ledger.rows) trace.max_F = std::max(trace.max_F, row.F);
        for (const auto& s : cur_samples) {
            trace.max_grad_phi = std::max(trace.max_grad_phi, grad_norm(s.phi));
            trace.max_A_growth =
                std::max(trace.max_A_growth, norm2(s.A) / (1.0 + s.t));
        }
        table.members.push_back(trace);
        if (!rr.completed) break;  // partial table with failure marker

        if (n > 0) {
            const std::size_t m = std::min(prev_samples.size(), cur_samples.size());
            double D = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                D = std::max({D, spinor_h1(cur_samples[i].phi, prev_samples[i].phi),
                              vec_h1(cur_samples[i].A, prev_samples[i].A),
                              vec_l2(cur_samples[i].Adot, prev_samples[i].Adot)});
            }
            table.D.push_back(D);
        }
        prev_samples = std::move(cur_samples);
        cur_samples = {};
    }
    return table;
}

}  // namespace mp
