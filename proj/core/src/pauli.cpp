#include "mp/pauli.hpp"

#include <stdexcept>

namespace mp {

const std::array<std::array<std::array<cplx, 2>, 2>, 3> kPauli = {{
    {{{cplx(0, 0), cplx(1, 0)}, {cplx(1, 0), cplx(0, 0)}}},
    {{{cplx(0, 0), cplx(0, -1)}, {cplx(0, 1), cplx(0, 0)}}},
    {{{cplx(1, 0), cplx(0, 0)}, {cplx(0, 0), cplx(-1, 0)}}},
}};

namespace {

void check_slot(const SpinorField& phi, int j) {
    if (j < 1 || j > phi.N) throw std::out_of_range("pauli: electron index out of range");
}

void check_grid(const SpinorField& phi, const VectorField& A) {
    if (phi.grid->n != A.grid->n || phi.grid->L != A.grid->L)
        throw std::invalid_argument("pauli: grid mismatch between spinor and vector field");
}

// out += coeff * sigma_a^{(j)} q
void add_sigma(SpinorField& out, const SpinorField& q, int a, int j, cplx coeff) {
    const std::size_t n3 = q.grid->n3();
    const auto& s = kPauli[a];
    if (q.N == 1) {
        parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t x = lo; x < hi; ++x) {
                out.v[x] += coeff * (s[0][0] * q.v[x] + s[0][1] * q.v[n3 + x]);
                out.v[n3 + x] += coeff * (s[1][0] * q.v[x] + s[1][1] * q.v[n3 + x]);
            }
        });
        return;
    }
    const std::size_t n6 = n3 * n3;
    for (int s2 = 0; s2 < 2; ++s2)
        for (int s1 = 0; s1 < 2; ++s1) {
            const int row = (j == 1) ? s1 : s2;
            cplx* dst = out.v.data() + (s1 + 2 * s2) * n6;
            for (int col = 0; col < 2; ++col) {
                const cplx w = coeff * s[row][col];
                if (w == cplx{}) continue;
                const int src_idx = (j == 1) ? (col + 2 * s2) : (s1 + 2 * col);
                const cplx* src = q.v.data() + src_idx * n6;
                parallel_for(n6, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t x = lo; x < hi; ++x) dst[x] += w * src[x];
                });
            }
        }
}

SpinorField sigma_mix(const SpinorField& q, int a, int j) {
    SpinorField out(q.grid, q.N);
    add_sigma(out, q, a, j, cplx(1, 0));
    return out;
}

// pointwise multiplication by a real 3D field evaluated at x_j
SpinorField slot_mult(const SpinorField& phi, const std::vector<double>& g, int j) {
    const std::size_t n3 = phi.grid->n3();
    SpinorField out(phi.grid, phi.N);
    if (phi.N == 1) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            const cplx* src = phi.v.data() + sp * n3;
            cplx* dst = out.v.data() + sp * n3;
            parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t x = lo; x < hi; ++x) dst[x] = g[x] * src[x];
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
                dst[i] = g[j == 1 ? x1 : x2] * src[i];
            }
        });
    }
    return out;
}

// p_a phi = -i d/dx_a phi acting on slot j (momentum multiplier k_a)
SpinorField slot_momentum(const SpinorField& phi, int j, int axis) {
    SpinorField out = phi;
    slot_to_modes(out, j);
    const auto& grid = *out.grid;
    const std::size_t n3 = grid.n3();
    auto kaxis = [&](std::size_t x) {
        double k[3];
        grid.kvec(x, k[0], k[1], k[2]);
        return k[axis];
    };
    if (out.N == 1) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            cplx* blk = out.v.data() + sp * n3;
            parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t x = lo; x < hi; ++x) blk[x] *= kaxis(x);
            });
        }
    } else {
        const std::size_t n6 = n3 * n3;
        for (std::size_t sp = 0; sp < 4; ++sp) {
            cplx* blk = out.v.data() + sp * n6;
            parallel_for(n6, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const std::size_t x1 = i % n3, x2 = i / n3;
                    blk[i] *= kaxis(j == 1 ? x1 : x2);
                }
            });
        }
    }
    slot_to_samples(out, j);
    return out;
}

void axpy(SpinorField& y, const SpinorField& x, cplx a) {
    parallel_for(y.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) y.v[i] += a * x.v[i];
    });
}

}  // namespace

SpinorField slot_neg_laplacian(const SpinorField& phi, int j) {
    check_slot(phi, j);
    SpinorField out = phi;
    slot_to_modes(out, j);
    const auto& grid = *out.grid;
    const std::size_t n3 = grid.n3();
    if (out.N == 1) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            cplx* blk = out.v.data() + sp * n3;
            for (std::size_t x = 0; x < n3; ++x) blk[x] *= grid.k2(x);
        }
    } else {
        const std::size_t n6 = n3 * n3;
        for (std::size_t sp = 0; sp < 4; ++sp) {
            cplx* blk = out.v.data() + sp * n6;
            for (std::size_t i = 0; i < n6; ++i) {
                const std::size_t x1 = i % n3, x2 = i / n3;
                blk[i] *= grid.k2(j == 1 ? x1 : x2);
            }
        }
    }
    slot_to_samples(out, j);
    return out;
}

namespace {

// reduce a quadratic density over the other electron's coordinates/spins:
// out(x_j) += scale * Re( conj(a) * b ), integrated over everything but x_j
void accumulate_density(std::vector<double>& out, const SpinorField& a,
                        const SpinorField& b, int j, double scale) {
    const std::size_t n3 = a.grid->n3();
    if (a.N == 1) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            const cplx* pa = a.v.data() + sp * n3;
            const cplx* pb = b.v.data() + sp * n3;
            parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t x = lo; x < hi; ++x)
                    out[x] += scale * (std::conj(pa[x]) * pb[x]).real();
            });
        }
        return;
    }
    const std::size_t n6 = n3 * n3;
    const double w = scale * a.grid->cell_volume();
    if (j == 1) {
        parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t x1 = lo; x1 < hi; ++x1) {
                double acc = 0.0;
                for (std::size_t sp = 0; sp < 4; ++sp) {
                    const cplx* pa = a.v.data() + sp * n6;
                    const cplx* pb = b.v.data() + sp * n6;
                    for (std::size_t x2 = 0; x2 < n3; ++x2) {
                        const std::size_t i = x2 * n3 + x1;
                        acc += (std::conj(pa[i]) * pb[i]).real();
                    }
                }
                out[x1] += w * acc;
            }
        });
    } else {
        parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t x2 = lo; x2 < hi; ++x2) {
                double acc = 0.0;
                for (std::size_t sp = 0; sp < 4; ++sp) {
                    const cplx* pa = a.v.data() + sp * n6;
                    const cplx* pb = b.v.data() + sp * n6;
                    for (std::size_t x1 = 0; x1 < n3; ++x1) {
                        const std::size_t i = x2 * n3 + x1;
                        acc += (std::conj(pa[i]) * pb[i]).real();
                    }
                }
                out[x2] += w * acc;
            }
        });
    }
}

}  // namespace

SpinorField sigma_dot(const std::array<cplx, 3>& v, const SpinorField& phi, int j) {
    check_slot(phi, j);
    SpinorField out(phi.grid, phi.N);
    for (int a = 0; a < 3; ++a)
        if (v[a] != cplx{}) add_sigma(out, phi, a, j, v[a]);
    return out;
}

SpinorField sigma_dot(const VectorField& v, const SpinorField& phi, int j) {
    check_slot(phi, j);
    check_grid(phi, v);
    SpinorField out(phi.grid, phi.N);
    for (int a = 0; a < 3; ++a) {
        SpinorField prod = slot_mult(phi, v.c[a], j);
        add_sigma(out, prod, a, j, cplx(1, 0));
    }
    apply_dealias(out);
    return out;
}

SpinorField dirac_apply(const SpinorField& phi, const VectorField& A, int j) {
    check_slot(phi, j);
    check_grid(phi, A);
    SpinorField out(phi.grid, phi.N);
    for (int a = 0; a < 3; ++a) {
        SpinorField pa = slot_momentum(phi, j, a);
        add_sigma(out, pa, a, j, cplx(1, 0));
    }
    SpinorField prod(phi.grid, phi.N);
    for (int a = 0; a < 3; ++a) {
        SpinorField ap = slot_mult(phi, A.c[a], j);
        add_sigma(prod, ap, a, j, cplx(1, 0));
    }
    apply_dealias(prod);
    axpy(out, prod, cplx(1, 0));
    return out;
}

SpinorField apply_pauli(const SpinorField& phi, const VectorField& A, int j) {
    return dirac_apply(dirac_apply(phi, A, j), A, j);
}

SpinorField apply_L(const SpinorField& phi, const VectorField& A, int j) {
    check_slot(phi, j);
    check_grid(phi, A);
    const std::size_t n3 = phi.grid->n3();

    // 2 A.p phi + |A|^2 phi + sigma.B phi, the products dealiased as one sum
    SpinorField sum(phi.grid, phi.N);
    for (int a = 0; a < 3; ++a) {
        SpinorField pa = slot_momentum(phi, j, a);
        SpinorField ap = slot_mult(pa, A.c[a], j);
        axpy(sum, ap, cplx(2, 0));
    }
    std::vector<double> a2(n3);
    for (std::size_t x = 0; x < n3; ++x)
        a2[x] = A.c[0][x] * A.c[0][x] + A.c[1][x] * A.c[1][x] + A.c[2][x] * A.c[2][x];
    axpy(sum, slot_mult(phi, a2, j), cplx(1, 0));

    const VectorField B = curl(A);
    for (int a = 0; a < 3; ++a) {
        SpinorField bp = slot_mult(phi, B.c[a], j);
        add_sigma(sum, bp, a, j, cplx(1, 0));
    }
    apply_dealias(sum);
    return sum;
}

double pauli_identity_residual(const SpinorField& phi, const VectorField& A, int j) {
    SpinorField lhs = apply_pauli(phi, A, j);

    // expanded form: (p+A)^2 phi + sigma.B phi = -Lap phi + L phi
    SpinorField rhs = slot_neg_laplacian(phi, j);
    axpy(rhs, apply_L(phi, A, j), cplx(1, 0));

    axpy(lhs, rhs, cplx(-1, 0));
    return norm2(lhs) / norm2(phi);
}

VectorField current(const SpinorField& phi, const VectorField& A, int j) {
    check_slot(phi, j);
    check_grid(phi, A);
    const SpinorField D = dirac_apply(phi, A, j);
    VectorField J(phi.grid);
    for (int a = 0; a < 3; ++a) {
        const SpinorField sp = sigma_mix(phi, a, j);
        accumulate_density(J.c[a], sp, D, j, -1.0);
    }
    return J;
}

VectorField total_current(const SpinorField& phi, const VectorField& A) {
    VectorField J = current(phi, A, 1);
    if (phi.N == 2) {
        const VectorField J2 = current(phi, A, 2);
        for (int a = 0; a < 3; ++a)
            for (std::size_t x = 0; x < J.c[a].size(); ++x) J.c[a][x] += J2.c[a][x];
    }
    return J;
}

double spin_current_identity_residual(const SpinorField& phi, const VectorField& A, int j) {
    check_slot(phi, j);
    check_grid(phi, A);
    const std::size_t n3 = phi.grid->n3();

    // left side: Re <sigma psi, sigma.(p+A) psi> = -J
    const VectorField J = current(phi, A, j);

    // right side, convective part: Re <psi, (p+A) psi>
    VectorField conv(phi.grid);
    for (int a = 0; a < 3; ++a) {
        SpinorField q = slot_momentum(phi, j, a);
        SpinorField ap = slot_mult(phi, A.c[a], j);
        apply_dealias(ap);
        axpy(q, ap, cplx(1, 0));
        accumulate_density(conv.c[a], phi, q, j, 1.0);
    }

    // right side, spin part: curl <psi, sigma psi> / 2
    VectorField sden(phi.grid);
    for (int a = 0; a < 3; ++a) {
        const SpinorField sp = sigma_mix(phi, a, j);
        accumulate_density(sden.c[a], phi, sp, j, 1.0);
    }
    const VectorField curl_s = curl(sden);

    double diff = 0.0;
    for (int a = 0; a < 3; ++a)
        diff += pairwise_sum(n3, [&](std::size_t x) {
            const double d = -J.c[a][x] - (conv.c[a][x] + 0.5 * curl_s.c[a][x]);
            return d * d;
        });
    diff = std::sqrt(diff * phi.grid->cell_volume());
    return diff / norm2_sq(phi);
}

SpinorField swap_particles(const SpinorField& phi) {
    if (phi.N != 2) throw std::invalid_argument("swap_particles: requires N = 2");
    const std::size_t n3 = phi.grid->n3();
    const std::size_t n6 = n3 * n3;
    SpinorField out(phi.grid, 2);
    for (int s2 = 0; s2 < 2; ++s2)
        for (int s1 = 0; s1 < 2; ++s1) {
            const cplx* src = phi.v.data() + (s1 + 2 * s2) * n6;
            cplx* dst = out.v.data() + (s2 + 2 * s1) * n6;
            parallel_for(n6, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const std::size_t x1 = i % n3, x2 = i / n3;
                    dst[x1 * n3 + x2] = src[i];
                }
            });
        }
    return out;
}

SpinorField antisymmetrize(const SpinorField& phi) {
    SpinorField out = swap_particles(phi);
    parallel_for(out.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out.v[i] = 0.5 * (phi.v[i] - out.v[i]);
    });
    out.antisymmetric = true;
    return out;
}

double antisymmetry_residual(const SpinorField& phi) {
    SpinorField sw = swap_particles(phi);
    axpy(sw, phi, cplx(1, 0));
    return norm2(sw) / norm2(phi);
}

}  // namespace mp
