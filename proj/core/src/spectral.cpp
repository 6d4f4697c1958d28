#include "mp/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace mp {
namespace {

// Cached in-place c2c plans keyed by layout. FFTW_UNALIGNED makes a plan
// reusable with any array via fftw_execute_dft.
struct PlanKey {
    int n, sign, howmany, stride, dist;
    bool operator<(const PlanKey& o) const {
        return std::tie(n, sign, howmany, stride, dist) <
               std::tie(o.n, o.sign, o.howmany, o.stride, o.dist);
    }
};

fftw_plan get_plan(const PlanKey& key) {
    static std::map<PlanKey, fftw_plan> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const std::size_t total =
        static_cast<std::size_t>(key.howmany - 1) * key.dist +
        static_cast<std::size_t>(key.n) * key.n * key.n * key.stride;
    fftw_complex* buf = fftw_alloc_complex(total);
    const int dims[3] = {key.n, key.n, key.n};
    fftw_plan p = fftw_plan_many_dft(3, dims, key.howmany, buf, nullptr,
                                     key.stride, key.dist, buf, nullptr,
                                     key.stride, key.dist, key.sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    cache.emplace(key, p);
    return p;
}

void fft3_many(cplx* data, int n, int sign, int howmany, int stride, int dist) {
    fftw_plan p = get_plan({n, sign, howmany, stride, dist});
    auto* raw = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, raw, raw);
}

void scale_block(cplx* data, std::size_t count, double s) {
    parallel_for(count, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) data[i] *= s;
    });
}

// mode-space multiplication of a real vector field by a real symbol
template <class G>
VectorField vec_symbol(const VectorField& v, const G& g) {
    const auto& grid = *v.grid;
    const std::size_t n3 = grid.n3();
    VectorField out(v.grid);
    out.divergence_free = v.divergence_free;
    std::vector<cplx> buf(n3);
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < n3; ++i) buf[i] = v.c[d][i];
        fft3_many(buf.data(), grid.n, FFTW_FORWARD, 1, 1, 0);
        const double inv = 1.0 / static_cast<double>(n3);
        parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                double kx, ky, kz;
                grid.kvec(i, kx, ky, kz);
                buf[i] *= inv * g(kx, ky, kz);
            }
        });
        fft3_many(buf.data(), grid.n, FFTW_BACKWARD, 1, 1, 0);
        parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) out.c[d][i] = buf[i].real();
        });
    }
    return out;
}

template <class G>
SpinorField spinor_symbol(const SpinorField& f, const G& g) {
    SpinorField out = f;
    to_modes(out);
    const auto& grid = *out.grid;
    const std::size_t n3 = grid.n3();
    if (out.N == 1) {
        for (std::size_t s = 0; s < 2; ++s) {
            cplx* blk = out.v.data() + s * n3;
            parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) blk[i] *= g(grid.k2(i), 0.0);
            });
        }
    } else {
        const std::size_t n6 = n3 * n3;
        for (std::size_t s = 0; s < 4; ++s) {
            cplx* blk = out.v.data() + s * n6;
            parallel_for(n6, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const std::size_t x1 = i % n3, x2 = i / n3;
                    blk[i] *= g(grid.k2(x1), grid.k2(x2));
                }
            });
        }
    }
    to_samples(out);
    return out;
}

double wave_s(double omega, double t) {
    return omega == 0.0 ? t : std::sin(omega * t) / omega;
}

}  // namespace

void to_modes(ScalarField& f) {
    fft3_many(f.v.data(), f.grid->n, FFTW_FORWARD, 1, 1, 0);
    scale_block(f.v.data(), f.v.size(), 1.0 / static_cast<double>(f.grid->n3()));
}

void to_samples(ScalarField& f) {
    fft3_many(f.v.data(), f.grid->n, FFTW_BACKWARD, 1, 1, 0);
}

void slot_to_modes(SpinorField& f, int j) {
    if (j < 1 || j > f.N) throw std::out_of_range("slot_to_modes: electron index");
    const int n = f.grid->n;
    const std::size_t n3 = f.grid->n3();
    if (f.N == 1) {
        fft3_many(f.v.data(), n, FFTW_FORWARD, 2, 1, static_cast<int>(n3));
    } else if (j == 1) {
        fft3_many(f.v.data(), n, FFTW_FORWARD, static_cast<int>(4 * n3), 1,
                  static_cast<int>(n3));
    } else {
        const std::size_t n6 = n3 * n3;
        for (std::size_t s = 0; s < 4; ++s)
            fft3_many(f.v.data() + s * n6, n, FFTW_FORWARD,
                      static_cast<int>(n3), static_cast<int>(n3), 1);
    }
    scale_block(f.v.data(), f.v.size(), 1.0 / static_cast<double>(n3));
}

void slot_to_samples(SpinorField& f, int j) {
    if (j < 1 || j > f.N) throw std::out_of_range("slot_to_samples: electron index");
    const int n = f.grid->n;
    const std::size_t n3 = f.grid->n3();
    if (f.N == 1) {
        fft3_many(f.v.data(), n, FFTW_BACKWARD, 2, 1, static_cast<int>(n3));
    } else if (j == 1) {
        fft3_many(f.v.data(), n, FFTW_BACKWARD, static_cast<int>(4 * n3), 1,
                  static_cast<int>(n3));
    } else {
        const std::size_t n6 = n3 * n3;
        for (std::size_t s = 0; s < 4; ++s)
            fft3_many(f.v.data() + s * n6, n, FFTW_BACKWARD,
                      static_cast<int>(n3), static_cast<int>(n3), 1);
    }
}

void to_modes(SpinorField& f) {
    slot_to_modes(f, 1);
    if (f.N == 2) slot_to_modes(f, 2);
}

void to_samples(SpinorField& f) {
    slot_to_samples(f, 1);
    if (f.N == 2) slot_to_samples(f, 2);
}

ScalarField heat_propagate(const ScalarField& f, cplx z) {
    if (z.real() < 0.0) throw std::invalid_argument("heat_propagate: Re z must be >= 0");
    ScalarField out = f;
    to_modes(out);
    const auto& grid = *out.grid;
    parallel_for(out.v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out.v[i] *= std::exp(-z * grid.k2(i));
    });
    to_samples(out);
    return out;
}

SpinorField heat_propagate(const SpinorField& f, cplx z) {
    if (z.real() < 0.0) throw std::invalid_argument("heat_propagate: Re z must be >= 0");
    return spinor_symbol(f, [&](double k2a, double k2b) {
        return std::exp(-z * (k2a + k2b));
    });
}

std::pair<VectorField, VectorField> wave_propagate(const VectorField& A,
                                                   const VectorField& Adot,
                                                   double t, double alpha) {
    const auto cosA = vec_symbol(A, [&](double kx, double ky, double kz) {
        return std::cos(std::sqrt(kx * kx + ky * ky + kz * kz) / (2 * alpha) * t);
    });
    const auto sinAd = vec_symbol(Adot, [&](double kx, double ky, double kz) {
        return wave_s(std::sqrt(kx * kx + ky * ky + kz * kz) / (2 * alpha), t);
    });
    const auto dcosA = vec_symbol(A, [&](double kx, double ky, double kz) {
        const double om = std::sqrt(kx * kx + ky * ky + kz * kz) / (2 * alpha);
        return -om * std::sin(om * t);
    });
    const auto cosAd = vec_symbol(Adot, [&](double kx, double ky, double kz) {
        return std::cos(std::sqrt(kx * kx + ky * ky + kz * kz) / (2 * alpha) * t);
    });
    VectorField newA(A.grid), newAd(A.grid);
    const std::size_t n3 = A.grid->n3();
    for (int d = 0; d < 3; ++d)
        for (std::size_t i = 0; i < n3; ++i) {
            newA.c[d][i] = cosA.c[d][i] + sinAd.c[d][i];
            newAd.c[d][i] = dcosA.c[d][i] + cosAd.c[d][i];
        }
    newA.divergence_free = newAd.divergence_free =
        A.divergence_free && Adot.divergence_free;
    return {std::move(newA), std::move(newAd)};
}

std::pair<VectorField, VectorField> wave_response(const VectorField& f,
                                                  double t, double alpha) {
    auto sf = vec_symbol(f, [&](double kx, double ky, double kz) {
        return wave_s(std::sqrt(kx * kx + ky * ky + kz * kz) / (2 * alpha), t);
    });
    auto cf = vec_symbol(f, [&](double kx, double ky, double kz) {
        return std::cos(std::sqrt(kx * kx + ky * ky + kz * kz) / (2 * alpha) * t);
    });
    sf.divergence_free = cf.divergence_free = f.divergence_free;
    return {std::move(sf), std::move(cf)};
}

VectorField leray_project(const VectorField& v) {
    const auto& grid = *v.grid;
    const std::size_t n3 = grid.n3();
    std::array<std::vector<cplx>, 3> hat;
    for (int d = 0; d < 3; ++d) {
        hat[d].resize(n3);
        for (std::size_t i = 0; i < n3; ++i) hat[d][i] = v.c[d][i];
        fft3_many(hat[d].data(), grid.n, FFTW_FORWARD, 1, 1, 0);
    }
    const double inv = 1.0 / static_cast<double>(n3);
    parallel_for(n3, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double kx, ky, kz;
            grid.kvec_d(i, kx, ky, kz);
            const double k2 = kx * kx + ky * ky + kz * kz;
            if (k2 > 0.0) {
                const cplx kdotv = (kx * hat[0][i] + ky * hat[1][i] + kz * hat[2][i]) / k2;
                hat[0][i] -= kx * kdotv;
                hat[1][i] -= ky * kdotv;
                hat[2][i] -= kz * kdotv;
            }
            for (int d = 0; d < 3; ++d) hat[d][i] *= inv;
        }
    });
    VectorField out(v.grid);
    for (int d = 0; d < 3; ++d) {
        fft3_many(hat[d].data(), grid.n, FFTW_BACKWARD, 1, 1, 0);
        for (std::size_t i = 0; i < n3; ++i) out.c[d][i] = hat[d][i].real();
    }
    out.divergence_free = true;
    return out;
}

ScalarField lambda_eps_inv(const ScalarField& f, double eps) {
    if (eps < 0.0) throw std::invalid_argument("lambda_eps_inv: eps must be >= 0");
    ScalarField out = f;
    to_modes(out);
    const auto& grid = *out.grid;
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] /= std::sqrt(1.0 + eps * grid.k2(i));
    to_samples(out);
    return out;
}

VectorField lambda_eps_inv(const VectorField& f, double eps) {
    if (eps < 0.0) throw std::invalid_argument("lambda_eps_inv: eps must be >= 0");
    auto out = vec_symbol(f, [&](double kx, double ky, double kz) {
        return 1.0 / std::sqrt(1.0 + eps * (kx * kx + ky * ky + kz * kz));
    });
    out.divergence_free = f.divergence_free;
    return out;
}

double sobolev_norm(const ScalarField& f, double m) {
    ScalarField hat = f;
    to_modes(hat);
    const auto& grid = *hat.grid;
    const double vol = grid.L * grid.L * grid.L;
    const double s = pairwise_sum(hat.v.size(), [&](std::size_t i) {
        return std::norm(hat.v[i]) * std::pow(1.0 + grid.k2(i), m);
    });
    return std::sqrt(s * vol);
}

double sobolev_norm(const VectorField& f, double m) {
    const auto& grid = *f.grid;
    const std::size_t n3 = grid.n3();
    const double vol = grid.L * grid.L * grid.L;
    std::vector<cplx> buf(n3);
    double s = 0.0;
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < n3; ++i) buf[i] = f.c[d][i];
        fft3_many(buf.data(), grid.n, FFTW_FORWARD, 1, 1, 0);
        const double inv = 1.0 / static_cast<double>(n3);
        s += pairwise_sum(n3, [&](std::size_t i) {
            return std::norm(buf[i] * inv) * std::pow(1.0 + grid.k2(i), m);
        });
    }
    return std::sqrt(s * vol);
}

double sobolev_norm(const SpinorField& f, double m) {
    SpinorField hat = f;
    to_modes(hat);
    const auto& grid = *hat.grid;
    const std::size_t n3 = grid.n3();
    double vol = grid.L * grid.L * grid.L;
    if (f.N == 2) vol *= vol;
    double s = 0.0;
    if (f.N == 1) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            const cplx* blk = hat.v.data() + sp * n3;
            s += pairwise_sum(n3, [&](std::size_t i) {
                return std::norm(blk[i]) * std::pow(1.0 + grid.k2(i), m);
            });
        }
    } else {
        const std::size_t n6 = n3 * n3;
        for (std::size_t sp = 0; sp < 4; ++sp) {
            const cplx* blk = hat.v.data() + sp * n6;
            s += pairwise_sum(n6, [&](std::size_t i) {
                const std::size_t x1 = i % n3, x2 = i / n3;
                return std::norm(blk[i]) *
                       std::pow(1.0 + grid.k2(x1) + grid.k2(x2), m);
            });
        }
    }
    return std::sqrt(s * vol);
}

VectorField curl(const VectorField& v) {
    const auto& grid = *v.grid;
    const std::size_t n3 = grid.n3();
    std::array<std::vector<cplx>, 3> hat;
    for (int d = 0; d < 3; ++d) {
        hat[d].resize(n3);
        for (std::size_t i = 0; i < n3; ++i) hat[d][i] = v.c[d][i];
        fft3_many(hat[d].data(), grid.n, FFTW_FORWARD, 1, 1, 0);
    }
    std::array<std::vector<cplx>, 3> out;
    for (int d = 0; d < 3; ++d) out[d].resize(n3);
    const double inv = 1.0 / static_cast<double>(n3);
    const cplx iu(0.0, 1.0);
    for (std::size_t i = 0; i < n3; ++i) {
        double kx, ky, kz;
        grid.kvec_d(i, kx, ky, kz);
        out[0][i] = iu * (ky * hat[2][i] - kz * hat[1][i]) * inv;
        out[1][i] = iu * (kz * hat[0][i] - kx * hat[2][i]) * inv;
        out[2][i] = iu * (kx * hat[1][i] - ky * hat[0][i]) * inv;
    }
    VectorField r(v.grid);
    for (int d = 0; d < 3; ++d) {
        fft3_many(out[d].data(), grid.n, FFTW_BACKWARD, 1, 1, 0);
        for (std::size_t i = 0; i < n3; ++i) r.c[d][i] = out[d][i].real();
    }
    r.divergence_free = true;  // div curl = 0
    return r;
}

ScalarField divergence(const VectorField& v) {
    const auto& grid = *v.grid;
    const std::size_t n3 = grid.n3();
    ScalarField out(v.grid);
    std::vector<cplx> buf(n3);
    std::vector<cplx> acc(n3, cplx{});
    const cplx iu(0.0, 1.0);
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < n3; ++i) buf[i] = v.c[d][i];
        fft3_many(buf.data(), grid.n, FFTW_FORWARD, 1, 1, 0);
        for (std::size_t i = 0; i < n3; ++i) {
            double k[3];
            grid.kvec_d(i, k[0], k[1], k[2]);
            acc[i] += iu * k[d] * buf[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(n3);
    for (std::size_t i = 0; i < n3; ++i) acc[i] *= inv;
    fft3_many(acc.data(), grid.n, FFTW_BACKWARD, 1, 1, 0);
    out.v = std::move(acc);
    return out;
}

VectorField gradient(const ScalarField& f) {
    ScalarField hat = f;
    to_modes(hat);
    const auto& grid = *hat.grid;
    const std::size_t n3 = grid.n3();
    VectorField out(f.grid);
    const cplx iu(0.0, 1.0);
    std::vector<cplx> buf(n3);
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < n3; ++i) {
            double k[3];
            grid.kvec_d(i, k[0], k[1], k[2]);
            buf[i] = iu * k[d] * hat.v[i];
        }
        fft3_many(buf.data(), grid.n, FFTW_BACKWARD, 1, 1, 0);
        for (std::size_t i = 0; i < n3; ++i) out.c[d][i] = buf[i].real();
    }
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    ScalarField out = f;
    to_modes(out);
    const auto& grid = *out.grid;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= -grid.k2(i);
    to_samples(out);
    return out;
}

VectorField apply_symbol(const VectorField& v,
                         const std::function<double(double, double, double)>& g) {
    auto out = vec_symbol(v, g);
    out.divergence_free = false;
    return out;
}

void apply_dealias(ScalarField& f) {
    if (!f.grid->dealias) return;
    to_modes(f);
    const auto& grid = *f.grid;
    for (std::size_t i = 0; i < f.v.size(); ++i)
        if (!grid.keep(i)) f.v[i] = cplx{};
    to_samples(f);
}

void apply_dealias(VectorField& f) {
    if (!f.grid->dealias) return;
    const auto& grid = *f.grid;
    const std::size_t n3 = grid.n3();
    std::vector<cplx> buf(n3);
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < n3; ++i) buf[i] = f.c[d][i];
        fft3_many(buf.data(), grid.n, FFTW_FORWARD, 1, 1, 0);
        const double inv = 1.0 / static_cast<double>(n3);
        for (std::size_t i = 0; i < n3; ++i)
            buf[i] = grid.keep(i) ? buf[i] * inv : cplx{};
        fft3_many(buf.data(), grid.n, FFTW_BACKWARD, 1, 1, 0);
        for (std::size_t i = 0; i < n3; ++i) f.c[d][i] = buf[i].real();
    }
}

void apply_dealias(SpinorField& f) {
    if (!f.grid->dealias) return;
    to_modes(f);
    const auto& grid = *f.grid;
    const std::size_t n3 = grid.n3();
    if (f.N == 1) {
        for (std::size_t sp = 0; sp < 2; ++sp) {
            cplx* blk = f.v.data() + sp * n3;
            for (std::size_t i = 0; i < n3; ++i)
                if (!grid.keep(i)) blk[i] = cplx{};
        }
    } else {
        const std::size_t n6 = n3 * n3;
        for (std::size_t sp = 0; sp < 4; ++sp) {
            cplx* blk = f.v.data() + sp * n6;
            for (std::size_t i = 0; i < n6; ++i) {
                const std::size_t x1 = i % n3, x2 = i / n3;
                if (!grid.keep(x1) || !grid.keep(x2)) blk[i] = cplx{};
            }
        }
    }
    to_samples(f);
}

}  // namespace mp
