#include "mp/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mp {
namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'M', 'P', 'S', 'N', 'A', 'P', '0', '1'};
constexpr const char* kVersion = "0.1.0";
constexpr const char* kLedgerHeader =
    "t, charge, T, V, F, E, var_H, diss_integral, picard_iters, contraction_ratio";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, const std::string& origin, int line) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(origin, line, "expected a number, got '" + v + "'");
    }
}

long to_int(const std::string& v, const std::string& origin, int line) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(origin, line, "expected an integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& origin, int line) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    fail(origin, line, "expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& origin, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(item, origin, line));
    }
    return out;
}

// zero all modes with any axis |m| > mmax (sharper than the 2/3 mask; used
// to make smooth random initial data)
void band_limit(SpinorField& phi, int mmax) {
    to_modes(phi);
    const auto& grid = *phi.grid;
    const int n = grid.n;
    const std::size_t n3 = grid.n3();
    auto keep3 = [&](std::size_t x) {
        const int l = static_cast<int>(x % n);
        const int j = static_cast<int>((x / n) % n);
        const int i = static_cast<int>(x / (static_cast<std::size_t>(n) * n));
        auto m = [&](int idx) { return idx < n / 2 ? idx : idx - n; };
        return std::abs(m(i)) <= mmax && std::abs(m(j)) <= mmax && std::abs(m(l)) <= mmax;
    };
    if (phi.N == 1) {
        for (std::size_t sp = 0; sp < 2; ++sp)
            for (std::size_t x = 0; x < n3; ++x)
                if (!keep3(x)) phi.v[sp * n3 + x] = cplx{};
    } else {
        const std::size_t n6 = n3 * n3;
        for (std::size_t sp = 0; sp < 4; ++sp)
            for (std::size_t i = 0; i < n6; ++i)
                if (!keep3(i % n3) || !keep3(i / n3)) phi.v[sp * n6 + i] = cplx{};
    }
    to_samples(phi);
}

void band_limit(VectorField& A, int mmax) {
    ScalarField tmp(A.grid);
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < tmp.v.size(); ++i) tmp.v[i] = A.c[d][i];
        SpinorField wrap(A.grid, 1);  // reuse the spinor mask on one block
        std::copy(tmp.v.begin(), tmp.v.end(), wrap.v.begin());
        band_limit(wrap, mmax);
        for (std::size_t i = 0; i < tmp.v.size(); ++i) A.c[d][i] = wrap.v[i].real();
    }
}

void normalize(SpinorField& phi) {
    const double nn = norm2(phi);
    if (nn == 0.0) throw std::runtime_error("initial state: wave function vanishes");
    for (auto& z : phi.v) z /= nn;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    cfg.source_text = text;

    static const std::map<std::string, std::set<std::string>> known = {
        {"grid", {"L", "n", "dealias"}},
        {"physics", {"alpha", "eps", "N", "K", "softening"}},  // plus R<j>, Z<j>
        {"initial", {"preset", "snapshot", "seed", "width", "amplitude"}},
        {"stepping", {"h", "T_final", "tol_p", "max_picard", "evolve_field"}},
        {"output", {"snapshot_every", "dir"}},
        {"continuation", {"eps_list"}},
        {"zeromode", {"Z_list", "optimize", "iterations", "learning_rate"}},
    };

    std::string section;
    std::set<std::string> seen;
    std::map<std::string, std::pair<std::string, int>> values;  // section.key -> value, line

    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!known.count(section)) fail(origin, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        if (section.empty()) fail(origin, lineno, "key outside of any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const bool nuclear_key =
            section == "physics" && key.size() >= 2 && (key[0] == 'R' || key[0] == 'Z') &&
            key.find_first_not_of("0123456789", 1) == std::string::npos;
        if (!known.at(section).count(key) && !nuclear_key)
            fail(origin, lineno, "unknown key '" + key + "' in section [" + section + "]");
        const std::string full = section + "." + key;
        if (!seen.insert(full).second) fail(origin, lineno, "duplicate key '" + key + "'");
        values[full] = {value, lineno};
    }

    auto get = [&](const std::string& full) -> const std::pair<std::string, int>* {
        auto it = values.find(full);
        return it == values.end() ? nullptr : &it->second;
    };

    if (auto* p = get("grid.L")) cfg.L = to_double(p->first, origin, p->second);
    if (auto* p = get("grid.n")) cfg.n = static_cast<int>(to_int(p->first, origin, p->second));
    if (auto* p = get("grid.dealias")) cfg.dealias = to_bool(p->first, origin, p->second);
    if (auto* p = get("physics.alpha")) cfg.alpha = to_double(p->first, origin, p->second);
    if (auto* p = get("physics.eps")) cfg.eps = to_double(p->first, origin, p->second);
    if (auto* p = get("physics.N")) cfg.N = static_cast<int>(to_int(p->first, origin, p->second));
    if (auto* p = get("physics.softening")) cfg.softening = to_double(p->first, origin, p->second);

    long K = 0;
    if (auto* p = get("physics.K")) K = to_int(p->first, origin, p->second);
    for (long j = 1; j <= K; ++j) {
        const auto* pr = get("physics.R" + std::to_string(j));
        const auto* pz = get("physics.Z" + std::to_string(j));
        if (!pr || !pz)
            throw std::runtime_error(origin + ": K = " + std::to_string(K) + " but R" +
                                     std::to_string(j) + "/Z" + std::to_string(j) +
                                     " missing");
        std::stringstream rs(pr->first);
        std::array<double, 3> R{};
        std::string tok;
        for (int c = 0; c < 3; ++c) {
            if (!(rs >> tok)) fail(origin, pr->second, "R needs three coordinates");
            R[c] = to_double(tok, origin, pr->second);
        }
        cfg.nuclei.R.push_back(R);
        cfg.nuclei.Z.push_back(to_double(pz->first, origin, pz->second));
    }
    for (const auto& [full, vp] : values) {
        if (full.rfind("physics.R", 0) == 0 || full.rfind("physics.Z", 0) == 0) {
            const long j = std::strtol(full.c_str() + 9, nullptr, 10);
            if (j < 1 || j > K)
                fail(origin, vp.second, "nuclear entry " + full.substr(8) +
                                            " outside K = " + std::to_string(K));
        }
    }

    if (auto* p = get("initial.preset")) cfg.preset = p->first;
    if (auto* p = get("initial.snapshot")) cfg.snapshot_path = p->first;
    if (auto* p = get("initial.seed"))
        cfg.seed = static_cast<std::uint64_t>(to_int(p->first, origin, p->second));
    if (auto* p = get("initial.width")) cfg.width = to_double(p->first, origin, p->second);
    if (auto* p = get("initial.amplitude")) cfg.amplitude = to_double(p->first, origin, p->second);
    if (auto* p = get("stepping.h")) cfg.h = to_double(p->first, origin, p->second);
    if (auto* p = get("stepping.T_final")) cfg.T_final = to_double(p->first, origin, p->second);
    if (auto* p = get("stepping.tol_p")) cfg.tol_p = to_double(p->first, origin, p->second);
    if (auto* p = get("stepping.max_picard"))
        cfg.max_picard = static_cast<int>(to_int(p->first, origin, p->second));
    if (auto* p = get("stepping.evolve_field"))
        cfg.evolve_field = to_bool(p->first, origin, p->second);
    if (auto* p = get("output.snapshot_every"))
        cfg.snapshot_every = static_cast<int>(to_int(p->first, origin, p->second));
    if (auto* p = get("output.dir")) cfg.output_dir = p->first;
    if (auto* p = get("continuation.eps_list"))
        cfg.continuation_eps = to_list(p->first, origin, p->second);
    if (auto* p = get("zeromode.Z_list")) cfg.zeromode_Z = to_list(p->first, origin, p->second);
    if (auto* p = get("zeromode.optimize")) cfg.zm_optimize = to_bool(p->first, origin, p->second);
    if (auto* p = get("zeromode.iterations"))
        cfg.zm_iterations = static_cast<int>(to_int(p->first, origin, p->second));
    if (auto* p = get("zeromode.learning_rate"))
        cfg.zm_learning_rate = to_double(p->first, origin, p->second);

    // semantic checks
    if (cfg.n < 4 || cfg.n % 2 != 0) throw std::runtime_error(origin + ": n must be even, >= 4");
    if (!(cfg.L > 0)) throw std::runtime_error(origin + ": L must be positive");
    if (cfg.N != 1 && cfg.N != 2) throw std::runtime_error(origin + ": N must be 1 or 2");
    if (cfg.eps < 0) throw std::runtime_error(origin + ": eps must be >= 0");
    if (!(cfg.alpha > 0)) throw std::runtime_error(origin + ": alpha must be positive");
    if (!(cfg.h > 0)) throw std::runtime_error(origin + ": h must be positive");
    if (!(cfg.tol_p > 0)) throw std::runtime_error(origin + ": tol_p must be positive");
    static const std::set<std::string> presets = {"gaussian-packet", "plane-wave",
                                                  "loss-yau-seed", "random", "snapshot"};
    if (!presets.count(cfg.preset))
        throw std::runtime_error(origin + ": unknown preset '" + cfg.preset + "'");
    if (cfg.preset == "snapshot" && cfg.snapshot_path.empty())
        throw std::runtime_error(origin + ": preset snapshot requires a snapshot path");
    for (std::size_t i = 0; i < cfg.nuclei.K(); ++i)
        for (std::size_t j = i + 1; j < cfg.nuclei.K(); ++j) {
            double d2 = 0;
            for (int c = 0; c < 3; ++c) {
                double d = std::fabs(cfg.nuclei.R[i][c] - cfg.nuclei.R[j][c]);
                d = std::fmod(d, cfg.L);
                if (d > cfg.L / 2) d = cfg.L - d;
                d2 += d * d;
            }
            if (d2 < 1e-24)
                throw std::runtime_error(origin + ": nuclei " + std::to_string(i + 1) +
                                         " and " + std::to_string(j + 1) + " coincide");
        }

    cfg.stability = validate_stability_hypothesis(cfg.alpha, cfg.nuclei, cfg.N);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

SystemState build_initial_state(const RunConfig& cfg) {
    SystemState s;
    s.eps = cfg.eps;
    s.alpha = cfg.alpha;
    s.nuclei = cfg.nuclei;
    s.softening = cfg.softening;

    if (cfg.preset == "snapshot") {
        SystemState loaded = load_snapshot(cfg.snapshot_path);
        if (loaded.phi.grid->n != cfg.n || loaded.phi.grid->L != cfg.L)
            throw std::runtime_error("snapshot grid (" +
                                     std::to_string(loaded.phi.grid->n) +
                                     ") does not match configured grid (" +
                                     std::to_string(cfg.n) + ")");
        return loaded;
    }

    GridPtr grid = make_grid(cfg.L, cfg.n, cfg.dealias);
    const int n = cfg.n;
    const double L = cfg.L, dx = grid->dx();
    const std::size_t n3 = grid->n3();
    s.A = VectorField(grid);
    s.Adot = VectorField(grid);
    s.A.divergence_free = s.Adot.divergence_free = true;

    if (cfg.preset == "loss-yau-seed") {
        if (cfg.N != 1) throw std::runtime_error("loss-yau-seed requires N = 1");
        ZeroModeCandidate cand = loss_yau_pair(grid);
        s.phi = std::move(cand.psi);
        s.A = std::move(cand.A);
        return s;
    }

    if (cfg.preset == "plane-wave") {
        s.phi = SpinorField(grid, cfg.N);
        const double amp = std::pow(L, -1.5);
        auto wave = [&](int axis, std::size_t x) {
            const int idx[3] = {static_cast<int>(x / (static_cast<std::size_t>(n) * n)),
                                static_cast<int>((x / n) % n), static_cast<int>(x % n)};
            return std::polar(amp, 2.0 * std::numbers::pi * idx[axis] / n);
        };
        if (cfg.N == 1) {
            for (std::size_t x = 0; x < n3; ++x) s.phi.v[x] = wave(0, x);
        } else {
            // spin-up wave along x for one electron, spin-down along y for
            // the other, antisymmetrized
            SpinorField prod(grid, 2);
            const std::size_t n6 = n3 * n3;
            for (std::size_t i = 0; i < n6; ++i) {
                const std::size_t x1 = i % n3, x2 = i / n3;
                prod.v[0 * n6 + i] = cplx{};
                prod.v[2 * n6 + i] = wave(0, x1) * wave(1, x2);  // s1 up, s2 down
            }
            s.phi = antisymmetrize(prod);
            normalize(s.phi);
        }
        return s;
    }

    if (cfg.preset == "gaussian-packet") {
        std::vector<cplx> g(n3), gboost(n3);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) {
                    const double x = i * dx - L / 2, y = j * dx - L / 2, z = l * dx - L / 2;
                    const double r2 = x * x + y * y + z * z;
                    const double ge = std::exp(-r2 / cfg.width);
                    const std::size_t idx = grid->at(i, j, l);
                    g[idx] = ge;
                    gboost[idx] = ge * std::polar(1.0, 2.0 * std::numbers::pi * i / n);
                }
        s.phi = SpinorField(grid, cfg.N);
        if (cfg.N == 1) {
            for (std::size_t x = 0; x < n3; ++x) {
                s.phi.v[x] = g[x];
                s.phi.v[n3 + x] = cfg.amplitude * gboost[x];
            }
        } else {
            SpinorField prod(grid, 2);
            const std::size_t n6 = n3 * n3;
            for (std::size_t i = 0; i < n6; ++i) {
                const std::size_t x1 = i % n3, x2 = i / n3;
                prod.v[2 * n6 + i] = g[x1] * gboost[x2];  // s1 up, s2 down
            }
            s.phi = antisymmetrize(prod);
        }
        apply_dealias(s.phi);
        normalize(s.phi);
        return s;
    }

    // preset == "random": band-limited noise, reproducible from the seed
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    s.phi = SpinorField(grid, cfg.N);
    for (auto& z : s.phi.v) z = cplx(gauss(rng), gauss(rng));
    band_limit(s.phi, std::max(1, n / 6));
    if (cfg.N == 2) s.phi = antisymmetrize(s.phi);
    normalize(s.phi);
    for (int d = 0; d < 3; ++d)
        for (auto& x : s.A.c[d]) x = gauss(rng);
    band_limit(s.A, std::max(1, n / 6));
    s.A = leray_project(s.A);
    return s;
}

StepConfig step_config(const RunConfig& cfg) {
    StepConfig sc;
    sc.h = cfg.h;
    sc.tol_p = cfg.tol_p;
    sc.max_picard = cfg.max_picard;
    sc.evolve_field = cfg.evolve_field;
    return sc;
}

void persist_snapshot(const SystemState& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open snapshot for writing: " + path);

    char header[64] = {};
    std::memcpy(header, kMagic, 8);
    const std::uint32_t n = static_cast<std::uint32_t>(s.phi.grid->n);
    const std::uint32_t N = static_cast<std::uint32_t>(s.phi.N);
    const std::uint64_t phi_count = s.phi.v.size();
    const std::uint64_t vec_count = s.phi.grid->n3();
    const double L = s.phi.grid->L;
    std::memcpy(header + 8, &n, 4);
    std::memcpy(header + 12, &N, 4);
    std::memcpy(header + 16, &phi_count, 8);
    std::memcpy(header + 24, &vec_count, 8);
    std::memcpy(header + 32, &L, 8);
    header[40] = s.phi.grid->dealias ? 1 : 0;
    header[41] = s.phi.antisymmetric ? 1 : 0;
    out.write(header, 64);

    out.write(reinterpret_cast<const char*>(s.phi.v.data()),
              static_cast<std::streamsize>(phi_count * sizeof(cplx)));
    for (const auto* field : {&s.A, &s.Adot})
        for (int d = 0; d < 3; ++d)
            out.write(reinterpret_cast<const char*>(field->c[d].data()),
                      static_cast<std::streamsize>(vec_count * sizeof(double)));

    out << "t = " << fmt17(s.t) << "\n";
    out << "eps = " << fmt17(s.eps) << "\n";
    out << "alpha = " << fmt17(s.alpha) << "\n";
    out << "softening = " << fmt17(s.softening) << "\n";
    out << "K = " << s.nuclei.K() << "\n";
    for (std::size_t j = 0; j < s.nuclei.K(); ++j) {
        out << "R" << j + 1 << " = " << fmt17(s.nuclei.R[j][0]) << " "
            << fmt17(s.nuclei.R[j][1]) << " " << fmt17(s.nuclei.R[j][2]) << "\n";
        out << "Z" << j + 1 << " = " << fmt17(s.nuclei.Z[j]) << "\n";
    }
    if (!out) throw std::runtime_error("snapshot write failed: " + path);
}

SystemState load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    char header[64];
    in.read(header, 64);
    if (in.gcount() != 64) throw std::runtime_error("snapshot truncated (header): " + path);
    if (std::memcmp(header, kMagic, 8) != 0)
        throw std::runtime_error("snapshot magic mismatch (not an MPSNAP01 file): " + path);

    std::uint32_t n, N;
    std::uint64_t phi_count, vec_count;
    double L;
    std::memcpy(&n, header + 8, 4);
    std::memcpy(&N, header + 12, 4);
    std::memcpy(&phi_count, header + 16, 8);
    std::memcpy(&vec_count, header + 24, 8);
    std::memcpy(&L, header + 32, 8);
    const bool dealias = header[40] != 0;

    if (N != 1 && N != 2) throw std::runtime_error("snapshot: invalid electron count");
    GridPtr grid = make_grid(L, static_cast<int>(n), dealias);
    if (vec_count != grid->n3()) throw std::runtime_error("snapshot: dimension mismatch");

    SystemState s;
    s.phi = SpinorField(grid, static_cast<int>(N));
    if (phi_count != s.phi.v.size()) throw std::runtime_error("snapshot: dimension mismatch");
    s.phi.antisymmetric = header[41] != 0;
    in.read(reinterpret_cast<char*>(s.phi.v.data()),
            static_cast<std::streamsize>(phi_count * sizeof(cplx)));
    s.A = VectorField(grid);
    s.Adot = VectorField(grid);
    for (auto* field : {&s.A, &s.Adot})
        for (int d = 0; d < 3; ++d)
            in.read(reinterpret_cast<char*>(field->c[d].data()),
                    static_cast<std::streamsize>(vec_count * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot truncated (payload): " + path);
    s.A.divergence_free = s.Adot.divergence_free = true;

    std::string line;
    std::getline(in, line);  // consume remainder of binary line boundary, if any
    std::map<std::string, std::string> meta;
    std::stringstream rest;
    rest << line << "\n" << in.rdbuf();
    while (std::getline(rest, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const std::string& k) {
        auto it = meta.find(k);
        if (it == meta.end())
            throw std::runtime_error("snapshot metadata missing '" + k + "': " + path);
        return it->second;
    };
    s.t = std::stod(need("t"));
    s.eps = std::stod(need("eps"));
    s.alpha = std::stod(need("alpha"));
    s.softening = std::stod(need("softening"));
    const int K = std::stoi(need("K"));
    for (int j = 1; j <= K; ++j) {
        std::stringstream rs(need("R" + std::to_string(j)));
        std::array<double, 3> R{};
        rs >> R[0] >> R[1] >> R[2];
        s.nuclei.R.push_back(R);
        s.nuclei.Z.push_back(std::stod(need("Z" + std::to_string(j))));
    }
    return s;
}

std::string ledger_csv(const EnergyLedger& ledger) {
    std::string out = kLedgerHeader;
    out += "\n";
    for (const auto& r : ledger.rows) {
        out += fmt17(r.t) + ", " + fmt17(r.charge) + ", " + fmt17(r.T) + ", " +
               fmt17(r.V) + ", " + fmt17(r.F) + ", " + fmt17(r.E) + ", " +
               fmt17(r.var_H) + ", " + fmt17(r.diss_integral) + ", " +
               std::to_string(r.picard_iters) + ", " + fmt17(r.contraction_ratio) + "\n";
    }
    return out;
}

void write_ledger_csv(const EnergyLedger& ledger, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open ledger for writing: " + path);
    out << ledger_csv(ledger);
}

EnergyLedger read_ledger_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ledger: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != kLedgerHeader)
        throw std::runtime_error("ledger header mismatch: " + path);
    EnergyLedger ledger;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (cells.size() != 10) throw std::runtime_error("ledger row malformed: " + line);
        LedgerRow r;
        r.t = std::stod(cells[0]);
        r.charge = std::stod(cells[1]);
        r.T = std::stod(cells[2]);
        r.V = std::stod(cells[3]);
        r.F = std::stod(cells[4]);
        r.E = std::stod(cells[5]);
        r.var_H = std::stod(cells[6]);
        r.diss_integral = std::stod(cells[7]);
        r.picard_iters = std::stoi(cells[8]);
        r.contraction_ratio = std::stod(cells[9]);
        ledger.rows.push_back(r);
    }
    return ledger;
}

namespace {

json state_hashes(const SystemState& s) {
    json h;
    h["phi"] = fnv1a(s.phi.v.data(), s.phi.v.size() * sizeof(cplx));
    h["A"] = fnv1a(s.A.c[0].data(), s.A.c[0].size() * sizeof(double)) ^
             fnv1a(s.A.c[1].data(), s.A.c[1].size() * sizeof(double)) ^
             fnv1a(s.A.c[2].data(), s.A.c[2].size() * sizeof(double));
    h["Adot"] = fnv1a(s.Adot.c[0].data(), s.Adot.c[0].size() * sizeof(double)) ^
                fnv1a(s.Adot.c[1].data(), s.Adot.c[1].size() * sizeof(double)) ^
                fnv1a(s.Adot.c[2].data(), s.Adot.c[2].size() * sizeof(double));
    return h;
}

json stability_json(const StabilityReport& r) {
    return json{{"pass", r.pass}, {"exempt", r.exempt}, {"detail", r.detail}};
}

}  // namespace

int command_run(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = cfg.source_text;
    manifest["started_at"] = timestamp();
    manifest["stability_hypothesis"] = stability_json(cfg.stability);
    if (!cfg.stability.pass && !quiet)
        std::fprintf(stderr, "warning: stability hypothesis not satisfied (%s)\n",
                     cfg.stability.detail.c_str());

    const auto finish = [&](const std::string& status, int code) {
        manifest["finished_at"] = timestamp();
        manifest["status"] = status;
        std::ofstream mf(out_dir + "/manifest.json");
        mf << manifest.dump(2) << "\n";
        return code;
    };

    SystemState initial;
    try {
        initial = build_initial_state(cfg);
        enforce_gauge(initial);
    } catch (const std::exception& e) {
        manifest["error"] = e.what();
        if (!quiet) std::fprintf(stderr, "error: %s\n", e.what());
        return finish("failed:initial_state", 2);
    }
    manifest["initial_hashes"] = state_hashes(initial);

    int step_idx = 0;
    StepCallback cb;
    if (cfg.snapshot_every > 0) {
        cb = [&](const SystemState& s, const LedgerRow&) {
            if (step_idx % cfg.snapshot_every == 0) {
                char name[64];
                std::snprintf(name, sizeof(name), "snap_%06d.bin", step_idx);
                persist_snapshot(s, out_dir + "/" + name);
            }
            ++step_idx;
        };
    }

    RunResult rr = run(std::move(initial), cfg.T_final, step_config(cfg), cb);
    write_ledger_csv(rr.ledger, out_dir + "/ledger.csv");
    persist_snapshot(rr.final_state, out_dir + "/final.bin");

    const AuditReport audit = dissipation_audit(rr.ledger, cfg.eps);
    manifest["audit"] = {{"E0", audit.E0},
                         {"max_defect", audit.max_defect},
                         {"max_charge_dev", audit.max_charge_dev},
                         {"max_energy_increase", audit.max_energy_increase},
                         {"charge_tracked", audit.charge_tracked}};
    manifest["h_final"] = rr.h_final;
    manifest["steps"] = rr.ledger.rows.size() - 1;

    if (!rr.completed) {
        if (!quiet)
            std::fprintf(stderr, "run failed at stage %s (t = %.6g)\n",
                         rr.failure_stage.c_str(), rr.final_state.t);
        return finish("failed:" + rr.failure_stage, 3);
    }

    const double defect_tol = 1e-6 * std::max(1.0, std::fabs(audit.E0));
    const bool audit_ok = audit.max_defect <= defect_tol &&
                          (!audit.charge_tracked || audit.max_charge_dev <= 1e-6);
    if (!quiet)
        std::printf("completed %zu steps; defect %.3e charge dev %.3e (%s)\n",
                    rr.ledger.rows.size() - 1, audit.max_defect, audit.max_charge_dev,
                    audit_ok ? "audit ok" : "audit FAILED");
    return finish(audit_ok ? "completed" : "completed:audit_failed", audit_ok ? 0 : 4);
}

int command_continuation(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    if (cfg.continuation_eps.empty()) {
        if (!quiet) std::fprintf(stderr, "error: [continuation] eps_list is empty\n");
        return 2;
    }
    SystemState initial = build_initial_state(cfg);
    enforce_gauge(initial);
    const ContinuationTable table =
        epsilon_continuation(initial, cfg.continuation_eps, cfg.T_final, step_config(cfg));

    std::ofstream out(out_dir + "/continuation.csv");
    out << "eps, ok, D_to_prev, max_grad_phi, max_F, max_A_growth\n";
    bool all_ok = true;
    for (std::size_t i = 0; i < table.members.size(); ++i) {
        const auto& m = table.members[i];
        all_ok = all_ok && m.ok;
        out << fmt17(m.eps) << ", " << (m.ok ? 1 : 0) << ", "
            << (i == 0 ? std::string("") : fmt17(table.D[i - 1])) << ", "
            << fmt17(m.max_grad_phi) << ", " << fmt17(m.max_F) << ", "
            << fmt17(m.max_A_growth) << "\n";
    }
    all_ok = all_ok && table.members.size() == cfg.continuation_eps.size();
    if (!quiet)
        std::printf("continuation: %zu/%zu members completed\n", table.members.size(),
                    cfg.continuation_eps.size());
    return all_ok ? 0 : 3;
}

int command_zero_mode(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    GridPtr grid = make_grid(cfg.L, cfg.n, cfg.dealias);

    ZeroModeCandidate cand = loss_yau_pair(grid);
    if (cfg.zm_optimize)
        cand = variational_zero_mode(std::move(cand), cfg.zm_iterations, cfg.zm_learning_rate);

    const double zc = zc_functional(cand.psi, cand.A, cfg.alpha);
    std::vector<double> zs = cfg.zeromode_Z;
    if (zs.empty()) zs = {0.0, zc / 2, zc, 2 * zc};

    std::ofstream out(out_dir + "/zeromode.txt");
    out << "residual = " << fmt17(cand.residual)
        << (cand.within_tolerance ? "  (within 1e-3)" : "  (ABOVE the 1e-3 gate)") << "\n";
    out << "zc = " << fmt17(zc) << "\n";
    out << "Z, slope, direction\n";
    for (double Z : zs) {
        const double slope = one_body_energy_slope(cand, Z, cfg.alpha);
        out << fmt17(Z) << ", " << fmt17(slope) << ", "
            << (slope > 0 ? "bound" : (slope < 0 ? "collapse" : "critical")) << "\n";
    }
    if (!quiet)
        std::printf("zero mode: residual %.6e, zc %.6g\n", cand.residual, zc);
    return 0;  // exploratory command; gate failures are reported, not fatal
}

int command_audit(const std::string& ledger_path, bool quiet) {
    EnergyLedger ledger;
    try {
        ledger = read_ledger_csv(ledger_path);
    } catch (const std::exception& e) {
        if (!quiet) std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    if (ledger.rows.empty()) {
        if (!quiet) std::fprintf(stderr, "error: empty ledger\n");
        return 2;
    }
    const AuditReport rep = dissipation_audit(ledger, 0.0);
    const double defect_tol = 1e-6 * std::max(1.0, std::fabs(rep.E0));
    const bool ok = rep.max_defect <= defect_tol;
    if (!quiet) {
        std::printf("E0 = %s\n", fmt17(rep.E0).c_str());
        std::printf("max |E + diss - E0| = %.6e (tol %.1e)\n", rep.max_defect, defect_tol);
        std::printf("max charge deviation = %.6e\n", rep.max_charge_dev);
        std::printf("max per-step energy increase = %.6e\n", rep.max_energy_increase);
        std::printf("%s\n", ok ? "AUDIT PASS" : "AUDIT FAIL");
    }
    return ok ? 0 : 1;
}

}  // namespace mp
