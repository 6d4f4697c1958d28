#pragma once

#include <string>

#include "mp/evolve.hpp"
#include "mp/zeromode.hpp"

namespace mp {

struct RunConfig {
    // [grid]
    double L = 8.0;
    int n = 16;
    bool dealias = true;
    // [physics]
    double alpha = 0.06;
    double eps = 0.05;
    int N = 1;
    NuclearConfig nuclei;
    double softening = 0.0;
    // [initial]
    std::string preset = "gaussian-packet";
    std::string snapshot_path;
    std::uint64_t seed = 0;
    double width = 4.5;      // gaussian-packet: exp(-r^2 / width)
    double amplitude = 0.2;  // second spin component weight
    // [stepping]
    double h = 1e-3;
    double T_final = 0.1;
    double tol_p = 1e-10;
    int max_picard = 25;
    bool evolve_field = true;
    // [output]
    int snapshot_every = 0;  // steps between snapshots, 0 = none
    std::string output_dir = ".";
    // [continuation]
    std::vector<double> continuation_eps;
    // [zeromode]
    std::vector<double> zeromode_Z;
    bool zm_optimize = false;
    int zm_iterations = 50;
    double zm_learning_rate = 1e-2;

    std::string source_text;  // raw config file contents (echoed in manifests)
    StabilityReport stability;
};

// Strict parser for the flat sectioned key-value format; unknown or
// duplicate keys and malformed values raise std::runtime_error with the
// offending line.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Builds the initial state for the configured preset (gaussian-packet,
// plane-wave, loss-yau-seed, random, snapshot); fields are projected
// divergence-free.
SystemState build_initial_state(const RunConfig& cfg);

StepConfig step_config(const RunConfig& cfg);

// Binary field container: 64-byte header (magic "MPSNAP01", grid dims,
// electron count, payload sizes), little-endian f64 payload in the order
// phi, A, Adot, then a text metadata block. Round-trips are bit-exact.
void persist_snapshot(const SystemState& s, const std::string& path);
SystemState load_snapshot(const std::string& path);

// Fixed-header CSV with 17-significant-digit values; byte-identical for
// identical config + seed regardless of MP_THREADS.
std::string ledger_csv(const EnergyLedger& ledger);
void write_ledger_csv(const EnergyLedger& ledger, const std::string& path);
EnergyLedger read_ledger_csv(const std::string& path);

// Command entry points behind the `mp` tool; each returns a process exit
// status and writes its outputs under out_dir.
int command_run(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int command_continuation(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int command_zero_mode(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int command_audit(const std::string& ledger_path, bool quiet);

}  // namespace mp
