// pipeline.hpp — end-to-end runs: spec ingestion, transformation, exact and
// MPS simulation, trajectory comparison, and the figure-reproduction presets.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dickeband/csv.hpp"
#include "dickeband/exact.hpp"
#include "dickeband/model.hpp"
#include "dickeband/mps.hpp"

namespace dickeband::pipeline {

// exit codes per the CLI contract
enum ExitCode : int {
    kOk = 0,
    kComparisonFailed = 1,
    kInvalidConfig = 2,
    kResourceCap = 3,
};

struct RunConfig {
    model::SystemSpec spec;
    std::string mode;                        // transform | exact | mps | compare
    std::string hamiltonian{"dicke"};        // dicke | band
    std::string initial_state{"all_excited"};  // psi1|psi2|psi3|all_excited
    int nf{6};
    double dt{0.0};          // 0 -> module default
    std::int64_t steps{0};   // 0 -> derived from periods
    double periods{0.0};     // simulated time in units of 2*pi/omega_{a,1}
    std::int64_t stride{1};
    std::int64_t correlation_stride{0};
    int position_samples{0};  // field-correlation grid size (0 disables)
    int chi_max{128};
    double cutoff{1e-10};
    std::string atom_gates{"per_atom"};  // per_atom | merged
    std::uint64_t seed{0};
    std::string out_dir{"out"};
    bool quiet{false};
    double compare_tolerance{1e-6};

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json(const std::string& text);
    std::string resolved_json() const;  // defaults expanded, for the manifest
};

// dt defaults: exact 2*pi/(omega_max*200), mps 2*pi/(omega_max*100)
double default_exact_dt(const model::SystemSpec& spec);
double default_mps_dt(const model::SystemSpec& spec);

struct Trajectory {
    io::Table table;  // time plus named observable columns
};

struct ComparisonReport {
    struct Entry {
        std::string observable;
        double max_abs{0.0};
        double rms{0.0};
    };
    std::vector<Entry> entries;
    double tolerance{0.0};
    bool pass{false};

    std::string to_json() const;
    std::string summary() const;
};

// Diffs shared columns of two trajectories on an identical time grid.
ComparisonReport compare_trajectories(const io::Table& a, const io::Table& b,
                                      double tolerance);

// transform: writes M_D.csv, M_B.csv, Q.csv and transform_report.json.
int run_transform(const RunConfig& config);

// exact: writes trajectory CSV (time, populations, components, energy, norm).
int run_exact(const RunConfig& config);
io::Table exact_trajectory(const RunConfig& config);

// mps: writes the time-series CSV, correlation-map CSV, run-manifest JSON.
int run_mps(const RunConfig& config);
io::Table mps_trajectory(const RunConfig& config, std::string* manifest_json = nullptr,
                         io::Table* correlation = nullptr);

// compare: two sub-runs, dicke vs band by default.
int run_compare(const RunConfig& config);

// repro presets: fig4 | fig5 | fig7-psi1 | fig7-psi2 | fig7-psi3
int run_reproduction_suite(const std::string& preset, const RunConfig& overrides);

// preset configurations (documented defaults, one auditable place)
RunConfig fig4_config();
RunConfig fig5_config();
RunConfig fig7_config(const std::string& initial_state);

void write_manifest(const RunConfig& config, const std::string& path,
                    double wall_seconds, const std::string& extra_json = "{}");

std::string tool_version();

}  // namespace dickeband::pipeline
