// dickeband — transform star-coupled Dicke systems to band form and simulate
// them exactly or with MPS/TEBD.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "dickeband/pipeline.hpp"

namespace {

using dickeband::pipeline::RunConfig;

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed{0};
    int nf{0};
    double dt{0.0};
    std::int64_t steps{0};
    int chi_max{0};
    double cutoff{0.0};
    bool quiet{false};
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
    auto* opt = cmd->add_option("--config", flags.config_path, "run config JSON");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "random seed recorded in the manifest");
    cmd->add_option("--nf", flags.nf, "Fock states per mode");
    cmd->add_option("--dt", flags.dt, "time step (units of 1/omega_a)");
    cmd->add_option("--steps", flags.steps, "number of time steps");
    cmd->add_option("--chi-max", flags.chi_max, "MPS bond-dimension cap");
    cmd->add_option("--cutoff", flags.cutoff, "truncation discarded-weight cutoff");
    cmd->add_flag("--quiet", flags.quiet, "suppress progress output");
}

RunConfig load_config(const CommonFlags& flags, const std::string& mode) {
    RunConfig config = RunConfig::from_json_file(flags.config_path);
    config.mode = mode;
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (flags.seed != 0) config.seed = flags.seed;
    if (flags.nf >= 2) config.nf = flags.nf;
    if (flags.dt > 0.0) config.dt = flags.dt;
    if (flags.steps > 0) config.steps = flags.steps;
    if (flags.chi_max > 0) config.chi_max = flags.chi_max;
    if (flags.cutoff > 0.0) config.cutoff = flags.cutoff;
    if (flags.quiet) config.quiet = true;
    return config;
}

RunConfig overrides_only(const CommonFlags& flags) {
    RunConfig c;
    c.out_dir = flags.out_dir;
    c.seed = flags.seed;
    c.nf = flags.nf;
    c.dt = flags.dt;
    c.steps = flags.steps;
    c.chi_max = flags.chi_max;
    c.cutoff = flags.cutoff;
    c.quiet = flags.quiet;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupling-matrix band reduction and simulation of few-atom "
                 "multimode Dicke systems"};
    app.require_subcommand(1);

    CommonFlags transform_flags, exact_flags, mps_flags, compare_flags, repro_flags;
    std::string preset;

    auto* cmd_transform = app.add_subcommand(
        "transform", "band-reduce a system spec; writes M_D, M_B, Q and a report");
    add_common(cmd_transform, transform_flags, true);

    auto* cmd_exact = app.add_subcommand(
        "exact", "exact RK4 evolution of the Dicke or band Hamiltonian");
    add_common(cmd_exact, exact_flags, true);

    auto* cmd_mps = app.add_subcommand("mps", "TEBD evolution of the band Hamiltonian");
    add_common(cmd_mps, mps_flags, true);

    auto* cmd_compare = app.add_subcommand(
        "compare", "exact Dicke vs band runs on a shared grid, diffed");
    add_common(cmd_compare, compare_flags, true);

    auto* cmd_repro = app.add_subcommand(
        "repro", "figure-reproduction presets (fig4, fig5, fig7-psi1/2/3)");
    cmd_repro->add_option("preset", preset, "preset name")->required();
    add_common(cmd_repro, repro_flags, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_transform->parsed())
            return dickeband::pipeline::run_transform(
                load_config(transform_flags, "transform"));
        if (cmd_exact->parsed())
            return dickeband::pipeline::run_exact(load_config(exact_flags, "exact"));
        if (cmd_mps->parsed())
            return dickeband::pipeline::run_mps(load_config(mps_flags, "mps"));
        if (cmd_compare->parsed())
            return dickeband::pipeline::run_compare(
                load_config(compare_flags, "compare"));
        if (cmd_repro->parsed())
            return dickeband::pipeline::run_reproduction_suite(
                preset, overrides_only(repro_flags));
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return dickeband::pipeline::kInvalidConfig;
    } catch (const std::exception& e) {
        const std::string what = e.what();
        if (what.find("cap") != std::string::npos ||
            what.find("dimension") != std::string::npos) {
            std::fprintf(stderr, "resource cap: %s\n", e.what());
            return dickeband::pipeline::kResourceCap;
        }
        std::fprintf(stderr, "error: %s\n", e.what());
        return dickeband::pipeline::kComparisonFailed;
    }
    return dickeband::pipeline::kInvalidConfig;
}
