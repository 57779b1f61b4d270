#include "dickeband/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "dickeband/svg.hpp"
#include "dickeband/transform.hpp"

namespace dickeband::pipeline {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

void ensure_dir(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

mps::InitialState parse_initial_state(const std::string& name) {
    if (name == "psi1") return mps::InitialState::Psi1;
    if (name == "psi2") return mps::InitialState::Psi2;
    if (name == "psi3") return mps::InitialState::Psi3;
    if (name == "all_excited") return mps::InitialState::AllExcited;
    throw std::invalid_argument("unknown initial state: " + name);
}

exact::StateVector initial_statevector(const std::string& name,
                                       const exact::HilbertSpaceLayout& layout) {
    const mps::MPS m = mps::init_product_mps(layout, parse_initial_state(name));
    exact::StateVector psi;
    psi.amplitudes = mps::to_statevector(m);
    return psi;
}

std::vector<double> position_grid(int samples) {
    std::vector<double> grid(samples);
    for (int i = 0; i < samples; ++i)
        grid[i] = -0.5 + static_cast<double>(i) / (samples - 1);
    return grid;
}

}  // namespace

std::string tool_version() { return "dickeband 0.1.0"; }

double default_exact_dt(const model::SystemSpec& spec) {
    return kTwoPi / (spec.mode_frequencies(spec.mode_count() - 1) * 200.0);
}

double default_mps_dt(const model::SystemSpec& spec) {
    return kTwoPi / (spec.mode_frequencies(spec.mode_count() - 1) * 100.0);
}

// -------------------------------------------------------------------- config

RunConfig RunConfig::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    RunConfig c;
    if (j.contains("spec_path"))
        c.spec = model::SystemSpec::from_json(
            io::read_text_file(j.at("spec_path").get<std::string>()));
    else if (j.contains("spec"))
        c.spec = model::SystemSpec::from_json(j.at("spec").dump());
    else
        throw std::invalid_argument("config: need 'spec' or 'spec_path'");

    c.mode = j.value("mode", std::string("transform"));
    c.hamiltonian = j.value("hamiltonian", std::string("dicke"));
    c.initial_state = j.value("initial_state", std::string("all_excited"));
    c.nf = j.value("nf", 6);
    c.dt = j.value("dt", 0.0);
    c.steps = j.value("steps", std::int64_t{0});
    c.periods = j.value("periods", 0.0);
    c.stride = j.value("stride", std::int64_t{1});
    c.correlation_stride = j.value("correlation_stride", std::int64_t{0});
    c.position_samples = j.value("position_samples", 0);
    c.chi_max = j.value("chi_max", 128);
    c.cutoff = j.value("cutoff", 1e-10);
    c.atom_gates = j.value("atom_gates", std::string("per_atom"));
    c.seed = j.value("seed", std::uint64_t{0});
    c.out_dir = j.value("out_dir", std::string("out"));
    c.quiet = j.value("quiet", false);
    c.compare_tolerance = j.value("compare_tolerance", 1e-6);

    if (c.nf < 2 || c.stride < 1 || c.chi_max < 1 || c.cutoff < 0.0 || c.dt < 0.0 ||
        c.steps < 0)
        throw std::invalid_argument("config: numeric field out of range");
    return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    return from_json(io::read_text_file(path));
}

std::string RunConfig::resolved_json() const {
    nlohmann::json j;
    j["spec"] = nlohmann::json::parse(spec.to_json());
    j["mode"] = mode;
    j["hamiltonian"] = hamiltonian;
    j["initial_state"] = initial_state;
    j["nf"] = nf;
    j["dt"] = dt;
    j["steps"] = steps;
    j["periods"] = periods;
    j["stride"] = stride;
    j["correlation_stride"] = correlation_stride;
    j["position_samples"] = position_samples;
    j["chi_max"] = chi_max;
    j["cutoff"] = cutoff;
    j["atom_gates"] = atom_gates;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["compare_tolerance"] = compare_tolerance;
    return j.dump(2);
}

// ---------------------------------------------------------------- comparison

ComparisonReport compare_trajectories(const io::Table& a, const io::Table& b,
                                      double tolerance) {
    if (a.columns != b.columns)
        throw std::invalid_argument("compare: column sets differ");
    if (a.rows.size() != b.rows.size())
        throw std::invalid_argument("compare: time grids differ in length");
    ComparisonReport report;
    report.tolerance = tolerance;

    // column 0 is time; it must match exactly
    for (std::size_t r = 0; r < a.rows.size(); ++r)
        if (a.rows[r][0] != b.rows[r][0])
            throw std::invalid_argument("compare: time grids differ at row " +
                                        std::to_string(r));

    bool pass = true;
    for (std::size_t c = 1; c < a.columns.size(); ++c) {
        ComparisonReport::Entry e;
        e.observable = a.columns[c];
        double sq = 0.0;
        for (std::size_t r = 0; r < a.rows.size(); ++r) {
            const double d = std::abs(a.rows[r][c] - b.rows[r][c]);
            e.max_abs = std::max(e.max_abs, d);
            sq += d * d;
        }
        e.rms = a.rows.empty() ? 0.0 : std::sqrt(sq / a.rows.size());
        pass = pass && e.max_abs <= tolerance;
        report.entries.push_back(e);
    }
    report.pass = pass;
    return report;
}

std::string ComparisonReport::to_json() const {
    nlohmann::json j;
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    for (const auto& e : entries)
        j["observables"].push_back(
            {{"name", e.observable}, {"max_abs", e.max_abs}, {"rms", e.rms}});
    return j.dump(2);
}

std::string ComparisonReport::summary() const {
    std::string out = pass ? "PASS" : "FAIL";
    out += " (tolerance " + io::format_full(tolerance) + ")\n";
    for (const auto& e : entries)
        out += "  " + e.observable + ": max " + io::format_full(e.max_abs) + ", rms " +
               io::format_full(e.rms) + "\n";
    return out;
}

// ----------------------------------------------------------------- transform

int run_transform(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ensure_dir(config.out_dir);
    const auto dicke = model::assemble_dicke_matrix(config.spec);
    auto reduction = transform::band_reduce(dicke);

    io::write_text_file(config.out_dir + "/M_D.csv",
                        model::matrix_to_csv(dicke.matrix()));
    io::write_text_file(config.out_dir + "/M_B.csv",
                        model::matrix_to_csv(reduction.band.matrix()));
    io::write_text_file(config.out_dir + "/Q.csv",
                        model::matrix_to_csv(reduction.record.q));

    const auto band_report = transform::validate_band_structure(reduction.band);
    const Eigen::VectorXd spec_d = transform::symmetric_spectrum(dicke.matrix());
    const Eigen::VectorXd spec_b =
        transform::symmetric_spectrum(reduction.band.matrix());
    const double spectrum_deviation = (spec_d - spec_b).cwiseAbs().maxCoeff();

    nlohmann::json j;
    j["bandwidth_check"] = {{"max_outside_band", band_report.max_outside_band},
                            {"max_asymmetry", band_report.max_asymmetry},
                            {"atom_block_deviation", band_report.atom_block_deviation},
                            {"tolerance", band_report.tolerance},
                            {"pass", band_report.pass}};
    j["orthogonality_residual"] = reduction.record.orthogonality_residual();
    j["atom_block_residual"] = reduction.record.atom_block_deviation();
    j["spectrum_deviation"] = spectrum_deviation;
    j["degenerate"] = reduction.record.degenerate;
    j["householder_steps"] =
        static_cast<int>(reduction.record.householder_vectors.size());
    io::write_text_file(config.out_dir + "/transform_report.json", j.dump(2));

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(config, config.out_dir + "/manifest.json", wall, j.dump());
    if (!config.quiet)
        std::printf("transform: offband %.3e, orthogonality %.3e, spectrum dev %.3e\n",
                    band_report.max_outside_band, j["orthogonality_residual"].get<double>(),
                    spectrum_deviation);
    return band_report.pass ? kOk : kComparisonFailed;
}

// --------------------------------------------------------------------- exact

io::Table exact_trajectory(const RunConfig& config) {
    const auto& spec = config.spec;
    const exact::HilbertSpaceLayout layout(spec.atom_count(), spec.mode_count(),
                                           config.nf);
    exact::SparseHamiltonian h =
        config.hamiltonian == "band"
            ? exact::build_band_hamiltonian(
                  transform::band_reduce(model::assemble_dicke_matrix(spec)).band,
                  layout)
            : exact::build_dicke_hamiltonian(spec, layout);

    exact::EvolveOptions opts;
    opts.dt = config.dt > 0.0 ? config.dt : default_exact_dt(spec);
    opts.steps = config.steps > 0
                     ? config.steps
                     : static_cast<std::int64_t>(
                           std::ceil(config.periods * kTwoPi / opts.dt));
    opts.stride = config.stride;

    const exact::StateVector psi0 = initial_statevector(config.initial_state, layout);

    io::Table table;
    table.columns = {"time_over_atomic_period"};
    for (int jx = 0; jx < layout.atom_count; ++jx)
        table.columns.push_back("population_atom" + std::to_string(jx + 1));
    const bool comps = layout.atom_count == 2;
    if (comps)
        for (const char* n : {"comp_gg", "comp_ge", "comp_eg", "comp_ee"})
            table.columns.push_back(n);
    table.columns.push_back("energy");
    table.columns.push_back("norm");

    exact::evolve(h, psi0, opts, [&](const exact::StateVector& s) {
        std::vector<double> row;
        row.push_back(s.time / kTwoPi);
        for (int jx = 0; jx < layout.atom_count; ++jx)
            row.push_back(exact::atomic_population(s, layout, jx));
        if (comps) {
            const auto c = exact::two_atom_components(s, layout);
            row.insert(row.end(), c.begin(), c.end());
        }
        row.push_back(exact::energy_expectation(h, s));
        row.push_back(s.norm());
        table.append(std::move(row));
    });
    return table;
}

int run_exact(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ensure_dir(config.out_dir);
    const io::Table table = exact_trajectory(config);
    io::write_text_file(config.out_dir + "/exact_" + config.hamiltonian + ".csv",
                        io::to_csv(table));
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(config, config.out_dir + "/manifest.json", wall);
    if (!config.quiet)
        std::printf("exact %s: %zu samples written\n", config.hamiltonian.c_str(),
                    table.rows.size());
    return kOk;
}

// ----------------------------------------------------------------------- mps

io::Table mps_trajectory(const RunConfig& config, std::string* manifest_json,
                         io::Table* correlation_out) {
    const auto& spec = config.spec;
    const exact::HilbertSpaceLayout layout(spec.atom_count(), spec.mode_count(),
                                           config.nf);
    auto reduction = transform::band_reduce(model::assemble_dicke_matrix(spec));

    const double dt = config.dt > 0.0 ? config.dt : default_mps_dt(spec);
    const std::int64_t steps =
        config.steps > 0 ? config.steps
                         : static_cast<std::int64_t>(
                               std::ceil(config.periods * kTwoPi / dt));

    const auto mode = config.atom_gates == "merged" ? mps::AtomGateMode::MergedAtoms
                                                    : mps::AtomGateMode::PerAtom;
    const auto schedule =
        mps::build_gate_layers(reduction.band, layout, dt, mode);
    const auto compiled = mps::compile_schedule(schedule);

    mps::TruncationPolicy policy;
    policy.chi_max = config.chi_max;
    policy.cutoff = config.cutoff;

    mps::ObservableRequest request;
    request.stride = config.stride;
    request.correlation_stride = config.correlation_stride;
    if (config.position_samples > 1)
        request.positions = position_grid(config.position_samples);

    mps::MPS psi0 =
        mps::init_product_mps(layout, parse_initial_state(config.initial_state));
    const auto result =
        mps::tebd_run(psi0, compiled, policy, steps, request,
                      &reduction.record, &spec);

    io::Table table;
    table.columns = {"time_over_atomic_period"};
    for (int jx = 0; jx < layout.atom_count; ++jx)
        table.columns.push_back("population_atom" + std::to_string(jx + 1));
    if (layout.atom_count == 2)
        for (const char* n : {"comp_gg", "comp_ge", "comp_eg", "comp_ee"})
            table.columns.push_back(n);
    for (const char* n : {"entropy_bond1", "entropy_bond2", "norm",
                          "discarded_weight", "max_bond"})
        table.columns.push_back(n);
    for (const auto& pt : result.series) {
        std::vector<double> row;
        row.push_back(pt.t / kTwoPi);
        for (double p : pt.populations) row.push_back(p);
        if (layout.atom_count == 2)
            row.insert(row.end(), pt.components.begin(), pt.components.end());
        row.push_back(pt.entropy_bond1);
        row.push_back(pt.entropy_bond2);
        row.push_back(std::sqrt(pt.norm2));
        row.push_back(pt.cumulative_discarded);
        row.push_back(static_cast<double>(pt.max_bond));
        table.append(std::move(row));
    }

    if (correlation_out != nullptr && !result.correlation.times.empty()) {
        io::Table corr;
        corr.columns = {"time_over_atomic_period"};
        for (double x : result.correlation.positions)
            corr.columns.push_back("x_" + io::format_full(x));
        for (std::size_t r = 0; r < result.correlation.times.size(); ++r) {
            std::vector<double> row;
            row.push_back(result.correlation.times[r] / kTwoPi);
            for (int c = 0; c < result.correlation.values[r].size(); ++c)
                row.push_back(result.correlation.values[r](c));
            corr.append(std::move(row));
        }
        *correlation_out = std::move(corr);
    }

    if (manifest_json != nullptr) {
        nlohmann::json j;
        j["schedule"] = {{"layers", compiled.layers.size()},
                         {"dt", dt},
                         {"steps", steps},
                         {"max_mpo_bond", compiled.max_mpo_bond},
                         {"atom_gates", config.atom_gates}};
        j["max_bond_reached"] = result.max_bond_reached;
        j["cumulative_discarded_weight"] = policy.cumulative_discarded;
        j["truncations"] = policy.truncation_count;
        j["wall_seconds"] = result.wall_seconds;
        *manifest_json = j.dump(2);
    }
    return table;
}

int run_mps(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ensure_dir(config.out_dir);
    std::string extra;
    io::Table correlation;
    const io::Table table = mps_trajectory(config, &extra, &correlation);
    io::write_text_file(config.out_dir + "/mps_series.csv", io::to_csv(table));
    if (!correlation.columns.empty())
        io::write_text_file(config.out_dir + "/correlation_map.csv",
                            io::to_csv(correlation));
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(config, config.out_dir + "/manifest.json", wall, extra);
    if (!config.quiet)
        std::printf("mps: %zu samples written\n", table.rows.size());
    return kOk;
}

// ------------------------------------------------------------------- compare

int run_compare(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ensure_dir(config.out_dir);

    RunConfig a = config;
    a.hamiltonian = "dicke";
    RunConfig b = config;
    b.hamiltonian = "band";
    if (a.dt == 0.0) a.dt = default_exact_dt(config.spec);
    b.dt = a.dt;

    const io::Table ta = exact_trajectory(a);
    const io::Table tb = exact_trajectory(b);
    io::write_text_file(config.out_dir + "/exact_dicke.csv", io::to_csv(ta));
    io::write_text_file(config.out_dir + "/exact_band.csv", io::to_csv(tb));

    // energies legitimately differ between the two forms only through
    // truncation; both are compared anyway and reported per observable.
    const auto report = compare_trajectories(ta, tb, config.compare_tolerance);
    io::write_text_file(config.out_dir + "/comparison.json", report.to_json());
    if (!config.quiet) std::fputs(report.summary().c_str(), stdout);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(config, config.out_dir + "/manifest.json", wall, report.to_json());
    return report.pass ? kOk : kComparisonFailed;
}

// ------------------------------------------------------------------- presets

RunConfig fig4_config() {
    RunConfig c;
    c.spec = model::build_periodic_lattice_spec(50, 1.0);
    c.mode = "transform";
    c.out_dir = "out/fig4";
    return c;
}

RunConfig fig5_config() {
    RunConfig c;
    c.spec = model::build_pec_cavity_spec({0.0, 0.25, -0.375}, 5,
                                          model::HarmonicRule::All,
                                          model::CouplingAnchor::pair_ratio(0, 0, 0.25));
    c.mode = "compare";
    c.initial_state = "all_excited";
    c.nf = 6;
    c.periods = 3.0;
    c.stride = 25;
    c.compare_tolerance = 1e-6;
    c.out_dir = "out/fig5";
    return c;
}

RunConfig fig7_config(const std::string& initial_state) {
    RunConfig c;
    c.spec = model::build_pec_cavity_spec({-0.25, 0.25}, 30, model::HarmonicRule::Odd,
                                          model::CouplingAnchor::max_ratio(0.1));
    c.mode = "mps";
    c.initial_state = initial_state;
    c.nf = 8;
    c.periods = 5.0;
    // dt, stride, chi and cutoff pinned by the preset (convergence-audited)
    c.dt = kTwoPi / (c.spec.mode_frequencies(29) * 40.0);
    c.stride = 25;
    c.correlation_stride = 100;
    c.position_samples = 61;
    c.chi_max = 128;
    c.cutoff = 1e-12;
    c.atom_gates = "merged";
    c.out_dir = "out/fig7-" + initial_state;
    return c;
}

namespace {

int repro_fig4(const RunConfig& overrides) {
    RunConfig config = fig4_config();
    config.out_dir = overrides.out_dir.empty() ? config.out_dir : overrides.out_dir;
    config.quiet = overrides.quiet;
    ensure_dir(config.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    const auto dicke = model::assemble_dicke_matrix(config.spec);
    const auto reduction = transform::band_reduce(dicke);
    const auto cmt = transform::chain_coefficients(reduction.band);
    const auto lanczos = transform::lanczos_chain_map_oracle(dicke);

    double worst = 0.0;
    io::Table table;
    table.columns = {"n", "xi_cmt", "xi_lanczos", "t_cmt", "t_lanczos"};
    for (int n = 0; n < cmt.site_frequencies.size(); ++n) {
        const double t_c = n < cmt.hoppings.size() ? cmt.hoppings(n) : 0.0;
        const double t_l = n < lanczos.hoppings.size() ? lanczos.hoppings(n) : 0.0;
        table.append({static_cast<double>(n + 1), cmt.site_frequencies(n),
                      lanczos.site_frequencies(n), t_c, t_l});
        worst = std::max(worst, std::abs(cmt.site_frequencies(n) -
                                         lanczos.site_frequencies(n)) /
                                    std::abs(lanczos.site_frequencies(n)));
        if (n < cmt.hoppings.size())
            worst = std::max(worst, std::abs(t_c - t_l) / std::abs(t_l));
    }
    io::write_text_file(config.out_dir + "/chain_coefficients.csv",
                        io::to_csv(table));

    io::Series xi_c{"xi (CMT)", {}, {}, true}, xi_l{"xi (Lanczos)", {}, {}, false};
    io::Series t_c{"t (CMT)", {}, {}, true}, t_l{"t (Lanczos)", {}, {}, false};
    for (const auto& row : table.rows) {
        xi_c.x.push_back(row[0]);
        xi_c.y.push_back(row[1]);
        xi_l.x.push_back(row[0]);
        xi_l.y.push_back(row[2]);
        if (row[0] < static_cast<double>(table.rows.size())) {
            t_c.x.push_back(row[0]);
            t_c.y.push_back(row[3]);
            t_l.x.push_back(row[0]);
            t_l.y.push_back(row[4]);
        }
    }
    io::PlotStyle style;
    style.title = "Chain coefficients: coupling-matrix transformation vs Lanczos";
    style.xlabel = "site n";
    style.ylabel = "coefficient (units of omega_a)";
    io::write_text_file(config.out_dir + "/fig4.svg",
                        io::render_line_plot({xi_c, xi_l, t_c, t_l}, style));

    nlohmann::json j;
    j["max_relative_deviation"] = worst;
    j["tolerance"] = 1e-8;
    j["pass"] = worst <= 1e-8;
    io::write_text_file(config.out_dir + "/report.json", j.dump(2));
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(config, config.out_dir + "/manifest.json", wall, j.dump());
    if (!config.quiet)
        std::printf("fig4: max relative deviation %.3e -> %s\n", worst,
                    worst <= 1e-8 ? "PASS" : "FAIL");
    return worst <= 1e-8 ? kOk : kComparisonFailed;
}

int repro_fig5(const RunConfig& overrides) {
    RunConfig config = fig5_config();
    config.out_dir = overrides.out_dir.empty() ? config.out_dir : overrides.out_dir;
    config.quiet = overrides.quiet;
    if (overrides.nf >= 2) config.nf = overrides.nf;
    ensure_dir(config.out_dir);

    const int code = run_compare(config);

    // overlay plot from the two trajectories
    const io::Table ta =
        io::parse_csv(io::read_text_file(config.out_dir + "/exact_dicke.csv"));
    const io::Table tb =
        io::parse_csv(io::read_text_file(config.out_dir + "/exact_band.csv"));
    std::vector<io::Series> series;
    for (int atom = 0; atom < 3; ++atom) {
        io::Series sd{"atom " + std::to_string(atom + 1) + " (Dicke)", {}, {}, false};
        io::Series sb{"atom " + std::to_string(atom + 1) + " (band)", {}, {}, false};
        for (const auto& row : ta.rows) {
            sd.x.push_back(row[0]);
            sd.y.push_back(row[1 + atom]);
        }
        for (const auto& row : tb.rows) {
            sb.x.push_back(row[0]);
            sb.y.push_back(row[1 + atom]);
        }
        series.push_back(std::move(sd));
        series.push_back(std::move(sb));
    }
    io::PlotStyle style;
    style.title = "3-atom / 5-mode populations: Dicke vs band Hamiltonian";
    style.xlabel = "t / (2 pi / omega_a)";
    style.ylabel = "excited-state population";
    io::write_text_file(config.out_dir + "/fig5.svg",
                        io::render_line_plot(series, style));
    return code;
}

int repro_fig7(const std::string& initial_state, const RunConfig& overrides) {
    RunConfig config = fig7_config(initial_state);
    config.out_dir = overrides.out_dir.empty() ? config.out_dir : overrides.out_dir;
    config.quiet = overrides.quiet;
    if (overrides.chi_max > 0) config.chi_max = overrides.chi_max;
    if (overrides.steps > 0) config.steps = overrides.steps;
    if (overrides.dt > 0.0) config.dt = overrides.dt;
    if (overrides.cutoff > 0.0) config.cutoff = overrides.cutoff;
    ensure_dir(config.out_dir);

    const int code = run_mps(config);

    const io::Table series =
        io::parse_csv(io::read_text_file(config.out_dir + "/mps_series.csv"));
    auto col = [&](const std::string& name) {
        for (std::size_t c = 0; c < series.columns.size(); ++c)
            if (series.columns[c] == name) return c;
        throw std::logic_error("missing column " + name);
    };

    auto line = [&](const std::vector<std::string>& names, const std::string& title,
                    const std::string& ylabel, const std::string& file) {
        std::vector<io::Series> ss;
        for (const auto& name : names) {
            io::Series s{name, {}, {}, false};
            const std::size_t c = col(name);
            for (const auto& row : series.rows) {
                s.x.push_back(row[0]);
                s.y.push_back(row[c]);
            }
            ss.push_back(std::move(s));
        }
        io::PlotStyle style;
        style.title = title;
        style.xlabel = "t / (2 pi / omega_a)";
        style.ylabel = ylabel;
        io::write_text_file(config.out_dir + "/" + file,
                            io::render_line_plot(ss, style));
    };
    line({"population_atom1", "population_atom2"},
         "Atomic populations (" + initial_state + ")", "population",
         "populations.svg");
    line({"comp_gg", "comp_ge", "comp_eg", "comp_ee"},
         "Two-atom components (" + initial_state + ")", "component",
         "components.svg");
    line({"entropy_bond1", "entropy_bond2"},
         "Entanglement entropies (" + initial_state + ")", "S", "entropies.svg");

    const std::string corr_path = config.out_dir + "/correlation_map.csv";
    if (std::filesystem::exists(corr_path)) {
        const io::Table corr = io::parse_csv(io::read_text_file(corr_path));
        io::Heatmap map;
        for (std::size_t c = 1; c < corr.columns.size(); ++c)
            map.x.push_back(std::stod(corr.columns[c].substr(2)));
        for (const auto& row : corr.rows) {
            map.y.push_back(row[0]);
            map.values.push_back(std::vector<double>(row.begin() + 1, row.end()));
        }
        io::PlotStyle style;
        style.title = "Field correlation <E(-)E(+)> (" + initial_state + ")";
        style.xlabel = "x / L";
        style.ylabel = "t / (2 pi / omega_a)";
        io::write_text_file(config.out_dir + "/correlation.svg",
                            io::render_heatmap(map, style));
    }
    return code;
}

}  // namespace

int run_reproduction_suite(const std::string& preset, const RunConfig& overrides) {
    if (preset == "fig4") return repro_fig4(overrides);
    if (preset == "fig5") return repro_fig5(overrides);
    if (preset == "fig7-psi1") return repro_fig7("psi1", overrides);
    if (preset == "fig7-psi2") return repro_fig7("psi2", overrides);
    if (preset == "fig7-psi3") return repro_fig7("psi3", overrides);
    throw std::invalid_argument("unknown preset: " + preset);
}

void write_manifest(const RunConfig& config, const std::string& path,
                    double wall_seconds, const std::string& extra_json) {
    nlohmann::json j;
    j["tool"] = tool_version();
    j["config"] = nlohmann::json::parse(config.resolved_json());
    j["wall_seconds"] = wall_seconds;
    j["result"] = nlohmann::json::parse(extra_json);
    io::write_text_file(path, j.dump(2));
}

}  // namespace dickeband::pipeline
