#include "pointer_sim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "pointer_sim/analysis.hpp"
#include "pointer_sim/branch.hpp"
#include "pointer_sim/errors.hpp"
#include "pointer_sim/exact.hpp"
#include "pointer_sim/io.hpp"
#include "pointer_sim/model.hpp"
#include "pointer_sim/rng.hpp"
#include "pointer_sim/wavepacket.hpp"

namespace psim {

namespace {

using nlohmann::ordered_json;
using Cd = std::complex<double>;

const std::set<std::string> kScenarios = {
    "zurek_limit",    "weak_coupling_energy", "decoherence_factor", "scaling",
    "pointer_landscape", "interference",      "wavepacket"};

// substream tags so that parameter, ensemble, and initial-state draws never collide
constexpr std::uint64_t kTagParams = 1;
constexpr std::uint64_t kTagEnsemble = 2;
constexpr std::uint64_t kTagInitial = 3;
constexpr std::uint64_t kTagProbe = 4;
constexpr std::uint64_t kTagScramble = 5;

std::vector<double> parse_schedule(const ordered_json& j) {
    std::vector<double> times;
    if (j.is_array()) {
        times = j.get<std::vector<double>>();
    } else if (j.is_object()) {
        const double t0 = j.at("t_start").get<double>();
        const double t1 = j.at("t_end").get<double>();
        const int points = j.at("points").get<int>();
        if (points < 2) throw ConfigError("schedule: points must be >= 2");
        for (int i = 0; i < points; ++i)
            times.push_back(t0 + (t1 - t0) * double(i) / double(points - 1));
    } else {
        throw ConfigError("schedule must be an array or {t_start, t_end, points}");
    }
    if (times.empty()) throw ConfigError("schedule is empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw ConfigError("schedule has a non-finite time");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw ConfigError("schedule must be strictly increasing");
    }
    return times;
}

std::vector<double> schedule_or(const ordered_json& config, std::vector<double> fallback) {
    if (config.contains("schedule")) return parse_schedule(config.at("schedule"));
    return fallback;
}

std::vector<double> linspace(double t0, double t1, int points) {
    std::vector<double> times;
    for (int i = 0; i < points; ++i)
        times.push_back(t0 + (t1 - t0) * double(i) / double(points - 1));
    return times;
}

bool needs_seed(const std::string& scenario) { return scenario != "wavepacket"; }

std::uint64_t seed_of(const ordered_json& config) {
    return config.at("seed").get<std::uint64_t>();
}

ModelParams static_random_params(int sites, std::uint64_t seed, double v_lo, double v_hi) {
    ModelParams p;
    p.sites = sites;
    p.system_splitting = 0.0;
    p.site_frequency.assign(std::size_t(sites), 0.0);
    auto rng = RandomStream::substream(seed, kTagParams);
    p.coupling.resize(std::size_t(4 * sites));
    for (double& v : p.coupling) v = rng.uniform(v_lo, v_hi);
    p.validate();
    return p;
}

ModelParams dynamic_random_params(int sites, std::uint64_t seed) {
    ModelParams p;
    p.sites = sites;
    auto rng = RandomStream::substream(seed, kTagParams);
    p.system_splitting = rng.uniform(0.5, 1.5);
    p.site_frequency.resize(std::size_t(sites));
    for (double& w : p.site_frequency) w = rng.uniform(0.5, 1.5);
    p.coupling.resize(std::size_t(4 * sites));
    for (double& v : p.coupling) v = rng.uniform(-1.0, 1.0);
    p.validate();
    return p;
}

std::array<Cd, 2> random_spinor(RandomStream& rng) {
    const double theta = std::acos(1.0 - 2.0 * rng.uniform());
    const Cd phase = rng.unit_phase();
    return {Cd(std::cos(theta / 2.0), 0.0), std::sin(theta / 2.0) * phase};
}

ModelParams params_for(const ordered_json& config, const std::string& scenario, int default_sites,
                       std::uint64_t seed) {
    if (config.contains("params")) {
        ModelParams p = ModelParams::from_json(config.at("params"));
        if (scenario == "zurek_limit" || scenario == "decoherence_factor") {
            if (p.system_splitting != 0.0)
                throw ConfigError(scenario + ": system splitting must be 0");
            for (double w : p.site_frequency)
                if (w != 0.0) throw ConfigError(scenario + ": site frequencies must be 0");
        }
        return p;
    }
    const int sites = config.value("sites", default_sites);
    if (sites < 1) throw ConfigError("sites must be >= 1");
    if (scenario == "zurek_limit") return static_random_params(sites, seed, -1.0, 1.0);
    if (scenario == "decoherence_factor") return static_random_params(sites, seed, 0.0, 1.0);
    return dynamic_random_params(sites, seed);
}

double concentration_on(const PointerSet& pointers, const BranchEnsemble& ens,
                        const std::vector<Cd>& rows) {
    std::set<std::uint64_t> chosen(pointers.maxima.begin(), pointers.maxima.end());
    chosen.insert(pointers.minima.begin(), pointers.minima.end());
    double on = 0.0, total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double mass = std::norm(rows[i]);
        total += mass;
        if (chosen.count(ens.branches[i].config)) on += mass;
    }
    return total > 0.0 ? on / total : 0.0;
}

// ------------------------------------------------------------- scenarios

struct ScenarioResult {
    ordered_json results;
    std::vector<std::string> outputs;
};

ScenarioResult run_zurek_limit(const ordered_json& config, const std::filesystem::path& dir,
                               int /*workers*/) {
    const std::uint64_t seed = seed_of(config);
    const ModelParams params = params_for(config, "zurek_limit", 6, seed);
    const auto times = schedule_or(config, {0.5, 1.0, 5.0});
    const std::uint64_t ens_seed = RandomStream::substream(seed, kTagEnsemble).next_u64();
    const BranchEnsemble ens = BranchEnsemble::basis_aligned_random(params, ens_seed);
    const StateVector initial = ens.initial_state();
    const Operators ops = build_operators(params);
    const Propagator prop(ops.total);

    double min_fidelity = 1.0;
    CsvWriter csv(dir / "zurek_fidelity.csv", {"t", "fidelity", "deviation"});
    for (double t : times) {
        const StateVector exact = prop.propagate(initial, t);
        const StateVector approx = assemble_diagonal_approx(ens, t);
        const double fid = std::abs(exact.overlap(approx));
        min_fidelity = std::min(min_fidelity, fid);
        csv.row({t, fid, 1.0 - fid});
    }
    csv.close();
    ScenarioResult out;
    out.results["min_fidelity"] = min_fidelity;
    out.results["max_deviation"] = 1.0 - min_fidelity;
    out.outputs = {"zurek_fidelity.csv"};
    return out;
}

ScenarioResult run_weak_coupling(const ordered_json& config, const std::filesystem::path& dir,
                                 int /*workers*/) {
    const std::uint64_t seed = seed_of(config);
    ModelParams params = params_for(config, "weak_coupling_energy", 6, seed);
    const auto times = schedule_or(config, linspace(0.0, 5.0, 101));
    std::vector<double> scales =
        config.value("coupling_scales", std::vector<double>{0.04, 0.02, 0.01});
    if (scales.empty()) throw ConfigError("weak_coupling_energy: no coupling scales");
    for (double s : scales)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw ConfigError("weak_coupling_energy: bad coupling scale");

    auto rng = RandomStream::substream(seed, kTagInitial);
    const auto sys = random_spinor(rng);
    std::vector<std::array<Cd, 2>> site_spinors;
    for (int l = 0; l < params.sites; ++l) site_spinors.push_back(random_spinor(rng));
    const StateVector initial =
        StateVector::product_state(params.sites, sys[0], sys[1], site_spinors);

    ScenarioResult out;
    CsvWriter summary(dir / "weak_coupling_drift.csv", {"coupling_scale", "max_drift"});
    std::vector<double> drifts;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        params.coupling_scale = scales[i];
        const DiagnosticsSeries series = run_diagnostics(initial, params, times);
        double drift = 0.0;
        for (double e : series.self_energy) drift = std::max(drift, std::abs(e - series.self_energy.front()));
        drifts.push_back(drift);
        summary.row({scales[i], drift});
        const std::string name = "diagnostics_scale_" + std::to_string(i) + ".csv";
        write_diagnostics_csv(series, dir / name);
        out.outputs.push_back(name);
    }
    summary.close();
    out.outputs.insert(out.outputs.begin(), "weak_coupling_drift.csv");
    bool monotone = true;
    for (std::size_t i = 1; i < scales.size(); ++i) {
        const bool scale_drops = scales[i] < scales[i - 1];
        if (scale_drops && !(drifts[i] < drifts[i - 1])) monotone = false;
    }
    out.results["coupling_scales"] = scales;
    out.results["max_drifts"] = drifts;
    out.results["drift_monotone_with_scale"] = monotone;
    return out;
}

ScenarioResult run_decoherence_factor(const ordered_json& config,
                                      const std::filesystem::path& dir, int /*workers*/) {
    const std::uint64_t seed = seed_of(config);
    const ModelParams params = params_for(config, "decoherence_factor", 10, seed);
    const auto times = schedule_or(config, linspace(0.0, 10.0, 201));

    auto rng = RandomStream::substream(seed, kTagInitial);
    const auto sys = random_spinor(rng);
    std::vector<std::array<Cd, 2>> site_spinors;
    for (int l = 0; l < params.sites; ++l) site_spinors.push_back(random_spinor(rng));
    const StateVector initial =
        StateVector::product_state(params.sites, sys[0], sys[1], site_spinors);

    const DiagnosticsSeries series = run_diagnostics(initial, params, times);
    write_diagnostics_csv(series, dir / "diagnostics.csv");

    CsvWriter csv(dir / "decoherence.csv",
                  {"t", "re_r", "im_r", "abs_r", "abs_r_closed_form", "abs_diff"});
    double max_diff = 0.0;
    double first_below = -1.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Cd closed =
            static_limit_decoherence_factor(params, sys[0], sys[1], site_spinors, times[i]);
        const Cd engine = series.decoherence[i];
        const double diff = std::abs(engine - closed);
        max_diff = std::max(max_diff, diff);
        if (first_below < 0.0 && std::abs(engine) < 0.1) first_below = times[i];
        csv.row({times[i], engine.real(), engine.imag(), std::abs(engine), std::abs(closed), diff});
    }
    csv.close();
    ScenarioResult out;
    out.results["max_closed_form_diff"] = max_diff;
    if (first_below >= 0.0) out.results["first_time_below_0.1"] = first_below;
    else out.results["first_time_below_0.1"] = nullptr;
    out.outputs = {"diagnostics.csv", "decoherence.csv"};
    return out;
}

ScenarioResult run_scaling(const ordered_json& config, const std::filesystem::path& dir,
                           int workers) {
    const std::uint64_t seed = seed_of(config);
    const std::vector<int> env_sizes =
        config.value("env_sizes", std::vector<int>{8, 16, 32, 64, 128, 256, 512, 1024});
    const int samples = config.value("samples", 500);
    const double t = config.value("time", 1.0);
    const std::string law = config.value("coupling_law", std::string("uniform"));
    const ScalingReport report = fluctuation_scaling(env_sizes, t, law, samples, seed, workers);
    write_json_file(dir / "scaling_report.json", scaling_report_to_json(report));
    ScenarioResult out;
    out.results["diag_slope"] = report.diag_slope;
    out.results["offdiag_slope"] = report.offdiag_slope;
    out.outputs = {"scaling_report.json"};
    return out;
}

ScenarioResult run_pointer_landscape(const ordered_json& config,
                                     const std::filesystem::path& dir, int /*workers*/) {
    const std::uint64_t seed = seed_of(config);
    const ModelParams params = params_for(config, "pointer_landscape", 8, seed);
    const double time = config.value("time", 1.0);
    const std::uint64_t ens_seed = RandomStream::substream(seed, kTagEnsemble).next_u64();
    const BranchEnsemble ens = BranchEnsemble::random_bloch(params, ens_seed);
    const PointerSet set = find_pointer_states(ens, time);
    write_json_file(dir / "pointer_set.json", pointer_set_to_json(set));

    const auto times = schedule_or(config, {time});
    CsvWriter csv(dir / "phase_records.csv", {"nu", "t", "lambda", "Lambda"});
    for (const auto& b : ens.branches) {
        for (const auto& rec : phase_records(b, params, times)) {
            csv.row_cells({config_bitstring(rec.config, params.sites), format_double(rec.time),
                           format_double(rec.interaction_energy),
                           format_double(rec.integrated_phase)});
        }
    }
    csv.close();

    // the extremum set moves with time; recompute per schedule point and
    // report when it changes
    std::vector<double> change_times;
    std::vector<std::uint64_t> prev_maxima, prev_minima;
    bool first = true;
    for (double t : times) {
        const PointerSet at_t = find_pointer_states(ens, t);
        if (!first && (at_t.maxima != prev_maxima || at_t.minima != prev_minima))
            change_times.push_back(t);
        prev_maxima = at_t.maxima;
        prev_minima = at_t.minima;
        first = false;
    }

    // restriction quality against the level-imbalance observable
    Eigen::Matrix2cd imbalance = Eigen::Matrix2cd::Zero();
    imbalance(0, 0) = 1.0;
    imbalance(1, 1) = -1.0;
    const RestrictionReport restriction = pointer_restriction_quality(ens, time, imbalance);

    ScenarioResult out;
    out.results["num_maxima"] = set.maxima.size();
    out.results["num_minima"] = set.minima.size();
    out.results["num_plateaus"] = set.plateaus.size();
    out.results["set_change_times"] = change_times;
    out.results["restriction"] = {{"kept", restriction.kept},
                                  {"weight_fraction", restriction.weight_fraction},
                                  {"overlap", restriction.overlap},
                                  {"observable_difference", restriction.observable_difference}};
    out.outputs = {"pointer_set.json", "phase_records.csv"};
    return out;
}

ScenarioResult run_interference(const ordered_json& config, const std::filesystem::path& dir,
                                int workers) {
    const std::uint64_t seed = seed_of(config);
    const ModelParams params = params_for(config, "interference", 8, seed);
    const double time = config.value("time", 1.0);
    const std::uint64_t ens_seed = RandomStream::substream(seed, kTagEnsemble).next_u64();
    const BranchEnsemble ens = BranchEnsemble::random_bloch(params, ens_seed);
    const std::uint64_t probe_seed = RandomStream::substream(seed, kTagProbe).next_u64();
    const OperatorHandle probe = default_probe(params, probe_seed);

    const InterferenceReport report = interference_filter(ens, time, probe, workers);

    // scrambled baseline: the same phase values assigned to random branches
    std::vector<double> phases;
    for (const auto& b : ens.branches) phases.push_back(integrated_phase(b, time, params));
    auto shuffle_rng = RandomStream::substream(seed, kTagScramble);
    for (std::size_t i = phases.size(); i > 1; --i)
        std::swap(phases[i - 1], phases[shuffle_rng.uniform_index(i)]);
    const auto scrambled_rows = interference_row_sums(ens, time, probe, phases, workers);
    const double scrambled = concentration_on(report.pointers, ens, scrambled_rows);

    ordered_json doc;
    doc["time"] = time;
    doc["concentration"] = report.concentration;
    doc["unweighted_concentration"] = report.unweighted_concentration;
    doc["scrambled_concentration"] = scrambled;
    doc["pointer_set"] = pointer_set_to_json(report.pointers);
    auto rows = ordered_json::array();
    for (std::size_t i = 0; i < report.row_sums.size(); ++i) {
        rows.push_back({{"config", config_bitstring(ens.branches[i].config, params.sites)},
                        {"re", report.row_sums[i].real()},
                        {"im", report.row_sums[i].imag()},
                        {"abs", std::abs(report.row_sums[i])}});
    }
    doc["rows"] = std::move(rows);
    write_json_file(dir / "interference.json", doc);

    ScenarioResult out;
    out.results["concentration"] = report.concentration;
    out.results["unweighted_concentration"] = report.unweighted_concentration;
    out.results["scrambled_concentration"] = scrambled;
    out.outputs = {"interference.json"};
    return out;
}

ScenarioResult run_wavepacket(const ordered_json& config, const std::filesystem::path& dir,
                              int /*workers*/) {
    LatticeConfig lattice;
    if (config.contains("lattice")) {
        lattice = LatticeConfig::from_json(config.at("lattice"));
    } else {
        lattice.grid_points = config.value("grid_points", 64);
        lattice.wave_index = config.value("wave_index", 1);
        lattice.validate();
    }
    const auto times = schedule_or(config, {0.0, 0.5, 1.0, 2.0});
    write_wavepacket_csv(lattice, times, dir / "wavepacket.csv");
    const EnergySplit split = energy_decomposition(lattice, 0.0);
    ScenarioResult out;
    out.results["band_energy"] = split.total;
    out.results["diagonal_sum"] = split.diagonal_sum;
    if (split.total != 0.0) out.results["decohered_ratio"] = split.diagonal_sum / split.total;
    else out.results["decohered_ratio"] = nullptr;
    out.outputs = {"wavepacket.csv"};
    return out;
}

void apply_override(ordered_json& config, const std::string& key, const std::string& value) {
    ordered_json parsed;
    try {
        parsed = ordered_json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
        parsed = value; // plain string
    }
    ordered_json* node = &config;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (part.empty()) throw ConfigError("--set: empty key segment in '" + key + "'");
        if (dot == std::string::npos) {
            (*node)[part] = parsed;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

} // namespace

void validate_experiment_config(const ordered_json& config) {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    if (!config.contains("scenario") || !config.at("scenario").is_string())
        throw ConfigError("config needs a string 'scenario'");
    const std::string scenario = config.at("scenario").get<std::string>();
    if (!kScenarios.count(scenario)) throw ConfigError("unknown scenario '" + scenario + "'");
    if (needs_seed(scenario)) {
        if (!config.contains("seed") || !config.at("seed").is_number_integer())
            throw ConfigError("scenario '" + scenario + "' uses randomness and needs an integer seed");
    }
    if (config.contains("schedule")) parse_schedule(config.at("schedule"));
    if (config.contains("params")) ModelParams::from_json(config.at("params"));
    if (config.contains("lattice")) LatticeConfig::from_json(config.at("lattice"));
    if (config.contains("output_dir") && !config.at("output_dir").is_string())
        throw ConfigError("output_dir must be a string");
    if (config.contains("sites") &&
        (!config.at("sites").is_number_integer() || config.at("sites").get<int>() < 1))
        throw ConfigError("sites must be a positive integer");
}

RunOutcome run_experiment(ordered_json config, const RunOptions& options) {
    RunOutcome outcome;
    try {
        for (const auto& [key, value] : options.overrides) apply_override(config, key, value);
        validate_experiment_config(config);
    } catch (const ConfigError& err) {
        outcome.exit_code = kExitConfigError;
        outcome.message = err.what();
        return outcome;
    } catch (const nlohmann::json::exception& err) {
        outcome.exit_code = kExitConfigError;
        outcome.message = std::string("config error: ") + err.what();
        return outcome;
    }

    const std::string scenario = config.at("scenario").get<std::string>();
    std::filesystem::path dir =
        options.output_dir ? *options.output_dir
                           : config.value("output_dir", std::string("results"));
    std::error_code fs_err;
    std::filesystem::create_directories(dir, fs_err);
    if (fs_err) {
        outcome.exit_code = kExitConfigError;
        outcome.message = "cannot create output directory " + dir.string();
        return outcome;
    }
    outcome.output_dir = dir;

    ordered_json manifest;
    manifest["scenario"] = scenario;
    manifest["version"] = kVersion;
    manifest["config"] = config;

    const auto start = std::chrono::steady_clock::now();
    ScenarioResult result;
    try {
        if (scenario == "zurek_limit") result = run_zurek_limit(config, dir, options.workers);
        else if (scenario == "weak_coupling_energy")
            result = run_weak_coupling(config, dir, options.workers);
        else if (scenario == "decoherence_factor")
            result = run_decoherence_factor(config, dir, options.workers);
        else if (scenario == "scaling") result = run_scaling(config, dir, options.workers);
        else if (scenario == "pointer_landscape")
            result = run_pointer_landscape(config, dir, options.workers);
        else if (scenario == "interference")
            result = run_interference(config, dir, options.workers);
        else result = run_wavepacket(config, dir, options.workers);
        manifest["status"] = "ok";
    } catch (const ConfigError& err) {
        manifest["status"] = "error";
        manifest["error"] = err.what();
        outcome.exit_code = kExitConfigError;
        outcome.message = err.what();
    } catch (const nlohmann::json::exception& err) {
        manifest["status"] = "error";
        manifest["error"] = err.what();
        outcome.exit_code = kExitConfigError;
        outcome.message = err.what();
    } catch (const ToleranceError& err) {
        manifest["status"] = "error";
        manifest["error"] = err.what();
        outcome.exit_code = kExitToleranceError;
        outcome.message = err.what();
    } catch (const ResourceLimitError& err) {
        manifest["status"] = "error";
        manifest["error"] = err.what();
        outcome.exit_code = kExitResourceLimit;
        outcome.message = err.what();
    }
    const auto stop = std::chrono::steady_clock::now();
    manifest["wall_time_s"] = std::chrono::duration<double>(stop - start).count();
    manifest["outputs"] = result.outputs;
    manifest["results"] = result.results;
    write_json_file(dir / "manifest.json", manifest);
    outcome.manifest = std::move(manifest);
    return outcome;
}

RunOutcome run_experiment_file(const std::filesystem::path& config_path,
                               const RunOptions& options) {
    ordered_json config;
    try {
        config = read_json_file(config_path);
    } catch (const ConfigError& err) {
        RunOutcome outcome;
        outcome.exit_code = kExitConfigError;
        outcome.message = err.what();
        return outcome;
    }
    return run_experiment(std::move(config), options);
}

} // namespace psim
