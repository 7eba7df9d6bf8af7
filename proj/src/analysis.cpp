#include "pointer_sim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "pointer_sim/errors.hpp"
#include "pointer_sim/io.hpp"
#include "pointer_sim/parallel.hpp"
#include "pointer_sim/rng.hpp"

namespace psim {

namespace {

using Cd = std::complex<double>;

struct LinearFit {
    double slope = 0.0;
    double halfwidth = 0.0; // ~95% confidence half-width of the slope
};

LinearFit loglog_fit(const std::vector<int>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(ys[i] > 0.0)) throw ToleranceError("loglog_fit: nonpositive value");
        const double x = std::log(double(xs[i]));
        const double y = std::log(ys[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = double(n) * sxx - sx * sx;
    LinearFit fit;
    fit.slope = (double(n) * sxy - sx * sy) / denom;
    if (n > 2) {
        const double intercept = (sy - fit.slope * sx) / double(n);
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = std::log(double(xs[i]));
            const double y = std::log(ys[i]);
            const double r = y - (intercept + fit.slope * x);
            ssr += r * r;
        }
        const double var = ssr / double(n - 2);
        fit.halfwidth = 1.96 * std::sqrt(var * double(n) / denom);
    }
    return fit;
}

} // namespace

// --------------------------------------------------------------- reduction

Eigen::Matrix2cd reduced_density_matrix(const StateVector& state) {
    const Eigen::VectorXcd chi1 = conditional_environment(state, 1);
    const Eigen::VectorXcd chi2 = conditional_environment(state, 2);
    Eigen::Matrix2cd rho;
    rho(0, 0) = chi1.squaredNorm();
    rho(1, 1) = chi2.squaredNorm();
    rho(0, 1) = chi2.dot(chi1); // Σ_e χ1[e] conj(χ2[e])
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

std::complex<double> decoherence_factor(const StateVector& state) {
    const Eigen::VectorXcd chi1 = conditional_environment(state, 1);
    const Eigen::VectorXcd chi2 = conditional_environment(state, 2);
    const double n1 = chi1.norm();
    const double n2 = chi2.norm();
    if (n1 <= 0.0 || n2 <= 0.0) return {0.0, 0.0};
    return chi1.dot(chi2) / (n1 * n2);
}

double purity(const Eigen::Matrix2cd& rho) { return (rho * rho).trace().real(); }

ObservableSplit observable_decomposition(const StateVector& state,
                                         const Eigen::Matrix2cd& observable) {
    if ((observable - observable.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw ConfigError("observable_decomposition: observable is not Hermitian");
    const Eigen::Matrix2cd rho = reduced_density_matrix(state);
    ObservableSplit split;
    split.diagonal_part = (rho(0, 0) * observable(0, 0) + rho(1, 1) * observable(1, 1)).real();
    split.offdiagonal_part =
        (rho(0, 1) * observable(1, 0) + rho(1, 0) * observable(0, 1)).real();
    split.total = split.diagonal_part + split.offdiagonal_part;
    return split;
}

// ------------------------------------------------------------- diagnostics

DiagnosticsSeries run_diagnostics(const StateVector& initial, const ModelParams& params,
                                  const std::vector<double>& times,
                                  const EvolutionConfig& config) {
    if (times.empty() || times.front() != 0.0)
        throw ConfigError("run_diagnostics: time grid must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw ConfigError("run_diagnostics: time grid must be strictly increasing");
    const Operators ops = build_operators(params);
    const Propagator prop(ops.total, config);
    DiagnosticsSeries series;
    series.times = times;
    series.self_energy.reserve(times.size());
    series.interaction_energy.reserve(times.size());
    series.total_energy.reserve(times.size());
    series.decoherence.reserve(times.size());
    series.purity.reserve(times.size());
    series.norm.reserve(times.size());
    for (double t : times) {
        const StateVector state = prop.propagate(initial, t);
        series.self_energy.push_back(ops.self_hamiltonian.expectation(state));
        series.interaction_energy.push_back(ops.interaction.expectation(state));
        series.total_energy.push_back(ops.total.expectation(state));
        series.decoherence.push_back(decoherence_factor(state));
        series.purity.push_back(purity(reduced_density_matrix(state)));
        series.norm.push_back(state.norm());
    }
    return series;
}

void write_diagnostics_csv(const DiagnosticsSeries& series, const std::filesystem::path& path) {
    CsvWriter csv(path, {"t", "h0_expect", "hI_expect", "h_total_expect", "re_decoherence",
                         "im_decoherence", "abs_decoherence", "purity", "norm"});
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        csv.row({series.times[i], series.self_energy[i], series.interaction_energy[i],
                 series.total_energy[i], series.decoherence[i].real(),
                 series.decoherence[i].imag(), std::abs(series.decoherence[i]),
                 series.purity[i], series.norm[i]});
    }
}

std::complex<double> static_limit_decoherence_factor(
    const ModelParams& params, std::complex<double> c1, std::complex<double> c2,
    const std::vector<std::array<std::complex<double>, 2>>& site_spinors, double t) {
    params.validate();
    if (params.system_splitting != 0.0)
        throw ConfigError("static_limit_decoherence_factor: system splitting must be 0");
    for (double w : params.site_frequency)
        if (w != 0.0)
            throw ConfigError("static_limit_decoherence_factor: site frequencies must be 0");
    if (int(site_spinors.size()) != params.sites)
        throw ConfigError("static_limit_decoherence_factor: expected one spinor per site");
    const double n1 = std::abs(c1);
    const double n2 = std::abs(c2);
    if (n1 <= 0.0 || n2 <= 0.0) return {0.0, 0.0};
    Cd r = std::conj(c1) * c2 / (n1 * n2);
    for (int l = 1; l <= params.sites; ++l) {
        const auto& s = site_spinors[std::size_t(l - 1)];
        const double wn = std::norm(s[0]) + std::norm(s[1]);
        const double up = std::norm(s[0]) / wn;
        const double down = std::norm(s[1]) / wn;
        const double phase_up = -(params.v(l, 2, Spin::up) - params.v(l, 1, Spin::up)) * t;
        const double phase_down = -(params.v(l, 2, Spin::down) - params.v(l, 1, Spin::down)) * t;
        r *= up * Cd(std::cos(phase_up), std::sin(phase_up)) +
             down * Cd(std::cos(phase_down), std::sin(phase_down));
    }
    return r;
}

// ----------------------------------------------------------------- scaling

ScalingReport fluctuation_scaling(const std::vector<int>& env_sizes, double t,
                                  const std::string& coupling_law, int samples,
                                  std::uint64_t seed, int workers) {
    if (env_sizes.empty()) throw ConfigError("fluctuation_scaling: no sizes");
    for (std::size_t i = 0; i < env_sizes.size(); ++i) {
        if (env_sizes[i] < 8) throw ConfigError("fluctuation_scaling: sizes must be >= 8");
        if (i > 0 && env_sizes[i] <= env_sizes[i - 1])
            throw ConfigError("fluctuation_scaling: sizes must be strictly increasing");
    }
    if (samples < 100) throw ConfigError("fluctuation_scaling: need at least 100 samples");
    if (t < 0.0) throw ConfigError("fluctuation_scaling: negative time");

    double fixed_g = 0.0;
    bool uniform_law = true;
    if (coupling_law.rfind("fixed:", 0) == 0) {
        uniform_law = false;
        fixed_g = std::stod(coupling_law.substr(6));
    } else if (coupling_law != "uniform") {
        throw ConfigError("fluctuation_scaling: unknown coupling_law '" + coupling_law + "'");
    }

    ScalingReport report;
    report.env_sizes = env_sizes;
    report.samples = samples;
    report.seed = seed;
    report.time = t;
    report.coupling_law = coupling_law;

    const std::size_t total = env_sizes.size() * std::size_t(samples);
    std::vector<double> diag(total), row_norm(total);

    parallel_for(total, workers, [&](std::size_t flat) {
        const std::size_t m_idx = flat / std::size_t(samples);
        const int m = env_sizes[m_idx];
        // draw site phases; the all-equal degenerate draw is rejected and
        // redrawn from a shifted substream
        std::vector<double> theta(static_cast<std::size_t>(m));
        for (std::uint64_t attempt = 0;; ++attempt) {
            auto rng = RandomStream::substream(seed, flat + attempt * 0x51ed270b7a2fb9ULL);
            bool all_equal = true;
            for (int l = 0; l < m; ++l) {
                const double omega = rng.uniform(0.0, 3.14159265358979323846);
                theta[std::size_t(l)] = (t == 0.0) ? 0.0 : omega; // phase ω_l t, ω ~ U[0, π/t]
                if (l > 0 && theta[std::size_t(l)] != theta[0]) all_equal = false;
            }
            if (m == 1 || !all_equal || t == 0.0) {
                double d = 0.0, r2 = 0.0;
                for (int l = 0; l < m; ++l) {
                    double v_up, v_down;
                    if (uniform_law) {
                        v_up = rng.uniform();
                        v_down = rng.uniform();
                    } else {
                        v_up = v_down = fixed_g;
                    }
                    const double c = std::cos(theta[std::size_t(l)]);
                    const double s = std::sin(theta[std::size_t(l)]);
                    d += v_up * c * c + v_down * s * s;
                    const double off = s * c * (v_down - v_up);
                    r2 += off * off;
                }
                diag[flat] = d;
                row_norm[flat] = std::sqrt(r2);
                break;
            }
            if (attempt > 100)
                throw ToleranceError("fluctuation_scaling: seed policy failed to vary phases");
        }
    });

    for (std::size_t m_idx = 0; m_idx < env_sizes.size(); ++m_idx) {
        double mean = 0.0, mean_sq = 0.0, rms_sq = 0.0;
        for (int s = 0; s < samples; ++s) {
            const double d = diag[m_idx * std::size_t(samples) + std::size_t(s)];
            const double r = row_norm[m_idx * std::size_t(samples) + std::size_t(s)];
            mean += d;
            mean_sq += d * d;
            rms_sq += r * r;
        }
        mean /= samples;
        mean_sq /= samples;
        rms_sq /= samples;
        report.diag_mean.push_back(mean);
        report.diag_std.push_back(
            std::sqrt(std::max(0.0, (mean_sq - mean * mean) * samples / double(samples - 1))));
        report.offdiag_rms.push_back(std::sqrt(rms_sq));
    }

    const LinearFit diag_fit = loglog_fit(env_sizes, report.diag_mean);
    report.diag_slope = diag_fit.slope;
    report.diag_halfwidth = diag_fit.halfwidth;
    const bool offdiag_positive =
        std::all_of(report.offdiag_rms.begin(), report.offdiag_rms.end(),
                    [](double x) { return x > 0.0; });
    if (offdiag_positive) {
        const LinearFit off_fit = loglog_fit(env_sizes, report.offdiag_rms);
        report.offdiag_slope = off_fit.slope;
        report.offdiag_halfwidth = off_fit.halfwidth;
    }
    return report;
}

nlohmann::ordered_json scaling_report_to_json(const ScalingReport& report) {
    nlohmann::ordered_json doc;
    doc["env_sizes"] = report.env_sizes;
    doc["diag_mean"] = report.diag_mean;
    doc["diag_std"] = report.diag_std;
    doc["offdiag_rms"] = report.offdiag_rms;
    doc["fit"] = {{"diag_slope", report.diag_slope},
                  {"diag_halfwidth", report.diag_halfwidth},
                  {"offdiag_slope", report.offdiag_slope},
                  {"offdiag_halfwidth", report.offdiag_halfwidth}};
    doc["samples"] = report.samples;
    doc["seed"] = report.seed;
    doc["time"] = report.time;
    doc["coupling_law"] = report.coupling_law;
    return doc;
}

// --------------------------------------------------------------- selection

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

PointerSet classify_landscape(const std::vector<std::uint64_t>& configs,
                              const std::vector<double>& values, int sites,
                              const std::map<std::uint64_t, std::size_t>& index_of,
                              bool require_closure) {
    PointerSet set;
    set.sites = sites;
    UnionFind uf(configs.size());
    std::vector<bool> tied(configs.size(), false);
    std::vector<int> greater(configs.size(), 0), less(configs.size(), 0),
        neighbors(configs.size(), 0);
    for (std::size_t idx = 0; idx < configs.size(); ++idx) {
        for (int l = 1; l <= sites; ++l) {
            const std::uint64_t other = configs[idx] ^ (std::uint64_t{1} << (l - 1));
            auto it = index_of.find(other);
            if (it == index_of.end()) {
                if (require_closure)
                    throw ConfigError(
                        "find_pointer_states: ensemble is not closed under single flips");
                continue;
            }
            ++neighbors[idx];
            const double a = values[idx];
            const double b = values[it->second];
            if (a > b) ++greater[idx];
            else if (a < b) ++less[idx];
            else {
                tied[idx] = true;
                uf.unite(idx, it->second);
            }
        }
    }
    for (std::size_t idx = 0; idx < configs.size(); ++idx) {
        if (tied[idx] || neighbors[idx] == 0) continue;
        if (greater[idx] == neighbors[idx]) {
            set.maxima.push_back(configs[idx]);
            set.maxima_phase.push_back(values[idx]);
        } else if (less[idx] == neighbors[idx]) {
            set.minima.push_back(configs[idx]);
            set.minima_phase.push_back(values[idx]);
        }
    }
    // flagged plateau clusters: connected components of equal-value edges
    std::map<std::size_t, std::vector<std::uint64_t>> clusters;
    for (std::size_t idx = 0; idx < configs.size(); ++idx)
        if (tied[idx]) clusters[uf.find(idx)].push_back(configs[idx]);
    for (auto& [root, members] : clusters) {
        std::sort(members.begin(), members.end());
        set.plateaus.push_back(std::move(members));
    }
    std::sort(set.plateaus.begin(), set.plateaus.end());
    return set;
}

} // namespace

PointerSet find_extrema(const std::vector<double>& landscape, int sites) {
    if (sites < 1 || sites > kMaxStateSites)
        throw ResourceLimitError("find_extrema: sites out of range");
    if (landscape.size() != (std::size_t{1} << sites))
        throw ConfigError("find_extrema: landscape size must be 2^sites");
    std::vector<std::uint64_t> configs(landscape.size());
    std::iota(configs.begin(), configs.end(), 0);
    std::map<std::uint64_t, std::size_t> index_of;
    for (std::size_t i = 0; i < configs.size(); ++i) index_of[configs[i]] = i;
    return classify_landscape(configs, landscape, sites, index_of, true);
}

PointerSet find_pointer_states(const BranchEnsemble& ensemble, double t) {
    ensemble.validate();
    if (ensemble.params.sites > kMaxStateSites)
        throw ResourceLimitError("find_pointer_states: too many sites to enumerate");
    // order by configuration so the result is independent of input order
    std::vector<std::size_t> order(ensemble.branches.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ensemble.branches[a].config < ensemble.branches[b].config;
    });
    std::vector<std::uint64_t> configs;
    std::vector<double> values;
    configs.reserve(order.size());
    values.reserve(order.size());
    std::map<std::uint64_t, std::size_t> index_of;
    for (std::size_t i : order) {
        const Branch& b = ensemble.branches[i];
        index_of[b.config] = configs.size();
        configs.push_back(b.config);
        values.push_back(integrated_phase(b, t, ensemble.params));
    }
    PointerSet set =
        classify_landscape(configs, values, ensemble.params.sites, index_of, !ensemble.complete());
    set.time = t;
    return set;
}

nlohmann::ordered_json pointer_set_to_json(const PointerSet& set) {
    nlohmann::ordered_json doc;
    doc["sites"] = set.sites;
    doc["time"] = set.time;
    doc["neighborhood"] = set.neighborhood;
    auto maxima = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < set.maxima.size(); ++i)
        maxima.push_back({{"config", config_bitstring(set.maxima[i], set.sites)},
                          {"phase", set.maxima_phase[i]}});
    doc["maxima"] = std::move(maxima);
    auto minima = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < set.minima.size(); ++i)
        minima.push_back({{"config", config_bitstring(set.minima[i], set.sites)},
                          {"phase", set.minima_phase[i]}});
    doc["minima"] = std::move(minima);
    auto plateaus = nlohmann::ordered_json::array();
    for (const auto& cluster : set.plateaus) {
        auto members = nlohmann::ordered_json::array();
        for (std::uint64_t cfg : cluster) members.push_back(config_bitstring(cfg, set.sites));
        plateaus.push_back(std::move(members));
    }
    doc["plateaus"] = std::move(plateaus);
    return doc;
}

RestrictionReport pointer_restriction_quality(const BranchEnsemble& ensemble, double t,
                                              const Eigen::Matrix2cd& observable) {
    const PointerSet set = find_pointer_states(ensemble, t);
    std::set<std::uint64_t> chosen(set.maxima.begin(), set.maxima.end());
    chosen.insert(set.minima.begin(), set.minima.end());
    RestrictionReport report;
    report.kept = chosen.size();
    if (chosen.empty()) return report;
    std::vector<Branch> kept;
    double weight_sum = 0.0;
    for (const auto& b : ensemble.branches) {
        if (!chosen.count(b.config)) continue;
        kept.push_back(b);
        weight_sum += std::norm(b.weight);
    }
    report.weight_fraction = weight_sum;
    for (auto& b : kept) b.weight /= std::sqrt(weight_sum);
    const BranchEnsemble restricted = BranchEnsemble::from_table(ensemble.params, kept);
    const StateVector full = assemble_diagonal_approx(ensemble, t);
    const StateVector partial = assemble_diagonal_approx(restricted, t);
    report.overlap = std::abs(full.overlap(partial));
    report.observable_difference =
        std::abs(observable_decomposition(full, observable).total -
                 observable_decomposition(partial, observable).total);
    return report;
}

// ------------------------------------------------------------ interference

std::vector<std::complex<double>> interference_row_sums(const BranchEnsemble& ensemble, double t,
                                                        const OperatorHandle& probe,
                                                        const std::vector<double>& phases,
                                                        int workers) {
    ensemble.validate();
    const std::size_t count = ensemble.branches.size();
    if (phases.size() != count)
        throw ConfigError("interference_row_sums: one phase per branch required");
    const Eigen::Index dim = basis_dim(ensemble.params.sites);
    if (probe.dim() != dim) throw ConfigError("interference_row_sums: probe dimension mismatch");
    if (double(count) * double(count) * double(dim) > double(std::uint64_t{1} << 30))
        throw ResourceLimitError("interference_row_sums: ensemble too large");

    std::vector<Eigen::VectorXcd> states(count);
    parallel_for(count, workers, [&](std::size_t i) {
        states[i] = branch_state(ensemble.branches[i], t, ensemble.params).amplitudes;
    });
    std::vector<Cd> rows(count);
    parallel_for(count, workers, [&](std::size_t i) {
        const Eigen::VectorXcd probed = probe.apply(states[i]);
        Cd acc = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            const double arg = phases[j] - phases[i];
            acc += states[j].dot(probed) * Cd(std::cos(arg), std::sin(arg));
        }
        rows[i] = ensemble.branches[i].weight * acc;
    });
    return rows;
}

InterferenceReport interference_filter(const BranchEnsemble& ensemble, double t,
                                       const OperatorHandle& probe, int workers) {
    InterferenceReport report;
    std::vector<double> phases;
    phases.reserve(ensemble.branches.size());
    for (const auto& b : ensemble.branches)
        phases.push_back(integrated_phase(b, t, ensemble.params));
    report.row_sums = interference_row_sums(ensemble, t, probe, phases, workers);
    report.pointers = find_pointer_states(ensemble, t);

    const std::vector<double> flat(ensemble.branches.size(), 0.0);
    const auto unweighted = interference_row_sums(ensemble, t, probe, flat, workers);

    auto concentration = [&](const std::vector<Cd>& rows) {
        double on_pointers = 0.0, total = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::uint64_t cfg = ensemble.branches[i].config;
            const double mass = std::norm(rows[i]);
            total += mass;
            const bool is_max = std::find(report.pointers.maxima.begin(),
                                          report.pointers.maxima.end(),
                                          cfg) != report.pointers.maxima.end();
            const bool is_min = std::find(report.pointers.minima.begin(),
                                          report.pointers.minima.end(),
                                          cfg) != report.pointers.minima.end();
            if (is_max || is_min) on_pointers += mass;
        }
        return total > 0.0 ? on_pointers / total : 0.0;
    };
    report.concentration = concentration(report.row_sums);
    report.unweighted_concentration = concentration(unweighted);
    return report;
}

OperatorHandle default_probe(const ModelParams& params, std::uint64_t seed) {
    auto rng = RandomStream::substream(seed, 0x70726f6265ULL);
    const int site = 1 + int(rng.uniform_index(std::uint64_t(params.sites)));
    Eigen::Matrix4cd g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = rng.gaussian_complex();
    const Eigen::Matrix4cd block = 0.5 * (g + g.adjoint());
    return OperatorHandle::two_factor(params.sites, site, block);
}

// ------------------------------------------------------- projector reading

ProjectorParts ensemble_projector_parts(const BranchEnsemble& ensemble, double t) {
    ensemble.validate();
    if (ensemble.params.sites > kMaxDenseSites)
        throw ResourceLimitError("ensemble_projector_parts: dense limit exceeded");
    const StateVector full_state = assemble_diagonal_approx(ensemble, t);
    ProjectorParts parts;
    parts.full = full_state.amplitudes * full_state.amplitudes.adjoint();
    parts.diagonal_mixture =
        Eigen::MatrixXcd::Zero(full_state.dim(), full_state.dim());
    for (const auto& b : ensemble.branches) {
        const Eigen::VectorXcd v = branch_state(b, t, ensemble.params).amplitudes;
        parts.diagonal_mixture += std::norm(b.weight) * (v * v.adjoint());
    }
    return parts;
}

} // namespace psim
