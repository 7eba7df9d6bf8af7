#include "pointer_sim/branch.hpp"

#include <bit>
#include <cmath>

#include "pointer_sim/errors.hpp"
#include "pointer_sim/io.hpp"
#include "pointer_sim/rng.hpp"

namespace psim {

namespace {

using Cd = std::complex<double>;

// system spinor of a branch at time t, components on (level 1, level 2)
std::array<Cd, 2> system_spinor(const Branch& b, double t, double splitting) {
    const auto e1 = self_evolved_system(1, t, splitting);
    const auto e2 = self_evolved_system(2, t, splitting);
    return {b.c1 * e1[0] + b.c2 * e2[0], b.c1 * e1[1] + b.c2 * e2[1]};
}

// ∫_0^t cos(a s) ds; the a→0 limit is t
double cos_integral(double a, double t) {
    if (std::abs(a) < 1e-8) {
        const double x = a * t;
        return t * (1.0 - x * x / 6.0 + x * x * x * x / 120.0);
    }
    return std::sin(a * t) / a;
}

// ∫_0^t sin(a s) ds; the a→0 limit is 0
double sin_integral(double a, double t) {
    if (std::abs(a) < 1e-8) {
        const double x = a * t;
        return 0.5 * a * t * t * (1.0 - x * x / 12.0 + x * x * x * x / 360.0);
    }
    return (1.0 - std::cos(a * t)) / a;
}

std::uint64_t config_mask(int sites) {
    if (sites >= 64) return ~std::uint64_t{0};
    return (std::uint64_t{1} << sites) - 1;
}

} // namespace

void Branch::validate(int sites) const {
    if (config > config_mask(sites)) throw ConfigError("Branch: configuration out of range");
    const double n = std::norm(c1) + std::norm(c2);
    if (std::abs(n - 1.0) > 1e-12)
        throw ConfigError("Branch: system coefficients are not normalized");
    if (!std::isfinite(weight.real()) || !std::isfinite(weight.imag()))
        throw ConfigError("Branch: non-finite weight");
}

void BranchEnsemble::validate() const {
    params.validate();
    if (branches.empty()) throw ConfigError("BranchEnsemble: no branches");
    double weight_sum = 0.0;
    std::vector<std::uint64_t> seen;
    seen.reserve(branches.size());
    for (const auto& b : branches) {
        b.validate(params.sites);
        weight_sum += std::norm(b.weight);
        seen.push_back(b.config);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw ConfigError("BranchEnsemble: duplicate configuration");
    if (std::abs(weight_sum - 1.0) > 1e-10)
        throw ConfigError("BranchEnsemble: weights are not normalized");
}

bool BranchEnsemble::complete() const {
    return params.sites <= kMaxStateSites &&
           branches.size() == (std::size_t{1} << params.sites);
}

StateVector BranchEnsemble::initial_state() const { return assemble_diagonal_approx(*this, 0.0); }

BranchEnsemble BranchEnsemble::product_state(
    ModelParams params, Cd c1, Cd c2,
    const std::vector<std::array<Cd, 2>>& site_spinors) {
    params.validate();
    if (params.sites > kMaxStateSites)
        throw ResourceLimitError("product_state: enumeration limited to " +
                                 std::to_string(kMaxStateSites) + " sites");
    if (int(site_spinors.size()) != params.sites)
        throw ConfigError("product_state: expected one spinor per site");
    const double cn = std::sqrt(std::norm(c1) + std::norm(c2));
    if (cn <= 0.0) throw ConfigError("product_state: zero system coefficients");
    c1 /= cn;
    c2 /= cn;
    std::vector<std::array<Cd, 2>> spinors = site_spinors;
    for (auto& s : spinors) {
        const double n = std::sqrt(std::norm(s[0]) + std::norm(s[1]));
        if (n <= 0.0) throw ConfigError("product_state: zero site spinor");
        s[0] /= n;
        s[1] /= n;
    }
    BranchEnsemble ens;
    ens.params = std::move(params);
    const std::uint64_t count = std::uint64_t{1} << ens.params.sites;
    ens.branches.reserve(count);
    for (std::uint64_t cfg = 0; cfg < count; ++cfg) {
        Cd alpha{1.0, 0.0};
        for (int l = 1; l <= ens.params.sites; ++l)
            alpha *= spinors[std::size_t(l - 1)][int(spin_of(cfg, l))];
        ens.branches.push_back(Branch{cfg, c1, c2, alpha});
    }
    return ens;
}

BranchEnsemble BranchEnsemble::random_bloch(ModelParams params, std::uint64_t seed) {
    params.validate();
    if (params.sites > kMaxStateSites)
        throw ResourceLimitError("random_bloch: enumeration limited to " +
                                 std::to_string(kMaxStateSites) + " sites");
    BranchEnsemble ens;
    ens.params = std::move(params);
    const std::uint64_t count = std::uint64_t{1} << ens.params.sites;
    ens.branches.reserve(count);
    double weight_sum = 0.0;
    for (std::uint64_t cfg = 0; cfg < count; ++cfg) {
        auto rng = RandomStream::substream(seed, cfg);
        const double theta = std::acos(1.0 - 2.0 * rng.uniform());
        const Cd phase = rng.unit_phase();
        const Cd c1 = std::cos(theta / 2.0);
        const Cd c2 = std::sin(theta / 2.0) * phase;
        const Cd alpha = rng.gaussian_complex();
        weight_sum += std::norm(alpha);
        ens.branches.push_back(Branch{cfg, c1, c2, alpha});
    }
    const double scale = 1.0 / std::sqrt(weight_sum);
    for (auto& b : ens.branches) b.weight *= scale;
    return ens;
}

BranchEnsemble BranchEnsemble::basis_aligned_random(ModelParams params, std::uint64_t seed) {
    params.validate();
    if (params.sites > kMaxStateSites)
        throw ResourceLimitError("basis_aligned_random: enumeration limited to " +
                                 std::to_string(kMaxStateSites) + " sites");
    BranchEnsemble ens;
    ens.params = std::move(params);
    const std::uint64_t count = std::uint64_t{1} << ens.params.sites;
    ens.branches.reserve(count);
    double weight_sum = 0.0;
    for (std::uint64_t cfg = 0; cfg < count; ++cfg) {
        auto rng = RandomStream::substream(seed, cfg);
        const bool first = rng.uniform() < 0.5;
        const Cd alpha = rng.gaussian_complex();
        weight_sum += std::norm(alpha);
        ens.branches.push_back(Branch{cfg, first ? Cd{1.0, 0.0} : Cd{0.0, 0.0},
                                      first ? Cd{0.0, 0.0} : Cd{1.0, 0.0}, alpha});
    }
    const double scale = 1.0 / std::sqrt(weight_sum);
    for (auto& b : ens.branches) b.weight *= scale;
    return ens;
}

BranchEnsemble BranchEnsemble::from_table(ModelParams params, std::vector<Branch> branches) {
    BranchEnsemble ens;
    ens.params = std::move(params);
    ens.branches = std::move(branches);
    ens.validate();
    return ens;
}

BranchEnsemble BranchEnsemble::sampled_random(ModelParams params, std::size_t count,
                                              std::uint64_t seed) {
    params.validate();
    if (params.sites > 64)
        throw ResourceLimitError("sampled_random: configurations are limited to 64 sites");
    if (count == 0) throw ConfigError("sampled_random: need at least one branch");
    if (params.sites < 63 && count > (std::uint64_t{1} << params.sites))
        throw ConfigError("sampled_random: more branches than configurations");
    BranchEnsemble ens;
    ens.params = std::move(params);
    const std::uint64_t mask = config_mask(ens.params.sites);
    std::vector<std::uint64_t> seen;
    double weight_sum = 0.0;
    for (std::size_t i = 0; ens.branches.size() < count; ++i) {
        auto rng = RandomStream::substream(seed, i);
        const std::uint64_t cfg = rng.next_u64() & mask;
        if (std::find(seen.begin(), seen.end(), cfg) != seen.end()) continue;
        seen.push_back(cfg);
        const double theta = std::acos(1.0 - 2.0 * rng.uniform());
        const Cd phase = rng.unit_phase();
        Branch b;
        b.config = cfg;
        b.c1 = Cd(std::cos(theta / 2.0), 0.0);
        b.c2 = std::sin(theta / 2.0) * phase;
        b.weight = rng.gaussian_complex();
        weight_sum += std::norm(b.weight);
        ens.branches.push_back(b);
    }
    const double scale = 1.0 / std::sqrt(weight_sum);
    for (auto& b : ens.branches) b.weight *= scale;
    return ens;
}

StateVector branch_state(const Branch& branch, double t, const ModelParams& params) {
    branch.validate(params.sites);
    const auto sys = system_spinor(branch, t, params.system_splitting);
    std::vector<std::array<Cd, 2>> spinors;
    spinors.reserve(std::size_t(params.sites));
    for (int l = 1; l <= params.sites; ++l)
        spinors.push_back(
            self_evolved_site(spin_of(branch.config, l), t, params.site_frequency[std::size_t(l - 1)]));
    return StateVector::product_state(params.sites, sys[0], sys[1], spinors);
}

double interaction_energy(const Branch& branch, double t, const ModelParams& params) {
    branch.validate(params.sites);
    const auto sys = system_spinor(branch, t, params.system_splitting);
    const double p1 = std::norm(sys[0]);
    const double p2 = std::norm(sys[1]);
    double sum = 0.0;
    for (int l = 1; l <= params.sites; ++l) {
        const Spin occupied = spin_of(branch.config, l);
        const double c = std::cos(params.site_frequency[std::size_t(l - 1)] * t);
        const double stay = c * c; // probability to remain on the occupied spin
        for (int i = 1; i <= 2; ++i) {
            const double pop = (i == 1) ? p1 : p2;
            sum += pop * (params.v(l, i, occupied) * stay +
                          params.v(l, i, flip(occupied)) * (1.0 - stay));
        }
    }
    return sum;
}

double integrated_phase(const Branch& branch, double t, const ModelParams& params) {
    branch.validate(params.sites);
    const double splitting = params.system_splitting;
    // population imbalance p1 - p2 = dc·cos(2Es) + 2κ·sin(2Es)
    const double dc = std::norm(branch.c1) - std::norm(branch.c2);
    const double kappa = std::imag(std::conj(branch.c1) * branch.c2);
    const double int_f = dc * cos_integral(2.0 * splitting, t) +
                         2.0 * kappa * sin_integral(2.0 * splitting, t);
    double sum = 0.0;
    for (int l = 1; l <= params.sites; ++l) {
        const double w = params.site_frequency[std::size_t(l - 1)];
        const double sign = spin_of(branch.config, l) == Spin::up ? 1.0 : -1.0;
        const double avg1 = 0.5 * (params.v(l, 1, Spin::up) + params.v(l, 1, Spin::down));
        const double avg2 = 0.5 * (params.v(l, 2, Spin::up) + params.v(l, 2, Spin::down));
        const double dif1 = 0.5 * (params.v(l, 1, Spin::up) - params.v(l, 1, Spin::down));
        const double dif2 = 0.5 * (params.v(l, 2, Spin::up) - params.v(l, 2, Spin::down));
        // λ_l(s) = k0 + k1 f(s) + (k2 + k3 f(s)) cos(2ω_l s)
        const double k0 = 0.5 * (avg1 + avg2);
        const double k1 = 0.5 * (avg1 - avg2);
        const double k2 = sign * 0.5 * (dif1 + dif2);
        const double k3 = sign * 0.5 * (dif1 - dif2);
        const double int_f_cos =
            0.5 * (dc * (cos_integral(2.0 * (splitting + w), t) +
                         cos_integral(2.0 * (splitting - w), t)) +
                   2.0 * kappa * (sin_integral(2.0 * (splitting + w), t) +
                                  sin_integral(2.0 * (splitting - w), t)));
        sum += k0 * t + k1 * int_f + k2 * cos_integral(2.0 * w, t) + k3 * int_f_cos;
    }
    return sum;
}

FlipElement single_flip_element(const Branch& bra, const Branch& ket, double t,
                                const ModelParams& params) {
    bra.validate(params.sites);
    ket.validate(params.sites);
    FlipElement out;
    const std::uint64_t diff = bra.config ^ ket.config;
    out.differing_sites = std::popcount(diff);
    if (out.differing_sites != 1) return out; // defined-zero, flagged via single_flip=false
    out.single_flip = true;
    const int l = std::countr_zero(diff) + 1;
    const double w = params.site_frequency[std::size_t(l - 1)];
    const double sc = std::sin(w * t) * std::cos(w * t);
    // <up(t)|v̂_i|down(t)> = i sinωt cosωt (v_down - v_up); flipping the bra
    // spin negates the combination
    const double dir = spin_of(bra.config, l) == Spin::up ? 1.0 : -1.0;
    const auto bra_sys = system_spinor(bra, t, params.system_splitting);
    const auto ket_sys = system_spinor(ket, t, params.system_splitting);
    Cd acc = 0.0;
    for (int i = 1; i <= 2; ++i) {
        const double delta = dir * (params.v(l, i, Spin::down) - params.v(l, i, Spin::up));
        acc += std::conj(bra_sys[std::size_t(i - 1)]) * ket_sys[std::size_t(i - 1)] * delta;
    }
    out.value = Cd(0.0, 1.0) * sc * acc;
    return out;
}

StateVector assemble_diagonal_approx(const BranchEnsemble& ensemble, double t) {
    ensemble.validate();
    const Eigen::Index dim = basis_dim(ensemble.params.sites);
    if (double(ensemble.branches.size()) * double(dim) > double(Eigen::Index{1} << 28))
        throw ResourceLimitError("assemble_diagonal_approx: ensemble too large to assemble");
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dim);
    for (const auto& b : ensemble.branches) {
        const double phase = -integrated_phase(b, t, ensemble.params);
        const Cd factor = b.weight * Cd(std::cos(phase), std::sin(phase));
        acc += factor * branch_state(b, t, ensemble.params).amplitudes;
    }
    return StateVector::raw(ensemble.params.sites, std::move(acc));
}

std::vector<double> phase_equation_residual(const BranchEnsemble& ensemble, double t) {
    ensemble.validate();
    const ModelParams& p = ensemble.params;
    std::vector<double> out;
    out.reserve(ensemble.branches.size());
    for (const auto& b : ensemble.branches) {
        const auto sys = system_spinor(b, t, p.system_splitting);
        const double p1 = std::norm(sys[0]);
        const double p2 = std::norm(sys[1]);
        double sum = 0.0;
        for (int l = 1; l <= p.sites; ++l) {
            const double w = p.site_frequency[std::size_t(l - 1)];
            const double sc = std::sin(w * t) * std::cos(w * t);
            const double d1 = p.v(l, 1, Spin::down) - p.v(l, 1, Spin::up);
            const double d2 = p.v(l, 2, Spin::down) - p.v(l, 2, Spin::up);
            sum += std::abs(sc) * std::abs(p1 * d1 + p2 * d2);
        }
        out.push_back(sum);
    }
    return out;
}

std::vector<PhaseRecord> phase_records(const Branch& branch, const ModelParams& params,
                                       const std::vector<double>& times) {
    std::vector<PhaseRecord> out;
    out.reserve(times.size());
    for (double t : times)
        out.push_back(PhaseRecord{branch.config, t, interaction_energy(branch, t, params),
                                  integrated_phase(branch, t, params)});
    return out;
}

double branch_self_energy(const Branch& branch, const ModelParams& params) {
    branch.validate(params.sites);
    // site factors carry zero self-energy; only the system exchange remains
    return 2.0 * params.system_splitting * std::real(std::conj(branch.c1) * branch.c2);
}

nlohmann::ordered_json ensemble_to_json(const BranchEnsemble& ensemble) {
    nlohmann::ordered_json doc;
    doc["params"] = ensemble.params.to_json();
    doc["sampled"] = !ensemble.complete();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : ensemble.branches) {
        nlohmann::ordered_json jb;
        jb["config"] = config_bitstring(b.config, ensemble.params.sites);
        jb["c1"] = {b.c1.real(), b.c1.imag()};
        jb["c2"] = {b.c2.real(), b.c2.imag()};
        jb["weight"] = {b.weight.real(), b.weight.imag()};
        arr.push_back(std::move(jb));
    }
    doc["branches"] = std::move(arr);
    return doc;
}

BranchEnsemble ensemble_from_json(const nlohmann::json& doc) {
    ModelParams params = ModelParams::from_json(doc.at("params"));
    std::vector<Branch> branches;
    for (const auto& jb : doc.at("branches")) {
        Branch b;
        b.config = parse_config_bitstring(jb.at("config").get<std::string>(), params.sites);
        b.c1 = Cd(jb.at("c1")[0].get<double>(), jb.at("c1")[1].get<double>());
        b.c2 = Cd(jb.at("c2")[0].get<double>(), jb.at("c2")[1].get<double>());
        b.weight = Cd(jb.at("weight")[0].get<double>(), jb.at("weight")[1].get<double>());
        branches.push_back(b);
    }
    return BranchEnsemble::from_table(std::move(params), std::move(branches));
}

} // namespace psim
