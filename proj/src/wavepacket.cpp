#include "pointer_sim/wavepacket.hpp"

#include <cmath>

#include "pointer_sim/io.hpp"

namespace psim {

namespace {

using Cd = std::complex<double>;

constexpr double kTwoPi = 6.283185307179586476925286766559;

// three-point kinetic stencil with periodic boundary, (h ψ)_x =
// -(ψ_{x+1} - 2 ψ_x + ψ_{x-1}) / (2 m d²)
std::vector<Cd> apply_kinetic(const LatticeConfig& cfg, const std::vector<Cd>& psi) {
    const int n = cfg.grid_points;
    const double scale = 1.0 / (2.0 * cfg.mass * cfg.spacing * cfg.spacing);
    std::vector<Cd> out(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) {
        const Cd left = psi[std::size_t((x + n - 1) % n)];
        const Cd right = psi[std::size_t((x + 1) % n)];
        out[std::size_t(x)] = -scale * (right - 2.0 * psi[std::size_t(x)] + left);
    }
    return out;
}

Cd inner(const std::vector<Cd>& a, const std::vector<Cd>& b) {
    Cd acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

// e^{-i h t} |position R>, evolved in the plane-wave eigenbasis of the stencil
std::vector<Cd> evolved_localized(const LatticeConfig& cfg, int position, double t) {
    const int n = cfg.grid_points;
    std::vector<Cd> psi(std::size_t(n), Cd{0.0, 0.0});
    for (int j = 0; j < n; ++j) {
        const double k = kTwoPi * j / (n * cfg.spacing);
        const double energy =
            (1.0 - std::cos(k * cfg.spacing)) / (cfg.mass * cfg.spacing * cfg.spacing);
        // <x|k><k|R> e^{-iEt} with <x|k> = e^{ikxd}/√n
        const double base = -energy * t;
        for (int x = 0; x < n; ++x) {
            const double arg = k * cfg.spacing * (x - position) + base;
            psi[std::size_t(x)] += Cd(std::cos(arg), std::sin(arg)) / double(n);
        }
    }
    return psi;
}

} // namespace

void LatticeConfig::validate() const {
    if (grid_points < 8) throw ConfigError("LatticeConfig: need at least 8 grid points");
    if (!(spacing > 0.0)) throw ConfigError("LatticeConfig: spacing must be > 0");
    if (!(mass > 0.0)) throw ConfigError("LatticeConfig: mass must be > 0");
    if (wave_index <= -grid_points || wave_index >= grid_points)
        throw ConfigError("LatticeConfig: wave index out of the first zone");
}

double LatticeConfig::wavenumber() const { return kTwoPi * wave_index / (grid_points * spacing); }

LatticeConfig LatticeConfig::from_json(const nlohmann::json& doc) {
    LatticeConfig cfg;
    cfg.grid_points = doc.at("grid_points").get<int>();
    cfg.spacing = doc.value("spacing", 1.0);
    cfg.mass = doc.value("mass", 1.0);
    cfg.wave_index = doc.value("wave_index", 0);
    if (doc.value("stencil", std::string("three_point")) != "three_point")
        throw ConfigError("LatticeConfig: unknown stencil");
    cfg.validate();
    return cfg;
}

nlohmann::json LatticeConfig::to_json() const {
    nlohmann::ordered_json doc;
    doc["grid_points"] = grid_points;
    doc["spacing"] = spacing;
    doc["mass"] = mass;
    doc["stencil"] = "three_point";
    doc["wave_index"] = wave_index;
    return doc;
}

std::vector<std::complex<double>> expand_localized(const LatticeConfig& config) {
    config.validate();
    const int n = config.grid_points;
    const double k = config.wavenumber();
    std::vector<Cd> alpha(static_cast<std::size_t>(n));
    const double norm = 1.0 / std::sqrt(double(n));
    for (int r = 0; r < n; ++r) {
        const double arg = k * r * config.spacing;
        alpha[std::size_t(r)] = norm * Cd(std::cos(arg), std::sin(arg));
    }
    return alpha;
}

double band_energy(const LatticeConfig& config) {
    config.validate();
    const double k = config.wavenumber();
    return (1.0 - std::cos(k * config.spacing)) / (config.mass * config.spacing * config.spacing);
}

EnergySplit energy_decomposition(const LatticeConfig& config, double t) {
    config.validate();
    // every evolved position state is a translate of the same packet, so the
    // diagonal element is position independent
    const std::vector<Cd> packet = evolved_localized(config, 0, t);
    const double element = inner(packet, apply_kinetic(config, packet)).real();
    const auto alpha = expand_localized(config);
    double weight = 0.0;
    for (const Cd& a : alpha) weight += std::norm(a);
    EnergySplit split;
    split.diagonal_sum = weight * element;
    split.total = band_energy(config);
    split.offdiagonal_sum = split.total - split.diagonal_sum;
    return split;
}

double decohered_energy(const LatticeConfig& config, double t) {
    return energy_decomposition(config, t).diagonal_sum;
}

void write_wavepacket_csv(const LatticeConfig& config, const std::vector<double>& times,
                          const std::filesystem::path& path) {
    CsvWriter csv(path, {"t", "diag_sum", "offdiag_sum", "total", "ratio"});
    for (double t : times) {
        const EnergySplit split = energy_decomposition(config, t);
        const double ratio =
            split.total != 0.0 ? split.diagonal_sum / split.total
                               : std::numeric_limits<double>::infinity();
        csv.row({t, split.diagonal_sum, split.offdiagonal_sum, split.total, ratio});
    }
}

} // namespace psim
