// wavepacket.hpp — plane wave expanded in lattice position states
//
// A free particle on a periodic 1D lattice with a three-point kinetic
// stencil. The plane-wave energy splits into the position-diagonal sum and
// the off-diagonal remainder; dropping the remainder ("decohered energy")
// overshoots the true energy by the reported ratio.
#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "pointer_sim/errors.hpp"

namespace psim {

enum class Stencil { three_point };

struct LatticeConfig {
    int grid_points = 64;              // n ≥ 8
    double spacing = 1.0;              // d > 0
    double mass = 1.0;                 // m > 0
    Stencil stencil = Stencil::three_point;
    int wave_index = 0;                // k = 2π j / (n d), integer j

    void validate() const;
    double wavenumber() const;         // k

    static LatticeConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

// plane-wave coefficients over the orthonormal position basis, α_R = e^{ikRd}/√n
std::vector<std::complex<double>> expand_localized(const LatticeConfig& config);

// dispersion of the three-point stencil, E(k) = (1 - cos kd)/(m d²)
double band_energy(const LatticeConfig& config);

struct EnergySplit {
    double diagonal_sum = 0.0;     // Σ_R |α_R|² <φ(R,t)| h |φ(R,t)>
    double offdiagonal_sum = 0.0;  // remainder
    double total = 0.0;            // E(k), t-independent
};

EnergySplit energy_decomposition(const LatticeConfig& config, double t);

// the energy left if every off-diagonal overlap were zeroed
double decohered_energy(const LatticeConfig& config, double t);

void write_wavepacket_csv(const LatticeConfig& config, const std::vector<double>& times,
                          const std::filesystem::path& path);

} // namespace psim
