// state.hpp — normalized state vectors over the product basis
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace psim {

// Complex amplitudes over the 2^(M+1)-dimensional product basis.
// Factories named `normalized`/`basis_state`/`product_state` return unit
// vectors; `raw` adopts amplitudes as-is so that evolution routines can be
// checked for norm preservation instead of silently hiding drift.
struct StateVector {
    int sites = 0;
    Eigen::VectorXcd amplitudes;

    Eigen::Index dim() const { return amplitudes.size(); }
    double norm() const { return amplitudes.norm(); }

    static StateVector raw(int sites, Eigen::VectorXcd amplitudes);
    static StateVector normalized(int sites, Eigen::VectorXcd amplitudes);
    static StateVector basis_state(int sites, std::uint64_t index);

    // (c1 |level1> + c2 |level2>) ⊗ site_1 ⊗ ... ⊗ site_M
    static StateVector product_state(int sites, std::complex<double> c1,
                                     std::complex<double> c2,
                                     const std::vector<std::array<std::complex<double>, 2>>& site_spinors);

    std::complex<double> overlap(const StateVector& other) const; // <this|other>
};

// versioned JSON serialization, amplitudes as (re, im) pairs in basis order
nlohmann::ordered_json state_to_json(const StateVector& state);
StateVector state_from_json(const nlohmann::json& doc);

} // namespace psim
