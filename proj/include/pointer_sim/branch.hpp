// branch.hpp — branch states, interaction phases, and the diagonal approximation
//
// A branch couples one environment configuration with a system superposition.
// Branches self-evolve factor-by-factor, stay orthonormal, and acquire the
// integrated interaction energy as a phase; single-spin-flip matrix elements
// are the terms that the phase-only (diagonal) approximation drops.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "pointer_sim/model.hpp"
#include "pointer_sim/state.hpp"

namespace psim {

struct Branch {
    std::uint64_t config = 0;              // bit (l-1) = site l, 0 up / 1 down
    std::complex<double> c1{1.0, 0.0};     // system coefficients, |c1|²+|c2|² = 1
    std::complex<double> c2{0.0, 0.0};
    std::complex<double> weight{1.0, 0.0}; // ensemble weight α

    void validate(int sites) const;
};

// one sampled point of λ(t) and Λ(t) = ∫λ for a branch
struct PhaseRecord {
    std::uint64_t config = 0;
    double time = 0.0;
    double interaction_energy = 0.0;  // λ
    double integrated_phase = 0.0;    // Λ
};

struct BranchEnsemble {
    ModelParams params;
    std::vector<Branch> branches;

    void validate() const;   // Σ|α|² = 1 within 1e-10, configs distinct
    bool complete() const;   // covers all 2^M configurations

    StateVector initial_state() const; // Σ α |ν(0)>

    // generators ---------------------------------------------------------
    // product state: same system coefficients everywhere, weights from the
    // site spinors (α_ν = Π_l <σ_l|spinor_l>)
    static BranchEnsemble product_state(
        ModelParams params, std::complex<double> c1, std::complex<double> c2,
        const std::vector<std::array<std::complex<double>, 2>>& site_spinors);
    // independent system coefficients per branch, uniform on the Bloch
    // sphere, with random normalized weights
    static BranchEnsemble random_bloch(ModelParams params, std::uint64_t seed);
    // system coefficients concentrated on level 1 or 2 (random choice per
    // branch) with random normalized weights; every branch is then an
    // eigenstate of the interaction
    static BranchEnsemble basis_aligned_random(ModelParams params, std::uint64_t seed);
    // user-supplied table
    static BranchEnsemble from_table(ModelParams params, std::vector<Branch> branches);
    // seeded sample of `count` distinct configurations for systems too large
    // to enumerate (up to 64 sites); closed-form branch quantities still work
    static BranchEnsemble sampled_random(ModelParams params, std::size_t count,
                                         std::uint64_t seed);
};

// (c1 |level1(t)> + c2 |level2(t)>) ⊗ Π_l |σ_l(t)>
StateVector branch_state(const Branch& branch, double t, const ModelParams& params);

// λ(t) = <ν(t)| h_interaction |ν(t)>
double interaction_energy(const Branch& branch, double t, const ModelParams& params);

// Λ(t) = ∫_0^t λ(s) ds, in closed form (resonant denominators handled by their limits)
double integrated_phase(const Branch& branch, double t, const ModelParams& params);

struct FlipElement {
    std::complex<double> value{0.0, 0.0};
    int differing_sites = 0;          // Hamming distance of the two configurations
    bool single_flip = false;         // value is defined-zero unless exactly one site differs
};

// <bra(t)| h_interaction |ket(t)> for configurations differing at exactly one
// site; defined-zero (flagged) for zero or ≥2 differing sites
FlipElement single_flip_element(const Branch& bra, const Branch& ket, double t,
                                const ModelParams& params);

// Σ_ν α_ν |ν(t)> e^{-iΛ_ν(t)}
StateVector assemble_diagonal_approx(const BranchEnsemble& ensemble, double t);

// Per-branch size of the dropped coupling row: Σ_l |<ν(t)|h_I|flip_l ν(t)>|,
// with the neighbor carrying the same system coefficients.
std::vector<double> phase_equation_residual(const BranchEnsemble& ensemble, double t);

std::vector<PhaseRecord> phase_records(const Branch& branch, const ModelParams& params,
                                       const std::vector<double>& times);

// <ν(t)| h_self |ν(t)>; constant in t (the branch evolves under h_self itself)
double branch_self_energy(const Branch& branch, const ModelParams& params);

nlohmann::ordered_json ensemble_to_json(const BranchEnsemble& ensemble);
BranchEnsemble ensemble_from_json(const nlohmann::json& doc);

} // namespace psim
