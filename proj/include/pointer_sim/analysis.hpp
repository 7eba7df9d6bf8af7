// analysis.hpp — diagnostics, scaling statistics, and selection mechanisms
//
// Reduced density matrix, decoherence factor, observable decomposition,
// energy series against the exact engine, size scaling of diagonal vs
// single-flip matrix elements, stationary-phase selection on the spin-flip
// graph, and the phase-weighted transition (interference) filter.
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pointer_sim/branch.hpp"
#include "pointer_sim/exact.hpp"
#include "pointer_sim/model.hpp"

namespace psim {

// --------------------------------------------------------------- reduction

// 2x2 partial trace over the environment; entry (i,j) = Σ_e A[i,e] conj(A[j,e])
Eigen::Matrix2cd reduced_density_matrix(const StateVector& state);

// normalized overlap of the conditional environments, r = <χ1|χ2>/(‖χ1‖‖χ2‖);
// defined as 0 when either conditional weight vanishes
std::complex<double> decoherence_factor(const StateVector& state);

double purity(const Eigen::Matrix2cd& rho);

struct ObservableSplit {
    double diagonal_part = 0.0;
    double offdiagonal_part = 0.0;
    double total = 0.0;
};

// <Q> split into level-diagonal and cross terms; Q must be Hermitian
ObservableSplit observable_decomposition(const StateVector& state, const Eigen::Matrix2cd& observable);

// ------------------------------------------------------------- diagnostics

struct DiagnosticsSeries {
    std::vector<double> times;
    std::vector<double> self_energy;         // <h_0>
    std::vector<double> interaction_energy;  // <h_I>
    std::vector<double> total_energy;        // <h>
    std::vector<std::complex<double>> decoherence;
    std::vector<double> purity;
    std::vector<double> norm;
};

DiagnosticsSeries run_diagnostics(const StateVector& initial, const ModelParams& params,
                                  const std::vector<double>& times,
                                  const EvolutionConfig& config = {});

void write_diagnostics_csv(const DiagnosticsSeries& series, const std::filesystem::path& path);

// closed-form decoherence factor for the static-environment limit
// (splitting and site frequencies all zero) of a product initial state
std::complex<double> static_limit_decoherence_factor(
    const ModelParams& params, std::complex<double> c1, std::complex<double> c2,
    const std::vector<std::array<std::complex<double>, 2>>& site_spinors, double t);

// ----------------------------------------------------------------- scaling

struct ScalingReport {
    std::vector<int> env_sizes;        // strictly increasing M values
    std::vector<double> diag_mean;     // mean diagonal element per M
    std::vector<double> diag_std;      // std of the diagonal element per M
    std::vector<double> offdiag_rms;   // rms 2-norm of the single-flip row per M
    double diag_slope = 0.0;           // log-log fits with ~95% half-widths
    double diag_halfwidth = 0.0;
    double offdiag_slope = 0.0;
    double offdiag_halfwidth = 0.0;
    int samples = 0;
    std::uint64_t seed = 0;
    double time = 0.0;
    std::string coupling_law;
};

// Per sample: site phases ω_l t drawn uniform on [0, π], couplings from
// coupling_law ("uniform": iid on [0,1]; "fixed:g": all equal g). Closed
// forms only, no state vectors, so env sizes up to 2^12 stay cheap.
ScalingReport fluctuation_scaling(const std::vector<int>& env_sizes, double t,
                                  const std::string& coupling_law, int samples,
                                  std::uint64_t seed, int workers = 1);

nlohmann::ordered_json scaling_report_to_json(const ScalingReport& report);

// --------------------------------------------------------------- selection

struct PointerSet {
    int sites = 0;
    double time = 0.0;
    std::vector<std::uint64_t> maxima;       // strict local maxima over single flips
    std::vector<std::uint64_t> minima;
    std::vector<double> maxima_phase;        // Λ at the selection time
    std::vector<double> minima_phase;
    std::vector<std::vector<std::uint64_t>> plateaus; // flagged equal-Λ clusters
    std::string neighborhood = "hamming-1";
};

// strict extrema of a full landscape over the M-bit flip graph;
// landscape[config] = value, size must be 2^M
PointerSet find_extrema(const std::vector<double>& landscape, int sites);

// Λ landscape of the ensemble at time t. The ensemble must either cover all
// 2^M configurations or contain every single-flip neighbor of each branch.
PointerSet find_pointer_states(const BranchEnsemble& ensemble, double t);

nlohmann::ordered_json pointer_set_to_json(const PointerSet& set);

// Quality of the stationary-phase restriction: the assembled state rebuilt
// from the pointer branches alone (weights renormalized) compared with the
// full assembly. Reported, never asserted against a threshold.
struct RestrictionReport {
    std::size_t kept = 0;          // branches in the pointer set
    double weight_fraction = 0.0;  // Σ|α|² carried by the pointer branches
    double overlap = 0.0;          // |<full|restricted>|
    double observable_difference = 0.0;
};

RestrictionReport pointer_restriction_quality(const BranchEnsemble& ensemble, double t,
                                              const Eigen::Matrix2cd& observable);

// ------------------------------------------------------------ interference

struct InterferenceReport {
    std::vector<std::complex<double>> row_sums;  // α_ν Σ_ν' <ν'|probe|ν> e^{i(Λ_ν'-Λ_ν)}
    PointerSet pointers;
    double concentration = 0.0;            // |row|² mass on pointer rows / total
    double unweighted_concentration = 0.0; // same with all phases set to 1
};

InterferenceReport interference_filter(const BranchEnsemble& ensemble, double t,
                                       const OperatorHandle& probe, int workers = 1);

// row sums with caller-supplied phases (used for scrambled baselines)
std::vector<std::complex<double>> interference_row_sums(const BranchEnsemble& ensemble, double t,
                                                        const OperatorHandle& probe,
                                                        const std::vector<double>& phases,
                                                        int workers = 1);

// seeded random Hermitian operator on (system ⊗ one random site)
OperatorHandle default_probe(const ModelParams& params, std::uint64_t seed);

// ------------------------------------------------------- projector reading

// Full projector of the assembled state vs the diagonal branch mixture
// Σ|α|² |ν(t)><ν(t)| (both as dense matrices; dense-size limits apply).
struct ProjectorParts {
    Eigen::MatrixXcd full;
    Eigen::MatrixXcd diagonal_mixture;
};
ProjectorParts ensemble_projector_parts(const BranchEnsemble& ensemble, double t);

} // namespace psim
