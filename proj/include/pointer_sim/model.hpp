// model.hpp — Hamiltonian family for a two-level system coupled to M two-level sites
//
// Product basis indexing, parameter validation, operator handles with
// matrix-free action, and the closed-form self-evolution of single factors.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pointer_sim/errors.hpp"
#include "pointer_sim/state.hpp"

namespace psim {

enum class Spin : int { up = 0, down = 1 };

inline Spin flip(Spin s) { return s == Spin::up ? Spin::down : Spin::up; }

// Dense matrix forms are limited to this many sites (dim 2^(M+1) = 2048).
inline constexpr int kMaxDenseSites = 10;
// State vectors are limited to this many sites (dim 2^21).
inline constexpr int kMaxStateSites = 20;

// ---------------------------------------------------------------- indexing
//
// A basis index packs (system level, site spins) into an integer:
//   bit M      : system, 0 -> level 1, 1 -> level 2
//   bit (l-1)  : site l, 0 -> up, 1 -> down
// This convention is shared by every module and by serialized states.

inline Eigen::Index basis_dim(int sites) { return Eigen::Index{1} << (sites + 1); }

inline int system_of(std::uint64_t raw, int sites) {
    return int((raw >> sites) & 1u) + 1;
}

inline Spin spin_of(std::uint64_t raw, int site) {
    return Spin(int((raw >> (site - 1)) & 1u));
}

inline std::uint64_t environment_of(std::uint64_t raw, int sites) {
    return raw & ((std::uint64_t{1} << sites) - 1);
}

inline std::uint64_t encode_basis(int system_index, std::uint64_t environment, int sites) {
    return (std::uint64_t(system_index - 1) << sites) | environment;
}

// ------------------------------------------------------------- parameters

struct ModelParams {
    int sites = 1;                        // M
    double system_splitting = 0.0;        // level splitting of the two-level system
    std::vector<double> site_frequency;   // per-site splitting, size M
    std::vector<double> coupling;         // size 4M, (site, system index, spin) row-major,
                                          // spin order (up, down)
    double coupling_scale = 1.0;          // uniform multiplier on all couplings

    void validate() const;                // throws ConfigError

    // coupling for site l in [1..M], system index i in {1,2}; includes coupling_scale
    double v(int site, int system_index, Spin s) const {
        return coupling_scale *
               coupling[std::size_t(site - 1) * 4 + std::size_t(system_index - 1) * 2 +
                        std::size_t(s)];
    }

    static ModelParams from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

// --------------------------------------------------------------- operators

enum class OperatorKind { system_self, environment_self, self, interaction, total, custom };

// Immutable handle over a Hermitian operator on the 2^(M+1)-dimensional space.
// Built-in kinds act matrix-free; dense() materializes the matrix on demand.
class OperatorHandle {
public:
    OperatorKind kind() const { return impl_->kind; }
    int sites() const { return impl_->sites; }
    Eigen::Index dim() const { return basis_dim(impl_->sites); }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    StateVector apply(const StateVector& x) const;

    // true when the operator is diagonal in the product basis
    bool is_diagonal() const { return impl_->diagonal != nullptr; }
    const Eigen::VectorXd& diagonal() const;

    Eigen::MatrixXcd dense(int max_dense_sites = kMaxDenseSites) const;

    double expectation(const StateVector& x) const;
    std::complex<double> matrix_element(const StateVector& bra, const StateVector& ket) const;

    // parameters backing a built-in operator; nullptr for custom operators
    const ModelParams* model_params() const { return impl_->params.get(); }

    // custom operators
    static OperatorHandle from_dense(int sites, Eigen::MatrixXcd matrix);
    // block acts on (system ⊗ site l); basis order (sys, spin) = (1,up),(1,down),(2,up),(2,down)
    static OperatorHandle two_factor(int sites, int site, const Eigen::Matrix4cd& block);

private:
    friend struct OperatorBuilder;
    struct Impl {
        OperatorKind kind = OperatorKind::custom;
        int sites = 0;
        std::shared_ptr<const ModelParams> params;            // built-in kinds
        std::shared_ptr<const Eigen::VectorXd> diagonal;      // set when diagonal
        std::shared_ptr<const Eigen::VectorXd> coupling_diag; // cached interaction diagonal
        std::shared_ptr<const Eigen::MatrixXcd> matrix;       // custom dense
        int local_site = 0;                                   // custom two-factor
        std::shared_ptr<const Eigen::Matrix4cd> block;
    };
    explicit OperatorHandle(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

// product-basis diagonal of the interaction: entry for (i, σ_1..σ_M) is Σ_l v(l, i, σ_l)
Eigen::VectorXd interaction_diagonal(const ModelParams& params);

struct Operators {
    OperatorHandle system_self;       // splitting E, exchanges the two system levels
    OperatorHandle environment_self;  // sum of per-site exchanges with weight ω_l
    OperatorHandle self_hamiltonian;  // system_self + environment_self
    OperatorHandle interaction;       // product-basis diagonal couplings
    OperatorHandle total;             // self + interaction
};

Operators build_operators(const ModelParams& params);

// --------------------------------------------------- closed-form evolution
//
// Single-factor self-evolution: exp(-i h t) of the 2x2 exchange Hamiltonian
// rotates a level into the other with amplitude -i sin(θ t).

// amplitudes (on level 1, on level 2) of the evolved system level i in {1,2}
std::array<std::complex<double>, 2> self_evolved_system(int system_index, double t,
                                                        double splitting);

// amplitudes (on up, on down) of the evolved site spin
std::array<std::complex<double>, 2> self_evolved_site(Spin s, double t, double frequency);

} // namespace psim
