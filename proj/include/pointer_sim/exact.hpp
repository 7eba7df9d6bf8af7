// exact.hpp — ground-truth unitary evolution
//
// Everything the perturbative machinery approximates is checked against this
// engine. Diagonal Hamiltonians evolve by phases, generic ones by dense
// eigendecomposition (M ≤ kMaxDenseSites), and a second-order split scheme
// covers larger systems with a measured step-halving error.
#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>

#include "pointer_sim/model.hpp"
#include "pointer_sim/state.hpp"

namespace psim {

enum class EvolutionMethod { automatic, eigendecomposition, trotter };

struct EvolutionConfig {
    EvolutionMethod method = EvolutionMethod::automatic;
    double time_step = 1e-2;    // split-step size before halving
    int trotter_order = 2;      // 1 or 2
    double tolerance = 1e-9;    // target for the step-halving error estimate
    int max_halvings = 14;

    void validate() const;
};

struct EvolutionInfo {
    std::string method_used;      // "diagonal", "eigendecomposition", "trotter"
    double reported_error = 0.0;  // step-halving estimate (trotter only)
    int halvings = 0;
};

// Caches whatever the method needs (eigenpairs, diagonal phases) so that many
// propagations of the same Hamiltonian are cheap. Pure: propagate() always
// evolves the state it is given, never an accumulated internal state.
class Propagator {
public:
    Propagator(OperatorHandle hamiltonian, EvolutionConfig config = {});

    StateVector propagate(const StateVector& initial, double t) const;
    std::pair<StateVector, EvolutionInfo> propagate_with_info(const StateVector& initial,
                                                              double t) const;

    const OperatorHandle& hamiltonian() const { return hamiltonian_; }

private:
    enum class Mode { diagonal, eigendecomposition, trotter };

    OperatorHandle hamiltonian_;
    EvolutionConfig config_;
    Mode mode_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXcd eigenvectors_;
    Eigen::VectorXd split_diagonal_;
};

StateVector evolve_exact(const StateVector& state, const OperatorHandle& hamiltonian, double t,
                         const EvolutionConfig& config = {}, EvolutionInfo* info = nullptr);

// Unnormalized environment vector (length 2^M) conditioned on the system
// being at `system_index`; the two such vectors satisfy ‖χ1‖²+‖χ2‖² = 1.
Eigen::VectorXcd conditional_environment(const StateVector& state, int system_index);

} // namespace psim
