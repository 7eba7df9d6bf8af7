#include "pointer_sim/exact.hpp"

#include <cmath>
#include <sstream>

#include "pointer_sim/errors.hpp"

namespace psim {

namespace {

using Cd = std::complex<double>;

void rotate_pair_bit(Eigen::VectorXcd& a, Eigen::Index bit, double angle) {
    // exp(-i angle X) on the two states connected by `bit`
    if (angle == 0.0) return;
    const double c = std::cos(angle);
    const Cd ms(0.0, -std::sin(angle));
    const Eigen::Index dim = a.size();
    for (Eigen::Index k = 0; k < dim; ++k) {
        if (k & bit) continue;
        const Eigen::Index j = k | bit;
        const Cd lo = a[k], hi = a[j];
        a[k] = c * lo + ms * hi;
        a[j] = ms * lo + c * hi;
    }
}

void apply_self_rotations(const ModelParams& p, Eigen::VectorXcd& a, double dt) {
    // exp(-i h_self dt) factorizes exactly into commuting 2x2 rotations
    rotate_pair_bit(a, Eigen::Index{1} << p.sites, p.system_splitting * dt);
    for (int l = 1; l <= p.sites; ++l)
        rotate_pair_bit(a, Eigen::Index{1} << (l - 1), p.site_frequency[std::size_t(l - 1)] * dt);
}

void apply_diagonal_phases(const Eigen::VectorXd& diag, Eigen::VectorXcd& a, double dt) {
    const Eigen::Index dim = a.size();
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double phase = -diag[k] * dt;
        a[k] *= Cd(std::cos(phase), std::sin(phase));
    }
}

// fixed-step split evolution to time t; the self half-steps are exact, so the
// only error is the splitting of [h_self, h_interaction]
StateVector run_split(const ModelParams& p, const Eigen::VectorXd& inter_diag,
                      const StateVector& initial, double t, double dt, int order) {
    Eigen::VectorXcd a = initial.amplitudes;
    const long steps = std::max(1L, long(std::ceil(t / dt - 1e-12)));
    const double step = t / double(steps);
    for (long s = 0; s < steps; ++s) {
        if (order == 2) {
            apply_self_rotations(p, a, step / 2.0);
            apply_diagonal_phases(inter_diag, a, step);
            apply_self_rotations(p, a, step / 2.0);
        } else {
            apply_self_rotations(p, a, step);
            apply_diagonal_phases(inter_diag, a, step);
        }
    }
    return StateVector::raw(initial.sites, std::move(a));
}

} // namespace

void EvolutionConfig::validate() const {
    if (!(time_step > 0.0)) throw ConfigError("EvolutionConfig: time_step must be > 0");
    if (!(tolerance > 0.0)) throw ConfigError("EvolutionConfig: tolerance must be > 0");
    if (trotter_order != 1 && trotter_order != 2)
        throw ConfigError("EvolutionConfig: trotter_order must be 1 or 2");
    if (max_halvings < 0) throw ConfigError("EvolutionConfig: max_halvings must be >= 0");
}

Propagator::Propagator(OperatorHandle hamiltonian, EvolutionConfig config)
    : hamiltonian_(std::move(hamiltonian)), config_(config) {
    config_.validate();
    EvolutionMethod method = config_.method;
    if (method == EvolutionMethod::automatic) {
        if (hamiltonian_.is_diagonal() || hamiltonian_.sites() <= kMaxDenseSites)
            method = EvolutionMethod::eigendecomposition;
        else
            method = EvolutionMethod::trotter;
    }
    if (method == EvolutionMethod::eigendecomposition) {
        if (hamiltonian_.is_diagonal()) {
            mode_ = Mode::diagonal;
            return;
        }
        if (hamiltonian_.sites() > kMaxDenseSites)
            throw ResourceLimitError(
                "Propagator: eigendecomposition needs a dense form; " +
                std::to_string(hamiltonian_.sites()) + " sites exceeds the limit of " +
                std::to_string(kMaxDenseSites));
        mode_ = Mode::eigendecomposition;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hamiltonian_.dense());
        if (solver.info() != Eigen::Success)
            throw ToleranceError("Propagator: eigendecomposition failed");
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
        return;
    }
    // split evolution needs the self/interaction structure of the model
    if (hamiltonian_.kind() != OperatorKind::total || !hamiltonian_.model_params())
        throw ConfigError("Propagator: split evolution is defined for the total Hamiltonian");
    mode_ = Mode::trotter;
    split_diagonal_ = interaction_diagonal(*hamiltonian_.model_params());
}

StateVector Propagator::propagate(const StateVector& initial, double t) const {
    return propagate_with_info(initial, t).first;
}

std::pair<StateVector, EvolutionInfo> Propagator::propagate_with_info(const StateVector& initial,
                                                                      double t) const {
    if (initial.dim() != hamiltonian_.dim())
        throw ConfigError("Propagator: state dimension does not match the Hamiltonian");
    if (t < 0.0) throw ConfigError("Propagator: negative time");
    EvolutionInfo info;
    if (mode_ == Mode::diagonal) {
        info.method_used = "diagonal";
        Eigen::VectorXcd a = initial.amplitudes;
        apply_diagonal_phases(hamiltonian_.diagonal(), a, t);
        return {StateVector::raw(initial.sites, std::move(a)), info};
    }
    if (mode_ == Mode::eigendecomposition) {
        info.method_used = "eigendecomposition";
        Eigen::VectorXcd coeff = eigenvectors_.adjoint() * initial.amplitudes;
        for (Eigen::Index k = 0; k < coeff.size(); ++k) {
            const double phase = -eigenvalues_[k] * t;
            coeff[k] *= Cd(std::cos(phase), std::sin(phase));
        }
        return {StateVector::raw(initial.sites, eigenvectors_ * coeff), info};
    }
    info.method_used = "trotter";
    const ModelParams& p = *hamiltonian_.model_params();
    if (t == 0.0) return {initial, info};
    double dt = std::min(config_.time_step, t);
    StateVector coarse = run_split(p, split_diagonal_, initial, t, dt, config_.trotter_order);
    for (int h = 0; h <= config_.max_halvings; ++h) {
        const StateVector fine =
            run_split(p, split_diagonal_, initial, t, dt / 2.0, config_.trotter_order);
        const double err = (fine.amplitudes - coarse.amplitudes).norm();
        info.reported_error = err;
        info.halvings = h + 1;
        if (err < config_.tolerance) return {fine, info};
        coarse = fine;
        dt /= 2.0;
    }
    std::ostringstream msg;
    msg << "Propagator: split evolution did not reach tolerance " << config_.tolerance
        << " (last estimate " << info.reported_error << ")";
    throw ToleranceError(msg.str());
}

StateVector evolve_exact(const StateVector& state, const OperatorHandle& hamiltonian, double t,
                         const EvolutionConfig& config, EvolutionInfo* info) {
    Propagator prop(hamiltonian, config);
    auto [out, run_info] = prop.propagate_with_info(state, t);
    if (info) *info = run_info;
    return out;
}

Eigen::VectorXcd conditional_environment(const StateVector& state, int system_index) {
    if (system_index != 1 && system_index != 2)
        throw ConfigError("conditional_environment: system index must be 1 or 2");
    const Eigen::Index half = state.dim() / 2;
    if (system_index == 1) return state.amplitudes.head(half);
    return state.amplitudes.tail(half);
}

} // namespace psim
