#include "pointer_sim/state.hpp"

#include "pointer_sim/errors.hpp"
#include "pointer_sim/model.hpp"

namespace psim {

namespace {

void check_shape(int sites, const Eigen::VectorXcd& amplitudes) {
    if (sites < 1 || sites > kMaxStateSites)
        throw ResourceLimitError("StateVector: sites must be in [1, " +
                                 std::to_string(kMaxStateSites) + "], got " +
                                 std::to_string(sites));
    if (amplitudes.size() != basis_dim(sites))
        throw ConfigError("StateVector: amplitude count " + std::to_string(amplitudes.size()) +
                          " does not match dimension " + std::to_string(basis_dim(sites)));
    if (!amplitudes.allFinite()) throw ConfigError("StateVector: non-finite amplitude");
}

} // namespace

StateVector StateVector::raw(int sites, Eigen::VectorXcd amplitudes) {
    check_shape(sites, amplitudes);
    return StateVector{sites, std::move(amplitudes)};
}

StateVector StateVector::normalized(int sites, Eigen::VectorXcd amplitudes) {
    check_shape(sites, amplitudes);
    const double n = amplitudes.norm();
    if (n <= 0.0) throw ConfigError("StateVector: cannot normalize the zero vector");
    return StateVector{sites, amplitudes / n};
}

StateVector StateVector::basis_state(int sites, std::uint64_t index) {
    if (sites < 1 || sites > kMaxStateSites)
        throw ResourceLimitError("StateVector: sites out of range");
    const Eigen::Index dim = basis_dim(sites);
    if (Eigen::Index(index) >= dim) throw ConfigError("StateVector: basis index out of range");
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(dim);
    a[Eigen::Index(index)] = 1.0;
    return StateVector{sites, std::move(a)};
}

StateVector StateVector::product_state(
    int sites, std::complex<double> c1, std::complex<double> c2,
    const std::vector<std::array<std::complex<double>, 2>>& site_spinors) {
    if (int(site_spinors.size()) != sites)
        throw ConfigError("product_state: expected one spinor per site");
    // environment factor by iterated Kronecker product; site l occupies bit
    // (l-1), so each new site is placed above the sites built so far
    Eigen::VectorXcd env = Eigen::VectorXcd::Ones(1);
    for (int l = 1; l <= sites; ++l) {
        const auto& s = site_spinors[std::size_t(l - 1)];
        Eigen::VectorXcd next(env.size() * 2);
        for (Eigen::Index j = 0; j < env.size(); ++j) {
            next[j] = env[j] * s[0];
            next[j + env.size()] = env[j] * s[1];
        }
        env.swap(next);
    }
    Eigen::VectorXcd a(env.size() * 2);
    a.head(env.size()) = c1 * env;
    a.tail(env.size()) = c2 * env;
    return normalized(sites, std::move(a));
}

std::complex<double> StateVector::overlap(const StateVector& other) const {
    if (other.dim() != dim()) throw ConfigError("overlap: dimension mismatch");
    return amplitudes.dot(other.amplitudes); // Eigen dot conjugates the left factor
}

nlohmann::ordered_json state_to_json(const StateVector& state) {
    nlohmann::ordered_json doc;
    doc["format_version"] = 1;
    doc["sites"] = state.sites;
    auto pairs = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < state.dim(); ++i)
        pairs.push_back({state.amplitudes[i].real(), state.amplitudes[i].imag()});
    doc["amplitudes"] = std::move(pairs);
    return doc;
}

StateVector state_from_json(const nlohmann::json& doc) {
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1)
        throw ConfigError("state_from_json: unsupported format_version");
    const int sites = doc.at("sites").get<int>();
    const auto& pairs = doc.at("amplitudes");
    Eigen::VectorXcd a(Eigen::Index(pairs.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a[i] = std::complex<double>(pairs[std::size_t(i)][0].get<double>(),
                                    pairs[std::size_t(i)][1].get<double>());
    return StateVector::raw(sites, std::move(a));
}

} // namespace psim
