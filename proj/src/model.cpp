#include "pointer_sim/model.hpp"

#include <cmath>

namespace psim {

// ------------------------------------------------------------- parameters

void ModelParams::validate() const {
    if (sites < 1) throw ConfigError("ModelParams: sites must be >= 1");
    if (!std::isfinite(system_splitting))
        throw ConfigError("ModelParams: non-finite system splitting");
    if (int(site_frequency.size()) != sites)
        throw ConfigError("ModelParams: expected " + std::to_string(sites) +
                          " site frequencies, got " + std::to_string(site_frequency.size()));
    if (int(coupling.size()) != 4 * sites)
        throw ConfigError("ModelParams: expected " + std::to_string(4 * sites) +
                          " couplings, got " + std::to_string(coupling.size()));
    for (double w : site_frequency)
        if (!std::isfinite(w)) throw ConfigError("ModelParams: non-finite site frequency");
    for (double c : coupling)
        if (!std::isfinite(c)) throw ConfigError("ModelParams: non-finite coupling");
    if (!std::isfinite(coupling_scale) || coupling_scale < 0.0)
        throw ConfigError("ModelParams: coupling_scale must be finite and >= 0");
}

ModelParams ModelParams::from_json(const nlohmann::json& doc) {
    ModelParams p;
    p.sites = doc.at("M").get<int>();
    p.system_splitting = doc.at("E").get<double>();
    p.site_frequency = doc.at("omega").get<std::vector<double>>();
    p.coupling = doc.at("v").get<std::vector<double>>();
    p.coupling_scale = doc.value("coupling_scale", 1.0);
    p.validate();
    return p;
}

nlohmann::json ModelParams::to_json() const {
    nlohmann::ordered_json doc;
    doc["M"] = sites;
    doc["E"] = system_splitting;
    doc["omega"] = site_frequency;
    doc["v"] = coupling;
    doc["coupling_scale"] = coupling_scale;
    return doc;
}

// --------------------------------------------------------------- operators

Eigen::VectorXd interaction_diagonal(const ModelParams& p) {
    const Eigen::Index dim = basis_dim(p.sites);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const int i = system_of(std::uint64_t(k), p.sites);
        double sum = 0.0;
        for (int l = 1; l <= p.sites; ++l) sum += p.v(l, i, spin_of(std::uint64_t(k), l));
        d[k] = sum;
    }
    return d;
}

namespace {

using Cd = std::complex<double>;

void apply_system_exchange(const ModelParams& p, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    const double e = p.system_splitting;
    if (e == 0.0) return;
    const Eigen::Index half = x.size() / 2;
    for (Eigen::Index k = 0; k < half; ++k) {
        y[k] += e * x[k + half];
        y[k + half] += e * x[k];
    }
}

void apply_site_exchanges(const ModelParams& p, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    const Eigen::Index dim = x.size();
    for (int l = 1; l <= p.sites; ++l) {
        const double w = p.site_frequency[std::size_t(l - 1)];
        if (w == 0.0) continue;
        const Eigen::Index bit = Eigen::Index{1} << (l - 1);
        for (Eigen::Index k = 0; k < dim; ++k) y[k] += w * x[k ^ bit];
    }
}

void apply_two_factor(int sites, int site, const Eigen::Matrix4cd& block,
                      const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    const Eigen::Index dim = x.size();
    const Eigen::Index site_bit = Eigen::Index{1} << (site - 1);
    const Eigen::Index sys_bit = Eigen::Index{1} << sites;
    for (Eigen::Index k = 0; k < dim; ++k) {
        const int row = int(((k & sys_bit) ? 2 : 0) + ((k & site_bit) ? 1 : 0));
        Cd acc = 0.0;
        for (int col = 0; col < 4; ++col) {
            Eigen::Index src = k & ~(sys_bit | site_bit);
            if (col & 2) src |= sys_bit;
            if (col & 1) src |= site_bit;
            acc += block(row, col) * x[src];
        }
        y[k] = acc;
    }
}

} // namespace

struct OperatorBuilder {
    static OperatorHandle make(OperatorKind kind, std::shared_ptr<const ModelParams> params,
                               std::shared_ptr<const Eigen::VectorXd> diagonal,
                               std::shared_ptr<const Eigen::VectorXd> coupling_diag = nullptr) {
        auto impl = std::make_shared<OperatorHandle::Impl>();
        impl->kind = kind;
        impl->sites = params->sites;
        impl->params = std::move(params);
        impl->diagonal = std::move(diagonal);
        impl->coupling_diag = std::move(coupling_diag);
        return OperatorHandle(std::move(impl));
    }
    static OperatorHandle make_dense(int sites, Eigen::MatrixXcd matrix) {
        auto impl = std::make_shared<OperatorHandle::Impl>();
        impl->kind = OperatorKind::custom;
        impl->sites = sites;
        impl->matrix = std::make_shared<const Eigen::MatrixXcd>(std::move(matrix));
        return OperatorHandle(std::move(impl));
    }
    static OperatorHandle make_two_factor(int sites, int site, const Eigen::Matrix4cd& block) {
        auto impl = std::make_shared<OperatorHandle::Impl>();
        impl->kind = OperatorKind::custom;
        impl->sites = sites;
        impl->local_site = site;
        impl->block = std::make_shared<const Eigen::Matrix4cd>(block);
        return OperatorHandle(std::move(impl));
    }
};

Operators build_operators(const ModelParams& params) {
    params.validate();
    auto shared = std::make_shared<const ModelParams>(params);

    const bool system_static = params.system_splitting == 0.0;
    bool sites_static = true;
    for (double w : params.site_frequency) sites_static = sites_static && (w == 0.0);

    const Eigen::Index dim = basis_dim(params.sites);
    auto zero_diag = [&] { return std::make_shared<const Eigen::VectorXd>(Eigen::VectorXd::Zero(dim)); };
    auto inter_diag = std::make_shared<const Eigen::VectorXd>(interaction_diagonal(params));

    // an exchange operator degenerates to zero (hence diagonal) when its
    // weights vanish; the total is diagonal only when both self parts vanish
    auto sys = OperatorBuilder::make(OperatorKind::system_self, shared,
                                     system_static ? zero_diag() : nullptr);
    auto env = OperatorBuilder::make(OperatorKind::environment_self, shared,
                                     sites_static ? zero_diag() : nullptr);
    auto self = OperatorBuilder::make(OperatorKind::self, shared,
                                      (system_static && sites_static) ? zero_diag() : nullptr);
    auto inter = OperatorBuilder::make(OperatorKind::interaction, shared, inter_diag, inter_diag);
    auto total = OperatorBuilder::make(OperatorKind::total, shared,
                                       (system_static && sites_static) ? inter_diag : nullptr,
                                       inter_diag);
    return Operators{std::move(sys), std::move(env), std::move(self), std::move(inter),
                     std::move(total)};
}

Eigen::VectorXcd OperatorHandle::apply(const Eigen::VectorXcd& x) const {
    if (x.size() != dim()) throw ConfigError("OperatorHandle::apply: dimension mismatch");
    const auto& im = *impl_;
    if (im.matrix) return (*im.matrix) * x;
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
    if (im.block) {
        apply_two_factor(im.sites, im.local_site, *im.block, x, y);
        return y;
    }
    const ModelParams& p = *im.params;
    switch (im.kind) {
        case OperatorKind::system_self:
            apply_system_exchange(p, x, y);
            break;
        case OperatorKind::environment_self:
            apply_site_exchanges(p, x, y);
            break;
        case OperatorKind::self:
            apply_system_exchange(p, x, y);
            apply_site_exchanges(p, x, y);
            break;
        case OperatorKind::interaction:
            y = im.coupling_diag->array() * x.array();
            break;
        case OperatorKind::total:
            apply_system_exchange(p, x, y);
            apply_site_exchanges(p, x, y);
            y.array() += im.coupling_diag->array() * x.array();
            break;
        case OperatorKind::custom:
            throw ConfigError("OperatorHandle::apply: empty custom operator");
    }
    return y;
}

StateVector OperatorHandle::apply(const StateVector& x) const {
    return StateVector::raw(x.sites, apply(x.amplitudes));
}

const Eigen::VectorXd& OperatorHandle::diagonal() const {
    if (!impl_->diagonal)
        throw ConfigError("OperatorHandle::diagonal: operator is not product-basis diagonal");
    return *impl_->diagonal;
}

Eigen::MatrixXcd OperatorHandle::dense(int max_dense_sites) const {
    if (impl_->matrix) return *impl_->matrix;
    if (impl_->sites > max_dense_sites)
        throw ResourceLimitError("OperatorHandle::dense: " + std::to_string(impl_->sites) +
                                 " sites exceeds the dense limit of " +
                                 std::to_string(max_dense_sites));
    const Eigen::Index n = dim();
    Eigen::MatrixXcd m(n, n);
    Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        unit[j] = 1.0;
        m.col(j) = apply(unit);
        unit[j] = 0.0;
    }
    return m;
}

double OperatorHandle::expectation(const StateVector& x) const {
    return x.amplitudes.dot(apply(x.amplitudes)).real();
}

std::complex<double> OperatorHandle::matrix_element(const StateVector& bra,
                                                    const StateVector& ket) const {
    return bra.amplitudes.dot(apply(ket.amplitudes));
}

OperatorHandle OperatorHandle::from_dense(int sites, Eigen::MatrixXcd matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != basis_dim(sites))
        throw ConfigError("OperatorHandle::from_dense: shape mismatch");
    const double defect = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-12 * std::max(1.0, matrix.cwiseAbs().maxCoeff()))
        throw ConfigError("OperatorHandle::from_dense: matrix is not Hermitian");
    return OperatorBuilder::make_dense(sites, std::move(matrix));
}

OperatorHandle OperatorHandle::two_factor(int sites, int site, const Eigen::Matrix4cd& block) {
    if (site < 1 || site > sites) throw ConfigError("OperatorHandle::two_factor: bad site");
    if ((block - block.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw ConfigError("OperatorHandle::two_factor: block is not Hermitian");
    return OperatorBuilder::make_two_factor(sites, site, block);
}

// --------------------------------------------------- closed-form evolution

std::array<std::complex<double>, 2> self_evolved_system(int system_index, double t,
                                                        double splitting) {
    if (system_index != 1 && system_index != 2)
        throw ConfigError("self_evolved_system: system index must be 1 or 2");
    const double c = std::cos(splitting * t);
    const Cd ms = Cd(0.0, -std::sin(splitting * t));
    if (system_index == 1) return {Cd(c, 0.0), ms};
    return {ms, Cd(c, 0.0)};
}

std::array<std::complex<double>, 2> self_evolved_site(Spin s, double t, double frequency) {
    const double c = std::cos(frequency * t);
    const Cd ms = Cd(0.0, -std::sin(frequency * t));
    if (s == Spin::up) return {Cd(c, 0.0), ms};
    return {ms, Cd(c, 0.0)};
}

} // namespace psim
