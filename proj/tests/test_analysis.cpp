#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>

#include "pointer_sim/analysis.hpp"
#include "pointer_sim/errors.hpp"
#include "pointer_sim/rng.hpp"

using namespace psim;
using Cd = std::complex<double>;

namespace {

ModelParams random_params(int sites, std::uint64_t seed, double freq_hi = 1.5,
                          double coupling_lo = -1.0, double coupling_hi = 1.0) {
    auto rng = RandomStream::substream(seed, 3);
    ModelParams p;
    p.sites = sites;
    p.system_splitting = rng.uniform(-freq_hi, freq_hi);
    p.site_frequency.resize(std::size_t(sites));
    for (auto& w : p.site_frequency) w = rng.uniform(-freq_hi, freq_hi);
    p.coupling.resize(std::size_t(4 * sites));
    for (auto& v : p.coupling) v = rng.uniform(coupling_lo, coupling_hi);
    return p;
}

std::array<Cd, 2> random_spinor(RandomStream& rng) {
    const double theta = std::acos(1.0 - 2.0 * rng.uniform());
    return {Cd(std::cos(theta / 2.0), 0.0), std::sin(theta / 2.0) * rng.unit_phase()};
}

StateVector random_evolved_state(int sites, std::uint64_t seed, double t) {
    const ModelParams p = random_params(sites, seed);
    auto rng = RandomStream::substream(seed, 5);
    Eigen::VectorXcd a(basis_dim(sites));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.gaussian_complex();
    return evolve_exact(StateVector::normalized(sites, std::move(a)),
                        build_operators(p).total, t);
}

Eigen::Matrix2cd random_hermitian2(std::uint64_t seed) {
    auto rng = RandomStream::substream(seed, 7);
    Eigen::Matrix2cd g;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) g(r, c) = rng.gaussian_complex();
    return 0.5 * (g + g.adjoint());
}

// independent exhaustive extremum scan over the full flip graph
void exhaustive_extrema(const std::vector<double>& landscape, int sites,
                        std::vector<std::uint64_t>& maxima, std::vector<std::uint64_t>& minima) {
    const std::uint64_t count = std::uint64_t{1} << sites;
    for (std::uint64_t cfg = 0; cfg < count; ++cfg) {
        bool strictly_above = true, strictly_below = true;
        for (int l = 1; l <= sites; ++l) {
            const double other = landscape[std::size_t(cfg ^ (std::uint64_t{1} << (l - 1)))];
            if (!(landscape[std::size_t(cfg)] > other)) strictly_above = false;
            if (!(landscape[std::size_t(cfg)] < other)) strictly_below = false;
        }
        if (strictly_above) maxima.push_back(cfg);
        if (strictly_below) minima.push_back(cfg);
    }
}

} // namespace

TEST_CASE("observable decomposition: identity, orthogonal branches, full contraction") {
    const StateVector state = random_evolved_state(4, 1, 1.1);
    const ObservableSplit id_split =
        observable_decomposition(state, Eigen::Matrix2cd::Identity());
    CHECK(id_split.total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(id_split.offdiagonal_part == 0.0);
    CHECK(id_split.diagonal_part == doctest::Approx(1.0).epsilon(1e-12));

    // fully correlated state: conditional environments orthogonal
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(basis_dim(3));
    a[Eigen::Index(encode_basis(1, 0b001, 3))] = Cd{0.6, 0.0};
    a[Eigen::Index(encode_basis(2, 0b100, 3))] = Cd{0.0, 0.8};
    const StateVector correlated = StateVector::raw(3, std::move(a));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ObservableSplit split =
            observable_decomposition(correlated, random_hermitian2(seed));
        CHECK(std::abs(split.offdiagonal_part) == 0.0);
    }

    // total equals the direct contraction <Φ|Q ⊗ 1|Φ>
    const Eigen::Matrix2cd q = random_hermitian2(77);
    const ObservableSplit split = observable_decomposition(state, q);
    Cd direct = 0.0;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            for (std::uint64_t e = 0; e < (1u << 4); ++e)
                direct += std::conj(state.amplitudes[Eigen::Index(encode_basis(i, e, 4))]) *
                          q(i - 1, j - 1) *
                          state.amplitudes[Eigen::Index(encode_basis(j, e, 4))];
    CHECK(std::abs(split.total - direct.real()) <= 1e-12);
    CHECK(std::abs(direct.imag()) <= 1e-12);

    Eigen::Matrix2cd skew = Eigen::Matrix2cd::Zero();
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS(observable_decomposition(state, skew), ConfigError);
}

TEST_CASE("reduced density matrix is a valid two-level state") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const StateVector state = random_evolved_state(4, 100 + seed, 0.9);
        const Eigen::Matrix2cd rho = reduced_density_matrix(state);
        CHECK(std::abs(rho.trace().real() - 1.0) <= 1e-12);
        CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        const double pur = purity(rho);
        CHECK(pur >= 0.5 - 1e-12);
        CHECK(pur <= 1.0 + 1e-12);
        // decoherence factor against the density-matrix entries
        const double p1 = rho(0, 0).real();
        const double p2 = rho(1, 1).real();
        if (p1 * p2 > 1e-12) {
            const Cd expected = rho(1, 0) / std::sqrt(p1 * p2);
            CHECK(std::abs(decoherence_factor(state) - expected) <= 1e-10);
        }
        CHECK(std::abs(decoherence_factor(state)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("diagnostics with no interaction keep coherence and purity flat") {
    ModelParams p = random_params(4, 201);
    p.coupling.assign(p.coupling.size(), 0.0);
    auto rng = RandomStream::substream(202, 0);
    const auto sys = random_spinor(rng);
    std::vector<std::array<Cd, 2>> spinors;
    for (int l = 0; l < p.sites; ++l) spinors.push_back(random_spinor(rng));
    const StateVector initial = StateVector::product_state(p.sites, sys[0], sys[1], spinors);
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(i * 0.2);
    const DiagnosticsSeries series = run_diagnostics(initial, p, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(std::abs(std::abs(series.decoherence[i]) - std::abs(series.decoherence[0])) <=
              1e-10);
        CHECK(std::abs(series.purity[i] - series.purity[0]) <= 1e-10);
        CHECK(std::abs(series.norm[i] - 1.0) <= 1e-10);
        CHECK(std::abs(series.total_energy[i] - series.total_energy[0]) <= 1e-10);
    }
}

TEST_CASE("static-limit decoherence factor decays and matches the closed form") {
    ModelParams p = random_params(8, 301, 0.0, 0.0, 1.0);
    p.system_splitting = 0.0;
    p.site_frequency.assign(std::size_t(p.sites), 0.0);
    auto rng = RandomStream::substream(302, 0);
    const auto sys = random_spinor(rng);
    std::vector<std::array<Cd, 2>> spinors;
    for (int l = 0; l < p.sites; ++l) spinors.push_back(random_spinor(rng));
    const StateVector initial = StateVector::product_state(p.sites, sys[0], sys[1], spinors);
    std::vector<double> times;
    for (int i = 0; i <= 100; ++i) times.push_back(i * 0.1);
    const DiagnosticsSeries series = run_diagnostics(initial, p, times);
    double min_abs = 1.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Cd closed =
            static_limit_decoherence_factor(p, sys[0], sys[1], spinors, times[i]);
        CHECK(std::abs(series.decoherence[i] - closed) <= 1e-10);
        min_abs = std::min(min_abs, std::abs(series.decoherence[i]));
    }
    CHECK(std::abs(series.decoherence[0]) == doctest::Approx(1.0).epsilon(1e-12));
    std::cout << "static-limit min |r| over the window: " << min_abs << "\n";
    CHECK(min_abs < 0.1);
}

TEST_CASE("self-energy drift shrinks with the coupling scale") {
    ModelParams p = random_params(5, 401);
    auto rng = RandomStream::substream(402, 0);
    const auto sys = random_spinor(rng);
    std::vector<std::array<Cd, 2>> spinors;
    for (int l = 0; l < p.sites; ++l) spinors.push_back(random_spinor(rng));
    const StateVector initial = StateVector::product_state(p.sites, sys[0], sys[1], spinors);
    std::vector<double> times;
    for (int i = 0; i <= 50; ++i) times.push_back(i * 0.1);
    std::vector<double> drifts;
    for (double scale : {0.04, 0.02, 0.01}) {
        p.coupling_scale = scale;
        const DiagnosticsSeries series = run_diagnostics(initial, p, times);
        double drift = 0.0;
        for (double e : series.self_energy)
            drift = std::max(drift, std::abs(e - series.self_energy.front()));
        drifts.push_back(drift);
    }
    std::cout << "self-energy drifts at {0.04, 0.02, 0.01}: " << drifts[0] << ", " << drifts[1]
              << ", " << drifts[2] << "\n";
    CHECK(drifts[1] < drifts[0]);
    CHECK(drifts[2] < drifts[1]);
}

TEST_CASE("diagnostics validate the time grid") {
    const ModelParams p = random_params(3, 501);
    const StateVector s = StateVector::basis_state(3, 0);
    CHECK_THROWS_AS(run_diagnostics(s, p, {0.5, 1.0}), ConfigError);
    CHECK_THROWS_AS(run_diagnostics(s, p, {0.0, 1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(run_diagnostics(s, p, {}), ConfigError);
}

TEST_CASE("scaling statistics: equal couplings make an exact linear diagonal") {
    const ScalingReport report =
        fluctuation_scaling({8, 16, 32}, 0.9, "fixed:0.7", 120, 11);
    for (std::size_t i = 0; i < report.env_sizes.size(); ++i) {
        CHECK(std::abs(report.diag_mean[i] - 0.7 * report.env_sizes[i]) <= 1e-12);
        CHECK(report.diag_std[i] <= 1e-12);
        CHECK(report.offdiag_rms[i] == 0.0);
    }
    CHECK(report.diag_slope == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scaling statistics: zero time kills the off-diagonal row exactly") {
    const ScalingReport report = fluctuation_scaling({8, 16}, 0.0, "uniform", 100, 13);
    for (double r : report.offdiag_rms) CHECK(r == 0.0);
    for (double d : report.diag_mean) CHECK(d > 0.0);
}

TEST_CASE("scaling slopes recover the linear and square-root laws") {
    const ScalingReport report =
        fluctuation_scaling({8, 16, 32, 64, 128}, 1.0, "uniform", 200, 17);
    CHECK(std::abs(report.diag_slope - 1.0) <= 0.05);
    CHECK(std::abs(report.offdiag_slope - 0.5) <= 0.1);
    std::cout << "scaling slopes: diag " << report.diag_slope << " +- " << report.diag_halfwidth
              << ", offdiag " << report.offdiag_slope << " +- " << report.offdiag_halfwidth
              << "\n";
}

TEST_CASE("scaling runs are reproducible and worker-count independent") {
    const ScalingReport a = fluctuation_scaling({8, 16, 32}, 1.0, "uniform", 100, 23, 1);
    const ScalingReport b = fluctuation_scaling({8, 16, 32}, 1.0, "uniform", 100, 23, 4);
    CHECK(a.diag_mean == b.diag_mean);
    CHECK(a.diag_std == b.diag_std);
    CHECK(a.offdiag_rms == b.offdiag_rms);
    CHECK(a.diag_slope == b.diag_slope);
    const ScalingReport c = fluctuation_scaling({8, 16, 32}, 1.0, "uniform", 100, 23, 1);
    CHECK(a.offdiag_rms == c.offdiag_rms);
}

TEST_CASE("scaling rejects undersized requests") {
    CHECK_THROWS_AS(fluctuation_scaling({4, 8}, 1.0, "uniform", 100, 1), ConfigError);
    CHECK_THROWS_AS(fluctuation_scaling({8, 16}, 1.0, "uniform", 50, 1), ConfigError);
    CHECK_THROWS_AS(fluctuation_scaling({8, 16}, 1.0, "cubic", 100, 1), ConfigError);
    CHECK_THROWS_AS(fluctuation_scaling({16, 8}, 1.0, "uniform", 100, 1), ConfigError);
}

TEST_CASE("hand-built landscape: extrema by inspection") {
    // values over the two-site flip graph, indexed by configuration
    std::vector<double> landscape(4);
    landscape[0b00] = 3.0;
    landscape[0b01] = 1.0;
    landscape[0b10] = 1.0;
    landscape[0b11] = 0.0;
    const PointerSet set = find_extrema(landscape, 2);
    REQUIRE(set.maxima.size() == 1);
    REQUIRE(set.minima.size() == 1);
    CHECK(set.maxima[0] == 0b00);
    CHECK(set.maxima_phase[0] == 3.0);
    CHECK(set.minima[0] == 0b11);
    CHECK(set.plateaus.empty());
}

TEST_CASE("constant landscape: no strict extrema, one plateau over everything") {
    const std::vector<double> landscape(16, 2.5);
    const PointerSet set = find_extrema(landscape, 4);
    CHECK(set.maxima.empty());
    CHECK(set.minima.empty());
    REQUIRE(set.plateaus.size() == 1);
    CHECK(set.plateaus[0].size() == 16);
}

TEST_CASE("identical branch data produce one flagged plateau") {
    ModelParams p = random_params(3, 601);
    // make every coupling identical so the phase cannot depend on the branch
    p.coupling.assign(p.coupling.size(), 0.4);
    std::vector<Branch> table;
    for (std::uint64_t cfg = 0; cfg < 8; ++cfg) {
        Branch b;
        b.config = cfg;
        b.c1 = Cd{0.6, 0.0};
        b.c2 = Cd{0.0, 0.8};
        b.weight = Cd{1.0 / std::sqrt(8.0), 0.0};
        table.push_back(b);
    }
    const BranchEnsemble ens = BranchEnsemble::from_table(p, table);
    const PointerSet set = find_pointer_states(ens, 1.2);
    CHECK(set.maxima.empty());
    CHECK(set.minima.empty());
    REQUIRE(set.plateaus.size() == 1);
    CHECK(set.plateaus[0].size() == 8);
}

TEST_CASE("random landscapes match the exhaustive scan") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto rng = RandomStream::substream(700 + seed, 0);
        std::vector<double> landscape(256);
        for (auto& x : landscape) x = rng.uniform(-5.0, 5.0);
        const PointerSet set = find_extrema(landscape, 8);
        std::vector<std::uint64_t> maxima, minima;
        exhaustive_extrema(landscape, 8, maxima, minima);
        CHECK(set.maxima == maxima);
        CHECK(set.minima == minima);
        CHECK(set.plateaus.empty());
    }
}

TEST_CASE("pointer states are invariant under branch relabeling") {
    const ModelParams p = random_params(5, 801);
    BranchEnsemble ens = BranchEnsemble::random_bloch(p, 802);
    const PointerSet forward = find_pointer_states(ens, 1.4);
    auto rng = RandomStream::substream(803, 0);
    for (std::size_t i = ens.branches.size(); i > 1; --i)
        std::swap(ens.branches[i - 1], ens.branches[rng.uniform_index(i)]);
    const PointerSet shuffled = find_pointer_states(ens, 1.4);
    CHECK(forward.maxima == shuffled.maxima);
    CHECK(forward.minima == shuffled.minima);
    CHECK(forward.plateaus == shuffled.plateaus);
}

TEST_CASE("short-time pointer states are the interaction-energy extrema") {
    // Λ(t) = λ(0) t + O(t²), so for small t the selected branches coincide
    // with the extrema of the instantaneous interaction energy
    const ModelParams p = random_params(6, 851);
    const BranchEnsemble ens = BranchEnsemble::random_bloch(p, 852);
    const PointerSet short_time = find_pointer_states(ens, 1e-4);
    std::vector<double> energy_landscape(ens.branches.size());
    for (const auto& b : ens.branches)
        energy_landscape[std::size_t(b.config)] = interaction_energy(b, 0.0, p);
    const PointerSet instantaneous = find_extrema(energy_landscape, p.sites);
    CHECK(short_time.maxima == instantaneous.maxima);
    CHECK(short_time.minima == instantaneous.minima);
}

TEST_CASE("restriction quality reports overlap and observable difference") {
    const ModelParams p = random_params(5, 861);
    const BranchEnsemble ens = BranchEnsemble::random_bloch(p, 862);
    Eigen::Matrix2cd imbalance = Eigen::Matrix2cd::Zero();
    imbalance(0, 0) = 1.0;
    imbalance(1, 1) = -1.0;
    const RestrictionReport report = pointer_restriction_quality(ens, 0.9, imbalance);
    const PointerSet set = find_pointer_states(ens, 0.9);
    CHECK(report.kept == set.maxima.size() + set.minima.size());
    CHECK(report.weight_fraction > 0.0);
    CHECK(report.weight_fraction <= 1.0 + 1e-12);
    CHECK(report.overlap >= 0.0);
    CHECK(report.overlap <= 1.0 + 1e-12);
    // the overlap of the restriction is exactly the weight it keeps
    CHECK(std::abs(report.overlap - std::sqrt(report.weight_fraction)) <= 1e-10);
    std::cout << "restriction keeps " << report.kept << " branches, overlap " << report.overlap
              << ", observable difference " << report.observable_difference << "\n";

    // a flat landscape keeps nothing
    ModelParams flat = p;
    flat.coupling.assign(flat.coupling.size(), 0.3);
    const BranchEnsemble flat_ens = BranchEnsemble::random_bloch(flat, 863);
    const RestrictionReport empty = pointer_restriction_quality(flat_ens, 0.9, imbalance);
    CHECK(empty.kept == 0);
    CHECK(empty.overlap == 0.0);
}

TEST_CASE("sampled ensembles work beyond the enumeration limit and say so") {
    const ModelParams p = random_params(40, 871);
    const BranchEnsemble ens = BranchEnsemble::sampled_random(p, 24, 872);
    CHECK(ens.branches.size() == 24);
    CHECK(!ens.complete());
    CHECK_NOTHROW(ens.validate());
    const nlohmann::ordered_json doc = ensemble_to_json(ens);
    CHECK(doc.at("sampled").get<bool>());
    // closed-form branch quantities remain available at this size
    const auto residuals = phase_equation_residual(ens, 1.3);
    CHECK(residuals.size() == 24);
    for (double r : residuals) CHECK(std::isfinite(r));
    const BranchEnsemble complete_ens = BranchEnsemble::random_bloch(random_params(4, 873), 874);
    CHECK(!ensemble_to_json(complete_ens).at("sampled").get<bool>());
}

TEST_CASE("pointer search demands single-flip closure for partial ensembles") {
    const ModelParams p = random_params(4, 901);
    const BranchEnsemble full = BranchEnsemble::random_bloch(p, 902);
    std::vector<Branch> some(full.branches.begin(), full.branches.begin() + 3);
    double norm = 0.0;
    for (const auto& b : some) norm += std::norm(b.weight);
    for (auto& b : some) b.weight /= std::sqrt(norm);
    const BranchEnsemble partial = BranchEnsemble::from_table(p, some);
    CHECK_THROWS_AS(find_pointer_states(partial, 0.7), ConfigError);
}

TEST_CASE("interference rows reduce to weighted energies for the diagonal probe") {
    ModelParams p = random_params(4, 1001);
    p.system_splitting = 0.0;
    p.site_frequency.assign(std::size_t(p.sites), 0.0);
    const BranchEnsemble ens = BranchEnsemble::random_bloch(p, 1002);
    const OperatorHandle probe = build_operators(p).interaction;
    std::vector<double> phases;
    for (const auto& b : ens.branches) phases.push_back(integrated_phase(b, 0.8, p));
    const auto rows = interference_row_sums(ens, 0.8, probe, phases);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Cd expected =
            ens.branches[i].weight * interaction_energy(ens.branches[i], 0.8, p);
        CHECK(std::abs(rows[i] - expected) <= 1e-12);
    }
}

TEST_CASE("flat phases reproduce the unweighted transition rows") {
    const ModelParams p = random_params(4, 1101);
    // equal couplings for both spins: the integrated phase is branch independent
    ModelParams flat = p;
    for (int l = 1; l <= p.sites; ++l)
        for (int i = 1; i <= 2; ++i) {
            flat.coupling[std::size_t(l - 1) * 4 + std::size_t(i - 1) * 2 + 1] =
                flat.coupling[std::size_t(l - 1) * 4 + std::size_t(i - 1) * 2];
        }
    std::vector<Branch> table;
    for (std::uint64_t cfg = 0; cfg < 16; ++cfg) {
        Branch b;
        b.config = cfg;
        b.c1 = Cd{1.0, 0.0};
        b.c2 = Cd{0.0, 0.0};
        b.weight = Cd{0.25, 0.0};
        table.push_back(b);
    }
    const BranchEnsemble ens = BranchEnsemble::from_table(flat, table);
    const OperatorHandle probe = default_probe(flat, 1102);
    const InterferenceReport report = interference_filter(ens, 0.9, probe);
    // identical phases: the weighted rows coincide with the unweighted ones
    const std::vector<double> zero(ens.branches.size(), 0.0);
    const auto unweighted = interference_row_sums(ens, 0.9, probe, zero);
    for (std::size_t i = 0; i < unweighted.size(); ++i)
        CHECK(std::abs(report.row_sums[i] - unweighted[i]) <= 1e-12);
    CHECK(report.concentration == doctest::Approx(report.unweighted_concentration).epsilon(1e-12));
}

TEST_CASE("interference filter reports concentrations in range") {
    const ModelParams p = random_params(8, 1201);
    const BranchEnsemble ens = BranchEnsemble::random_bloch(p, 1202);
    const InterferenceReport report = interference_filter(ens, 1.1, default_probe(p, 1203), 2);
    CHECK(report.row_sums.size() == ens.branches.size());
    CHECK(report.concentration >= 0.0);
    CHECK(report.concentration <= 1.0 + 1e-12);
    CHECK(report.unweighted_concentration >= 0.0);
    std::cout << "interference concentration " << report.concentration << " (unweighted "
              << report.unweighted_concentration << ")\n";
}

TEST_CASE("projector parts: the diagonal mixture drops the branch cross terms") {
    const ModelParams p = random_params(4, 1301);
    const BranchEnsemble ens = BranchEnsemble::random_bloch(p, 1302);
    const ProjectorParts parts = ensemble_projector_parts(ens, 0.7);
    CHECK(std::abs(parts.full.trace().real() - 1.0) <= 1e-10);
    CHECK(std::abs(parts.diagonal_mixture.trace().real() - 1.0) <= 1e-10);
    CHECK((parts.full - parts.full.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((parts.diagonal_mixture - parts.diagonal_mixture.adjoint()).cwiseAbs().maxCoeff() <=
          1e-12);
    // the mixture agrees with the full projector on branch diagonal elements
    for (const auto& b : ens.branches) {
        const Eigen::VectorXcd v = branch_state(b, 0.7, p).amplitudes;
        const double full_elem = (v.adjoint() * parts.full * v)(0, 0).real();
        const double mix_elem = (v.adjoint() * parts.diagonal_mixture * v)(0, 0).real();
        CHECK(std::abs(mix_elem - std::norm(b.weight)) <= 1e-10);
        CHECK(std::abs(full_elem - std::norm(b.weight)) <= 1e-10);
    }
}
