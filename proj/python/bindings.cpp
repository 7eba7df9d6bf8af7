// python bindings for the pointer_sim core
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pointer_sim/analysis.hpp"
#include "pointer_sim/branch.hpp"
#include "pointer_sim/errors.hpp"
#include "pointer_sim/exact.hpp"
#include "pointer_sim/experiments.hpp"
#include "pointer_sim/io.hpp"
#include "pointer_sim/model.hpp"
#include "pointer_sim/wavepacket.hpp"

namespace py = pybind11;
using namespace psim;

namespace {

using Cd = std::complex<double>;
using Spinors = std::vector<std::array<Cd, 2>>;

py::object json_to_py(const nlohmann::ordered_json& j) {
    switch (j.type()) {
        case nlohmann::detail::value_t::null: return py::none();
        case nlohmann::detail::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::detail::value_t::number_integer: return py::int_(j.get<long long>());
        case nlohmann::detail::value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case nlohmann::detail::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::detail::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::detail::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case nlohmann::detail::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default: return py::none();
    }
}

nlohmann::ordered_json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        nlohmann::ordered_json out = nlohmann::ordered_json::object();
        for (const auto& item : obj.cast<py::dict>())
            out[item.first.cast<std::string>()] = py_to_json(item.second);
        return out;
    }
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& item : obj.cast<py::sequence>()) out.push_back(py_to_json(item));
        return out;
    }
    throw ConfigError("cannot convert python object to JSON");
}

std::vector<Cd> amplitudes_of(const StateVector& s) {
    return {s.amplitudes.data(), s.amplitudes.data() + s.amplitudes.size()};
}

StateVector state_from_list(int sites, const std::vector<Cd>& amps, bool normalize) {
    Eigen::VectorXcd a(Eigen::Index(amps.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = amps[std::size_t(i)];
    return normalize ? StateVector::normalized(sites, std::move(a))
                     : StateVector::raw(sites, std::move(a));
}

OperatorHandle pick_operator(const Operators& ops, const std::string& which) {
    if (which == "total") return ops.total;
    if (which == "self") return ops.self_hamiltonian;
    if (which == "interaction") return ops.interaction;
    if (which == "system_self") return ops.system_self;
    if (which == "environment_self") return ops.environment_self;
    throw ConfigError("unknown operator '" + which + "'");
}

EvolutionConfig evolution_config(const std::string& method, double tolerance, double time_step) {
    EvolutionConfig cfg;
    if (method == "auto") cfg.method = EvolutionMethod::automatic;
    else if (method == "eigendecomposition") cfg.method = EvolutionMethod::eigendecomposition;
    else if (method == "trotter") cfg.method = EvolutionMethod::trotter;
    else throw ConfigError("unknown evolution method '" + method + "'");
    cfg.tolerance = tolerance;
    cfg.time_step = time_step;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_pointer_sim, m) {
    m.doc() = "two-level system in a spin environment: exact evolution, phase-only "
              "approximation, pointer-state selection, diagnostics";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ToleranceError>(m, "ToleranceError", PyExc_RuntimeError);
    py::register_exception<ResourceLimitError>(m, "ResourceLimitError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](int sites, double splitting, std::vector<double> frequencies,
                         std::vector<double> couplings, double scale) {
                 ModelParams p;
                 p.sites = sites;
                 p.system_splitting = splitting;
                 p.site_frequency = std::move(frequencies);
                 p.coupling = std::move(couplings);
                 p.coupling_scale = scale;
                 p.validate();
                 return p;
             }),
             py::arg("sites"), py::arg("system_splitting"), py::arg("site_frequency"),
             py::arg("coupling"), py::arg("coupling_scale") = 1.0)
        .def_readonly("sites", &ModelParams::sites)
        .def_readonly("system_splitting", &ModelParams::system_splitting)
        .def_readonly("site_frequency", &ModelParams::site_frequency)
        .def_readonly("coupling", &ModelParams::coupling)
        .def_readonly("coupling_scale", &ModelParams::coupling_scale)
        .def("with_coupling_scale",
             [](const ModelParams& p, double scale) {
                 ModelParams out = p;
                 out.coupling_scale = scale;
                 out.validate();
                 return out;
             })
        .def("to_json", [](const ModelParams& p) { return json_to_py(p.to_json()); })
        .def_static("from_json",
                    [](const py::dict& doc) { return ModelParams::from_json(py_to_json(doc)); });

    py::class_<StateVector>(m, "StateVector")
        .def_property_readonly("sites", [](const StateVector& s) { return s.sites; })
        .def_property_readonly("amplitudes", &amplitudes_of)
        .def("norm", &StateVector::norm)
        .def("overlap", &StateVector::overlap)
        .def_static("basis_state", &StateVector::basis_state)
        .def_static("normalized",
                    [](int sites, const std::vector<Cd>& amps) {
                        return state_from_list(sites, amps, true);
                    })
        .def_static("product_state",
                    [](int sites, Cd c1, Cd c2, const Spinors& spinors) {
                        return StateVector::product_state(sites, c1, c2, spinors);
                    });

    m.def("self_evolved_system", &self_evolved_system, py::arg("system_index"), py::arg("t"),
          py::arg("splitting"));
    m.def("self_evolved_site",
          [](int spin_down, double t, double frequency) {
              return self_evolved_site(spin_down ? Spin::down : Spin::up, t, frequency);
          },
          py::arg("spin_down"), py::arg("t"), py::arg("frequency"));

    m.def("evolve",
          [](const StateVector& state, const ModelParams& params, double t,
             const std::string& which, const std::string& method, double tolerance,
             double time_step) {
              const Operators ops = build_operators(params);
              return evolve_exact(state, pick_operator(ops, which), t,
                                  evolution_config(method, tolerance, time_step));
          },
          py::arg("state"), py::arg("params"), py::arg("t"), py::arg("which") = "total",
          py::arg("method") = "auto", py::arg("tolerance") = 1e-9, py::arg("time_step") = 1e-2);

    m.def("expectation",
          [](const StateVector& state, const ModelParams& params, const std::string& which) {
              const Operators ops = build_operators(params);
              return pick_operator(ops, which).expectation(state);
          },
          py::arg("state"), py::arg("params"), py::arg("which") = "total");

    m.def("conditional_environment", [](const StateVector& state, int system_index) {
        const Eigen::VectorXcd chi = conditional_environment(state, system_index);
        return std::vector<Cd>{chi.data(), chi.data() + chi.size()};
    });
    m.def("decoherence_factor", &decoherence_factor);
    m.def("reduced_density_matrix", [](const StateVector& state) {
        const Eigen::Matrix2cd rho = reduced_density_matrix(state);
        return std::vector<std::vector<Cd>>{{rho(0, 0), rho(0, 1)}, {rho(1, 0), rho(1, 1)}};
    });
    m.def("observable_decomposition",
          [](const StateVector& state, const std::vector<std::vector<Cd>>& q) {
              Eigen::Matrix2cd obs;
              obs << q.at(0).at(0), q.at(0).at(1), q.at(1).at(0), q.at(1).at(1);
              const ObservableSplit split = observable_decomposition(state, obs);
              return py::make_tuple(split.diagonal_part, split.offdiagonal_part, split.total);
          });

    py::class_<Branch>(m, "Branch")
        .def(py::init([](std::uint64_t config, Cd c1, Cd c2, Cd weight) {
                 return Branch{config, c1, c2, weight};
             }),
             py::arg("config"), py::arg("c1"), py::arg("c2"), py::arg("weight") = Cd{1.0, 0.0})
        .def_readonly("config", &Branch::config)
        .def_readonly("c1", &Branch::c1)
        .def_readonly("c2", &Branch::c2)
        .def_readonly("weight", &Branch::weight);

    py::class_<BranchEnsemble>(m, "BranchEnsemble")
        .def_readonly("params", &BranchEnsemble::params)
        .def_readonly("branches", &BranchEnsemble::branches)
        .def("initial_state", &BranchEnsemble::initial_state)
        .def_static("product_state", &BranchEnsemble::product_state)
        .def_static("random_bloch", &BranchEnsemble::random_bloch)
        .def_static("basis_aligned_random", &BranchEnsemble::basis_aligned_random)
        .def_static("from_table", &BranchEnsemble::from_table)
        .def_static("sampled_random", &BranchEnsemble::sampled_random);

    m.def("branch_state", &branch_state);
    m.def("interaction_energy", &interaction_energy);
    m.def("integrated_phase", &integrated_phase);
    m.def("single_flip_element", [](const Branch& bra, const Branch& ket, double t,
                                    const ModelParams& params) {
        const FlipElement el = single_flip_element(bra, ket, t, params);
        return py::make_tuple(el.value, el.differing_sites, el.single_flip);
    });
    m.def("assemble_diagonal_approx", &assemble_diagonal_approx);
    m.def("phase_equation_residual", &phase_equation_residual);

    m.def("static_limit_decoherence_factor", &static_limit_decoherence_factor);

    m.def("run_diagnostics",
          [](const StateVector& initial, const ModelParams& params, std::vector<double> times) {
              const DiagnosticsSeries s = run_diagnostics(initial, params, times);
              py::dict out;
              out["times"] = s.times;
              out["h0_expect"] = s.self_energy;
              out["hI_expect"] = s.interaction_energy;
              out["h_total_expect"] = s.total_energy;
              out["decoherence"] = s.decoherence;
              out["purity"] = s.purity;
              out["norm"] = s.norm;
              return out;
          });

    m.def("fluctuation_scaling",
          [](const std::vector<int>& env_sizes, double t, const std::string& law, int samples,
             std::uint64_t seed, int workers) {
              return json_to_py(
                  scaling_report_to_json(fluctuation_scaling(env_sizes, t, law, samples, seed,
                                                             workers)));
          },
          py::arg("env_sizes"), py::arg("t"), py::arg("coupling_law") = "uniform",
          py::arg("samples") = 500, py::arg("seed") = 0, py::arg("workers") = 1);

    m.def("find_extrema", [](const std::vector<double>& landscape, int sites) {
        return json_to_py(pointer_set_to_json(find_extrema(landscape, sites)));
    });
    m.def("find_pointer_states", [](const BranchEnsemble& ens, double t) {
        return json_to_py(pointer_set_to_json(find_pointer_states(ens, t)));
    });
    m.def("pointer_restriction_quality",
          [](const BranchEnsemble& ens, double t, const std::vector<std::vector<Cd>>& q) {
              Eigen::Matrix2cd obs;
              obs << q.at(0).at(0), q.at(0).at(1), q.at(1).at(0), q.at(1).at(1);
              const RestrictionReport report = pointer_restriction_quality(ens, t, obs);
              py::dict out;
              out["kept"] = report.kept;
              out["weight_fraction"] = report.weight_fraction;
              out["overlap"] = report.overlap;
              out["observable_difference"] = report.observable_difference;
              return out;
          });

    m.def("interference_filter",
          [](const BranchEnsemble& ens, double t, std::uint64_t probe_seed, int workers) {
              const OperatorHandle probe = default_probe(ens.params, probe_seed);
              const InterferenceReport rep = interference_filter(ens, t, probe, workers);
              py::dict out;
              out["row_sums"] = rep.row_sums;
              out["concentration"] = rep.concentration;
              out["unweighted_concentration"] = rep.unweighted_concentration;
              out["pointer_set"] = json_to_py(pointer_set_to_json(rep.pointers));
              return out;
          },
          py::arg("ensemble"), py::arg("t"), py::arg("probe_seed") = 0, py::arg("workers") = 1);

    py::class_<LatticeConfig>(m, "LatticeConfig")
        .def(py::init([](int grid_points, double spacing, double mass, int wave_index) {
                 LatticeConfig cfg;
                 cfg.grid_points = grid_points;
                 cfg.spacing = spacing;
                 cfg.mass = mass;
                 cfg.wave_index = wave_index;
                 cfg.validate();
                 return cfg;
             }),
             py::arg("grid_points") = 64, py::arg("spacing") = 1.0, py::arg("mass") = 1.0,
             py::arg("wave_index") = 0)
        .def_readonly("grid_points", &LatticeConfig::grid_points)
        .def_readonly("spacing", &LatticeConfig::spacing)
        .def_readonly("mass", &LatticeConfig::mass)
        .def_readonly("wave_index", &LatticeConfig::wave_index)
        .def("wavenumber", &LatticeConfig::wavenumber);

    m.def("expand_localized", &expand_localized);
    m.def("band_energy", &band_energy);
    m.def("energy_decomposition", [](const LatticeConfig& cfg, double t) {
        const EnergySplit split = energy_decomposition(cfg, t);
        return py::make_tuple(split.diagonal_sum, split.offdiagonal_sum, split.total);
    });
    m.def("decohered_energy", &decohered_energy);

    m.def("run_experiment",
          [](const py::dict& config, const py::object& out_dir, int workers) {
              RunOptions options;
              if (!out_dir.is_none()) options.output_dir = out_dir.cast<std::string>();
              options.workers = workers;
              const RunOutcome outcome = run_experiment(py_to_json(config), options);
              py::dict out;
              out["exit_code"] = outcome.exit_code;
              out["message"] = outcome.message;
              out["output_dir"] = outcome.output_dir.string();
              out["manifest"] = json_to_py(outcome.manifest);
              return out;
          },
          py::arg("config"), py::arg("out_dir") = py::none(), py::arg("workers") = 1);
}
