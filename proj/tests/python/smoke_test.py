"""Smoke tests for the pointer_sim python module."""

import json
import math
import os
import tempfile

import pointer_sim as ps


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol


def test_model_and_evolution():
    params = ps.ModelParams(2, 0.0, [0.0, 0.0], [0.3, -1.2, 0.8, 2.5, 0.1, 0.2, 0.3, 0.4])
    state = ps.StateVector.basis_state(2, 0)
    evolved = ps.evolve(state, params, 1.7)
    # static self-energies: only a phase, the occupation stays put
    assert close(abs(evolved.amplitudes[0]), 1.0)
    assert close(evolved.norm(), 1.0)
    assert close(ps.expectation(evolved, params, "total"), 0.3 + 0.1, 1e-12)


def test_branch_operations():
    params = ps.ModelParams(3, 0.9, [0.4, 1.1, 0.7], [0.2] * 12)
    branch = ps.Branch(0, 1.0, 0.0)
    # equal couplings for both system levels and spins: λ is constant
    lam0 = ps.interaction_energy(branch, 0.0, params)
    assert close(lam0, 0.6, 1e-12)
    assert close(ps.integrated_phase(branch, 2.0, params), 2.0 * lam0, 1e-10)
    value, differing, single = ps.single_flip_element(branch, ps.Branch(1, 1.0, 0.0), 0.0, params)
    assert single and differing == 1 and value == 0


def test_diagonal_approximation_static_limit():
    params = ps.ModelParams(4, 0.0, [0.0] * 4, [0.37 * k for k in range(16)])
    ensemble = ps.BranchEnsemble.basis_aligned_random(params, 11)
    exact = ps.evolve(ensemble.initial_state(), params, 3.0)
    approx = ps.assemble_diagonal_approx(ensemble, 3.0)
    assert abs(exact.overlap(approx)) >= 1.0 - 1e-10


def test_diagnostics_and_scaling():
    params = ps.ModelParams(3, 0.0, [0.0] * 3, [0.9, 0.1, 0.5, 0.3, 0.2, 0.8, 0.4, 0.6,
                                                0.7, 0.05, 0.65, 0.25])
    state = ps.StateVector.product_state(
        3, 1 / math.sqrt(2), 1 / math.sqrt(2),
        [(1 / math.sqrt(2), 1 / math.sqrt(2))] * 3)
    series = ps.run_diagnostics(state, params, [0.0, 1.0, 2.0, 4.0])
    assert all(close(n, 1.0) for n in series["norm"])
    assert close(series["h_total_expect"][0], series["h_total_expect"][-1], 1e-10)
    closed = ps.static_limit_decoherence_factor(
        params, 1 / math.sqrt(2), 1 / math.sqrt(2),
        [(1 / math.sqrt(2), 1 / math.sqrt(2))] * 3, 2.0)
    assert close(abs(series["decoherence"][2] - closed), 0.0, 1e-10)

    report = ps.fluctuation_scaling([8, 16, 32, 64], 1.0, samples=120, seed=5)
    assert abs(report["fit"]["diag_slope"] - 1.0) < 0.1
    assert abs(report["fit"]["offdiag_slope"] - 0.5) < 0.15


def test_pointer_states_and_wavepacket():
    landscape = [3.0, 1.0, 1.0, 0.0]
    extrema = ps.find_extrema(landscape, 2)
    assert extrema["maxima"][0]["config"] == "00"
    assert extrema["minima"][0]["config"] == "11"

    lattice = ps.LatticeConfig(grid_points=64, wave_index=1)
    diag, off, total = ps.energy_decomposition(lattice, 0.0)
    assert close(diag + off, total, 1e-10)
    assert diag / total > 100.0


def test_run_experiment():
    with tempfile.TemporaryDirectory() as tmp:
        result = ps.run_experiment(
            {"scenario": "zurek_limit", "seed": 9, "sites": 4}, out_dir=tmp)
        assert result["exit_code"] == 0
        manifest_path = os.path.join(tmp, "manifest.json")
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        assert manifest["status"] == "ok"
        assert manifest["results"]["min_fidelity"] >= 1.0 - 1e-10


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
