import json

import numpy as np
import pytest

import qtraj

GROUND = np.diag([0.0, 1.0]).astype(complex)


def test_version():
    assert qtraj.__version__ == "0.1.0"


def test_trace_norm_matches_numpy():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert qtraj.trace_norm(a) == pytest.approx(np.linalg.svd(a, compute_uv=False).sum(), abs=1e-12)


def test_heterodyne_equilibrium():
    m = qtraj.atom_model("heterodyne")
    eta = qtraj.equilibrium(m)
    assert eta[0, 0].real == pytest.approx(1.0 / 3.0, abs=1e-10)
    assert abs(eta[1, 0] - 1j / 3.0) < 1e-10
    assert np.abs(qtraj.apply_liouvillian(m, eta)).max() < 1e-12


def test_json_round_trip():
    m = qtraj.atom_model("homodyne", phi=np.pi / 2)
    back = qtraj.model_from_json(m.to_json())
    assert back.hash() == m.hash()
    assert json.loads(m.to_json())["dimension"] == 2


def test_simulation_is_deterministic_and_pure():
    m = qtraj.atom_model("homodyne", phi=np.pi / 2)
    a = qtraj.simulate_posterior(m, GROUND, 1.0, 1e-3, seed=3)
    b = qtraj.simulate_posterior(m, GROUND, 1.0, 1e-3, seed=3)
    assert a["states"].shape == (1001, 2, 2)
    assert np.array_equal(a["states"], b["states"])
    assert max(a["linear_entropy"]) < 1e-2


def test_linear_weights_and_ensemble():
    m = qtraj.atom_model("heterodyne")
    lin = qtraj.simulate_linear(m, GROUND, 0.5, 1e-3, seed=1, stride=100)
    assert len(lin["weight"]) == 6
    assert lin["weight"][0] == 1.0
    stats = qtraj.run_ensemble(m, GROUND, 1.0, 1e-3, 200, seed=5, stride=500)
    master = qtraj.evolve_master(m, GROUND, stats["times"])
    assert np.abs(stats["mean_state"] - master).max() < 0.15
    assert stats["n_failed"] == 0


def test_structure_checks():
    m = qtraj.atom_model("heterodyne")
    assert not qtraj.check_ellipticity(m, np.array([0, 1], dtype=complex))
    assert qtraj.check_ellipticity(m, np.array([1, 1], dtype=complex))
    assert qtraj.lie_rank(m, np.array([0, 1], dtype=complex)) == (2, True)


def test_histogram_and_ergodic_distance():
    m = qtraj.atom_model("heterodyne")
    run = qtraj.simulate_posterior(m, GROUND, 5.0, 1e-3, seed=2, stride=10)
    dwell, counts = qtraj.bloch_histogram(run["times"], run["states"], 6, 8)
    assert dwell.shape == (6, 8)
    assert counts.sum() == len(run["times"])
    d = qtraj.ergodic_distance(run["times"], run["states"], qtraj.equilibrium(m), 1.0)
    assert 0.0 <= d < 2.0


def test_errors_carry_codes():
    with pytest.raises(qtraj.QtrajError) as info:
        qtraj.atom_model("heterodyne", rabi=0.0)
    assert info.value.code == "ZeroRabi"
    assert not info.value.numerical
    bad = qtraj.model_from_json(json.dumps({"dimension": 2, "hamiltonian": [[0, 0], [0, 0]], "diffusive_ops": [[[0, 0], [0, 1]]]}))
    with pytest.raises(qtraj.QtrajError) as info:
        qtraj.equilibrium(bad)
    assert info.value.numerical
