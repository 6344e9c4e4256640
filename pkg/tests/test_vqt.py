import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from dimerlab import qmatrix as qm
from dimerlab import vqt
from dimerlab.circuit import NoiseModel, circuit_unitary
from dimerlab.oracle import DimerParams, build_hamiltonian, gibbs_state, log_partition_function, thermal_point

P = DimerParams()
P_B0 = DimerParams(B=0.0)
ANSATZ = vqt.AnsatzConfig()


def binary_entropy(p):
    return -sum(x * math.log(x) for x in (p, 1 - p) if x > 0)


def test_latent_state_examples():
    assert np.allclose(vqt.latent_state([0.0, 0.0]), np.eye(4) / 4, atol=1e-15)
    assert np.abs(vqt.latent_state([-20.0, -20.0]) - qm.basis_state(0)).max() <= 1e-8


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_product_latent_entropy_is_additive(a, b):
    s = qm.von_neumann_entropy(vqt.latent_state([a, b]))
    p0, p1 = 1 / (1 + math.exp(-a)), 1 / (1 + math.exp(-b))
    assert s == pytest.approx(binary_entropy(p0) + binary_entropy(p1), abs=1e-10)


@given(st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_categorical_latent_is_a_distribution(theta):
    p = vqt.categorical_latent_probabilities(theta)
    assert p.sum() == pytest.approx(1.0, abs=1e-12) and np.all(p >= 0)
    # softmax with the first logit pinned to zero
    z = np.array([0.0] + list(theta))
    assert np.allclose(p, np.exp(z - z.max()) / np.exp(z - z.max()).sum(), atol=1e-15)


def test_categorical_latent_reaches_any_diagonal():
    target = np.array([0.55, 0.3, 0.1, 0.05])
    theta = np.log(target[1:] / target[0])
    assert np.allclose(np.diag(vqt.categorical_latent_state(theta)).real, target, atol=1e-14)


def test_latent_validation():
    with pytest.raises(qm.ValidationError):
        vqt.latent_state([0.0, np.inf])
    with pytest.raises(qm.ValidationError):
        vqt.categorical_latent_state([0.0, 1.0])


def test_ansatz_structure():
    c = vqt.ansatz_circuit(np.zeros(6), vqt.AnsatzConfig(layers=1))
    assert qm.equal_up_to_phase(circuit_unitary(c), circuit_unitary(vqt.ansatz_circuit(None, vqt.AnsatzConfig(1)), np.zeros(6)))
    cx = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.allclose(circuit_unitary(c), cx, atol=1e-15)
    c4 = vqt.ansatz_circuit(np.zeros(24))
    assert len(c4) == 28 and c4.count("cx") == 4
    assert sum(c4.count(k) for k in ("rx", "ry", "rz")) == 24
    assert ANSATZ.n_phi == 24
    assert [g.kind for g in c4.gates[:7]] == ["rx", "ry", "rz", "rx", "ry", "rz", "cx"]
    assert [g.qubits for g in c4.gates[:7]] == [(0,), (0,), (0,), (1,), (1,), (1,), (0, 1)]


def test_ansatz_length_mismatch():
    with pytest.raises(qm.ValidationError, match="24"):
        vqt.ansatz_circuit(np.zeros(23))
    with pytest.raises(qm.ValidationError):
        vqt.AnsatzConfig(layers=0)


def test_prepare_state_examples():
    ident = vqt.VqtParams([-20.0, -20.0], np.zeros(6))
    cfg1 = vqt.AnsatzConfig(layers=1, latent="product")
    assert np.abs(vqt.prepare_state(ident, cfg1) - qm.basis_state(0)).max() <= 1e-8
    rng = np.random.default_rng(0)
    mixed = vqt.VqtParams([0.0, 0.0, 0.0], rng.uniform(0, 2 * np.pi, 24))
    assert np.abs(vqt.prepare_state(mixed) - np.eye(4) / 4).max() <= 1e-14


@given(seeds)
def test_prepare_state_equals_sum_over_basis_inputs(seed):
    rng = np.random.default_rng(seed)
    params = vqt.VqtParams(rng.normal(size=3), rng.uniform(0, 2 * np.pi, 24))
    nm = NoiseModel.symmetric()
    p = vqt.categorical_latent_probabilities(params.theta)
    from dimerlab.circuit import run

    c = vqt.ansatz_circuit(params.phi)
    expected = sum(p[x] * run(c, qm.basis_state(x), nm) for x in range(4))
    assert np.abs(vqt.prepare_state(params, ANSATZ, nm) - expected).max() <= 1e-13


@given(seeds, st.sampled_from(vqt.LATENTS))
def test_noiseless_entropy_equals_latent_entropy(seed, latent):
    rng = np.random.default_rng(seed)
    cfg = vqt.AnsatzConfig(latent=latent)
    params = vqt.VqtParams(rng.normal(scale=3, size=cfg.n_theta), rng.uniform(0, 2 * np.pi, 24))
    p = vqt.latent_probabilities(params.theta, cfg)
    latent_s = -sum(x * math.log(x) for x in p if x > 0)
    assert qm.von_neumann_entropy(vqt.prepare_state(params, cfg)) == pytest.approx(latent_s, abs=1e-10)


def test_cost_of_exact_gibbs_state():
    H = build_hamiltonian(P_B0)
    rho = gibbs_state(H, 300.0)
    assert vqt.free_energy_of_state(rho, 300.0, H) == pytest.approx(-2.0917, abs=5e-4)
    assert vqt.free_energy_of_state(rho, 300.0, H) == pytest.approx(-log_partition_function(H, 300.0), abs=1e-12)


@given(seeds)
def test_maximally_mixed_cost(seed):
    rng = np.random.default_rng(seed)
    H = build_hamiltonian(P)
    params = vqt.VqtParams(np.zeros(3), rng.uniform(0, 2 * np.pi, 24))
    expected = np.trace(H).real / 4 / 300.0 - math.log(4)
    assert vqt.vqt_cost(params, 300.0, H) == pytest.approx(expected, abs=1e-12)


@given(seeds, st.floats(0.5, 1e4), st.sampled_from(vqt.LATENTS))
def test_variational_lower_bound(seed, T, latent):
    rng = np.random.default_rng(seed)
    cfg = vqt.AnsatzConfig(latent=latent)
    H = build_hamiltonian(P)
    obj = vqt.FreeEnergyObjective(T, H, cfg)
    x = np.concatenate([rng.normal(scale=5, size=cfg.n_theta), rng.uniform(0, 2 * np.pi, 24)])
    assert obj(x) >= -log_partition_function(H, T) - 1e-9 * max(1.0, abs(obj(x)))


def test_noisy_cost_uses_output_entropy():
    H = build_hamiltonian(P)
    nm = NoiseModel.symmetric()
    rng = np.random.default_rng(4)
    params = vqt.VqtParams(rng.normal(size=3), rng.uniform(0, 2 * np.pi, 24))
    rho = vqt.prepare_state(params, ANSATZ, nm)
    expected = np.trace(rho @ H).real / 200.0 - qm.von_neumann_entropy(rho)
    assert vqt.vqt_cost(params, 200.0, H, ANSATZ, nm) == pytest.approx(expected, abs=1e-12)


def test_config_validation():
    with pytest.raises(qm.ValidationError):
        vqt.VqtConfig(max_evals=0)
    with pytest.raises(qm.ValidationError):
        vqt.VqtConfig(optimizer="bfgs")
    assert vqt.VqtConfig().resolved_repetitions == 1
    assert vqt.VqtConfig(noise=NoiseModel.symmetric()).resolved_repetitions == 30


def test_initial_point():
    x = vqt.initial_point(ANSATZ, 12)
    assert np.all(x[:3] == 0)
    assert np.all((x[3:] >= 0) & (x[3:] < 2 * np.pi))
    assert np.array_equal(x, vqt.initial_point(ANSATZ, 12))


def test_optimize_point_300K():
    r = vqt.optimize_point(300.0, vqt.VqtConfig())
    tp = thermal_point(300.0, P)
    assert r.n_evals <= 5000
    assert abs(r.cost + tp.log_Z) <= 1e-2
    assert qm.uhlmann_fidelity(r.rho, tp.rho) >= 0.99


def test_optimize_point_low_temperature_prepares_singlet():
    r = vqt.optimize_point(1.0, vqt.VqtConfig())
    assert r.n_evals <= 5000
    assert qm.uhlmann_fidelity(r.rho, qm.singlet()) >= 0.99


def test_optimize_point_nelder_mead_budget():
    r = vqt.optimize_point(150.0, vqt.VqtConfig(optimizer="nelder_mead", max_evals=300))
    assert r.n_evals <= 300
    assert not r.converged


def test_richer_ansatz_is_not_worse_on_average():
    costs = {}
    for layers in (2, 4):
        cfg = lambda s: vqt.VqtConfig(seed=s, ansatz=vqt.AnsatzConfig(layers=layers))
        costs[layers] = np.mean([vqt.optimize_point(300.0, cfg(s)).cost for s in range(5)])
    assert costs[4] <= costs[2]


def test_sweep_is_deterministic_and_ordered():
    cfg = vqt.VqtConfig(max_evals=150, repetitions=2, seed=9)
    a = vqt.vqt_sweep([50.0, 250.0], cfg)
    b = vqt.vqt_sweep([50.0, 250.0], cfg)
    assert [len(x) for x in a] == [2, 2]
    assert [r.T for r in a[0]] == [50.0, 50.0]
    for ra, rb in zip(sum(a, []), sum(b, [])):
        assert ra.cost == rb.cost and np.array_equal(ra.rho, rb.rho)
    assert a[0][0].seed != a[0][1].seed


def test_noisy_sweep_repetitions_differ():
    cfg = vqt.VqtConfig(max_evals=100, repetitions=3, noise=NoiseModel.symmetric())
    runs = vqt.vqt_sweep([100.0], cfg)[0]
    costs = [r.cost for r in runs]
    assert np.std(costs) > 0
    for r in runs:
        assert abs(np.trace(r.rho) - 1) <= 1e-9
        assert np.linalg.eigvalsh(r.rho).min() >= -1e-9
