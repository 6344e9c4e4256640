import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density, seeds
from dimerlab import oracle as orc
from dimerlab import qmatrix as qm

P = orc.DimerParams()
P_B0 = orc.DimerParams(B=0.0)


def test_params_validation():
    with pytest.raises(orc.DomainError):
        orc.DimerParams(J=-1.0)
    with pytest.raises(orc.DomainError):
        orc.DimerParams(J=1.0, B=10.0)  # E0 above J: past the level crossing
    with pytest.raises(orc.DomainError):
        orc.DimerParams(B=-1.0)
    assert P.E0 == pytest.approx(2.0 * 0.67171)


def test_temperature_floor():
    with pytest.raises(orc.DomainError, match="T_min"):
        orc.thermal_point(0.1, P)


def test_hamiltonian_spectrum_at_zero_field():
    H = orc.build_hamiltonian(P_B0)
    w = np.linalg.eigvalsh(H)
    assert np.allclose(w, [-561, 187, 187, 187], atol=1e-10)
    w2, v = qm.hermitian_eigen(H)
    assert abs(abs(np.vdot(v[:, 0], qm.SINGLET)) - 1) < 1e-12


def test_pure_zeeman_hamiltonian():
    assert np.allclose(orc.heisenberg_zeeman(0.0, 1.0), np.diag([-1, 0, 0, 1]))
    assert np.allclose(orc.build_hamiltonian(P), orc.build_hamiltonian(P).conj().T)


def test_reference_hamiltonian():
    p1 = orc.DimerParams(g=1.0, B=1.0, mu_B_over_kB=1.0)
    assert np.allclose(orc.build_reference_hamiltonian(p1), np.diag([-1, 0, 0, 1]))
    p0 = orc.DimerParams(B=0.0)
    assert np.allclose(orc.build_reference_hamiltonian(p0), 0)


def test_gibbs_state_matches_matrix_exponential():
    expm = pytest.importorskip("scipy.linalg").expm
    H = orc.build_hamiltonian(P)
    for T in (5.0, 80.0, 300.0, 2000.0):
        rho = expm(-H / T)
        rho /= np.trace(rho)
        assert np.abs(orc.gibbs_state(H, T) - rho).max() <= 1e-12


def test_gibbs_low_temperature_is_singlet():
    rho = orc.gibbs_state(orc.build_hamiltonian(P_B0), orc.T_MIN)
    assert np.abs(rho - qm.singlet()).max() <= 1e-12


def test_partition_function_at_300K():
    Z = math.exp(orc.log_partition_function(orc.build_hamiltonian(P_B0), 300.0))
    assert Z == pytest.approx(8.097, abs=1e-3)
    assert Z == pytest.approx(orc.partition_function_closed(300.0, P_B0), rel=1e-12)


@pytest.mark.parametrize("T", np.geomspace(0.5, 1e4, 10))
@pytest.mark.parametrize("B", [0.0, 0.5, 1.0, 10.0, 100.0])
def test_gibbs_matches_closed_form_x_state(T, B):
    p = orc.DimerParams(B=B)
    rho = orc.gibbs_state(orc.build_hamiltonian(p), T)
    assert np.abs(rho - orc.x_state_closed_form(T, p)).max() <= 1e-12


def test_reduced_susceptibility_examples():
    assert orc.reduced_susceptibility(qm.singlet()) == pytest.approx(0.0, abs=1e-15)
    rho = orc.gibbs_state(orc.build_hamiltonian(P_B0), 300.0)
    assert orc.reduced_susceptibility(rho) == pytest.approx(0.13244, abs=1e-4)
    hot = orc.gibbs_state(orc.build_hamiltonian(P_B0), 1e7)
    assert orc.reduced_susceptibility(hot) == pytest.approx(0.5, abs=1e-4)


@pytest.mark.parametrize("T", [0.5, 3.0, 40.0, 150.0, 300.0, 1e3, 1e5])
def test_susceptibility_equals_bleaney_bowers_at_zero_field(T):
    rho = orc.gibbs_state(orc.build_hamiltonian(P_B0), T)
    xi = -748.0 / (4 * T)
    u = math.exp(4 * xi)  # e^{-J/T}, written to stay finite at T_min
    expected = 2.0 * u / (3.0 * u + 1.0)
    assert orc.reduced_susceptibility(rho) == pytest.approx(expected, abs=1e-10)
    assert orc.bleaney_bowers_reduced(T, 748.0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("s, d", [(0.0, 0.5), (0.5, 0.0), (0.13244, 0.36756)])
def test_discord_examples(s, d):
    assert orc.discord_from_susceptibility(s) == pytest.approx(d, abs=1e-12)


def test_discord_rejects_out_of_range():
    with pytest.raises(orc.DomainError):
        orc.discord_from_susceptibility(1.5)


def test_ergotropy_examples():
    H0 = orc.build_reference_hamiltonian(P)
    assert orc.ergotropy_spectral(qm.singlet(), H0) == pytest.approx(P.E0, abs=1e-12)
    assert orc.ergotropy_spectral(qm.basis_state(0), H0) == pytest.approx(0.0, abs=1e-12)
    assert orc.ergotropy_spectral(qm.maximally_mixed(), H0) == pytest.approx(0.0, abs=1e-12)
    unit = np.diag([-1.0, 0, 0, 1]).astype(complex)
    assert orc.brute_force_ergotropy(qm.singlet(), unit) == pytest.approx(1.0, abs=1e-12)
    assert orc.brute_force_ergotropy(qm.maximally_mixed(), unit) == pytest.approx(0.0, abs=1e-12)


def test_ergotropy_at_150K_matches_brute_force():
    rho = orc.gibbs_state(orc.build_hamiltonian(P), 150.0)
    H0 = orc.build_reference_hamiltonian(P)
    assert orc.ergotropy_spectral(rho, H0) == pytest.approx(orc.brute_force_ergotropy(rho, H0), abs=1e-12)


def test_ergotropy_matches_brute_force_on_random_states(rng):
    H0 = orc.build_reference_hamiltonian(P)
    worst = 0.0
    for _ in range(1000):
        rho = random_density(rng, rank=int(rng.integers(1, 5)))
        worst = max(worst, abs(orc.ergotropy_spectral(rho, H0) - orc.brute_force_ergotropy(rho, H0)))
    assert worst <= 1e-12


def test_ergotropy_with_degenerate_reference():
    # H0 with a doubly degenerate middle level and a state with degenerate spectrum
    H0 = orc.build_reference_hamiltonian(P)
    rho = np.diag([0.25, 0.25, 0.4, 0.1]).astype(complex)
    assert orc.ergotropy_spectral(rho, H0) == pytest.approx(orc.brute_force_ergotropy(rho, H0), abs=1e-12)


@given(seeds, st.floats(0.0, 100.0))
def test_passive_state_properties(seed, B):
    rng = np.random.default_rng(seed)
    p = orc.DimerParams(B=B)
    H0 = orc.build_reference_hamiltonian(p)
    rho = random_density(rng)
    sigma = orc.passive_state(rho, H0)
    assert orc.ergotropy_spectral(sigma, H0) <= 1e-12 * max(1.0, p.E0)
    released = np.trace(H0 @ rho).real - np.trace(H0 @ sigma).real
    assert released == pytest.approx(orc.ergotropy_spectral(rho, H0), abs=1e-12 * max(1.0, p.E0))
    assert np.allclose(np.sort(np.linalg.eigvalsh(sigma)), np.sort(np.linalg.eigvalsh(rho)), atol=1e-12)


def test_passive_state_examples():
    H0 = orc.build_reference_hamiltonian(P)
    assert np.abs(orc.passive_state(qm.singlet(), H0) - qm.basis_state(0)).max() <= 1e-12
    assert np.abs(orc.passive_state(qm.maximally_mixed(), H0) - qm.maximally_mixed()).max() <= 1e-12
    sigma = orc.passive_state(orc.gibbs_state(orc.build_hamiltonian(P), 150.0), H0)
    assert np.abs(sigma - np.diag(np.diag(sigma))).max() <= 1e-14
    d = np.diag(sigma).real
    assert d[0] >= d[1] - 1e-15 and d[0] >= d[2] - 1e-15 and min(d[1], d[2]) >= d[3] - 1e-15


def test_energy_variance_examples():
    unit = np.diag([-1.0, 0, 0, 1]).astype(complex)
    assert orc.energy_variance(qm.singlet(), unit) == pytest.approx(0.0, abs=1e-15)
    assert orc.energy_variance(qm.basis_state(0), unit) == pytest.approx(0.0, abs=1e-15)
    assert orc.energy_variance(qm.maximally_mixed(), unit) == pytest.approx(0.5, abs=1e-15)


def test_precision_examples():
    H0 = orc.build_reference_hamiltonian(P)
    assert orc.precision_delta_sigma(qm.singlet(), qm.basis_state(0), H0) == pytest.approx(0.0, abs=1e-15)
    mm = qm.maximally_mixed()
    assert orc.precision_delta_sigma(mm, mm, H0) == pytest.approx(0.0, abs=1e-15)
    rho = orc.gibbs_state(orc.build_hamiltonian(P), 150.0)
    sigma = orc.passive_state(rho, H0)
    # by hand: variances from the diagonal populations
    e = np.array([-P.E0, 0, 0, P.E0])
    def var(m):
        d = np.diag(m).real
        return d @ e**2 - (d @ e) ** 2
    expected = math.sqrt(var(rho)) - math.sqrt(var(sigma))
    got = orc.precision_delta_sigma(rho, sigma, H0)
    assert got == pytest.approx(expected, abs=1e-12)
    assert abs(got) > 1e-3


def test_ergotropy_closed_examples():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        assert orc.ergotropy_closed(orc.T_MIN, P) / P.E0 == pytest.approx(1.0, abs=1e-12)
    assert orc.ergotropy_closed(300.0, P) / P.E0 == pytest.approx(0.7351, abs=1e-3)
    assert orc.ergotropy_closed(100.0, P) / P.E0 == pytest.approx(0.9978, abs=1e-3)


def test_ergotropy_closed_warns_outside_regime():
    with pytest.warns(RuntimeWarning, match="E0/T"):
        orc.ergotropy_closed(1.0, P)


def test_normalized_ergotropy_equals_twice_discord():
    for tp in orc.oracle_sweep(P, np.linspace(1, 300, 31)):
        assert tp.ergotropy_normalized == 2 * tp.discord
        assert 0.0 <= tp.ergotropy_normalized <= 1.0
        assert 0.0 <= tp.discord <= 0.5
        assert tp.Z > 0


def test_oracle_sweep_examples():
    pts = orc.oracle_sweep(P, [1.0, 300.0])
    assert pts[0].ergotropy_normalized == pytest.approx(1.0, abs=1e-6)
    assert pts[1].ergotropy_normalized == pytest.approx(0.7351, abs=1e-3)


def test_oracle_sweep_monotone():
    e = [tp.ergotropy_normalized for tp in orc.oracle_sweep(P, np.linspace(1, 300, 31))]
    assert all(b <= a + 1e-15 for a, b in zip(e, e[1:]))


def test_oracle_sweep_errors_name_temperature():
    with pytest.raises(orc.DomainError):
        orc.oracle_sweep(P, [300.0, 1.0])
    with pytest.raises(orc.DomainError, match="0.2"):
        orc.oracle_sweep(P, [0.2, 1.0])


def test_thermal_point_overflow_safe():
    tp = orc.thermal_point(orc.T_MIN, P)
    assert math.isfinite(tp.log_Z)
    assert tp.Z == math.inf or tp.Z > 0
