"""Exact thermodynamics of the Heisenberg spin dimer used as a two-cell battery.

Energies are in Kelvin (k_B = 1).  Basis order is |00>, |01>, |10>, |11>,
with |0> the spin-down state so that |00> carries the Zeeman energy -E0.
"""

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from dimerlab.qmatrix import (
    DEFAULT_TOL,
    ValidationError,
    check_density,
    check_hermitian,
    expectation,
    hermitian_eigen,
    spectrum,
)

T_MIN = 0.5
MU_B_OVER_KB = 0.67171  # K/T
DEFAULT_J = 748.0
DEFAULT_G = 2.0
DEFAULT_B = 1.0

# total magnetisation (S1z + S2z) in units of hbar
MAGNETIZATION = np.diag([-1.0, 0.0, 0.0, 1.0]).astype(np.complex128)

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class DomainError(ValueError):
    """Raised for parameters or temperatures outside the supported range."""


@dataclass(frozen=True)
class DimerParams:
    J: float = DEFAULT_J
    g: float = DEFAULT_G
    B: float = DEFAULT_B
    mu_B_over_kB: float = MU_B_OVER_KB

    def __post_init__(self):
        for name in ("J", "g", "B", "mu_B_over_kB"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.J <= 0:
            raise DomainError(f"J must be positive (antiferromagnetic), got {self.J}")
        if self.E0 < 0:
            raise DomainError(f"E0 = g*muB*B must be non-negative, got {self.E0}")
        if self.E0 >= self.J:
            raise DomainError(f"E0 = {self.E0} K is above the level crossing (E0 >= J = {self.J} K)")

    @property
    def E0(self) -> float:
        return self.g * self.mu_B_over_kB * self.B


@dataclass(frozen=True)
class ThermalPoint:
    T: float
    xi: float
    log_Z: float
    rho: np.ndarray
    s: float
    discord: float
    ergotropy: float
    ergotropy_normalized: float
    ergotropy_closed_normalized: float
    variance_active: float
    variance_passive: float

    @property
    def Z(self) -> float:
        return math.exp(self.log_Z) if self.log_Z < 700.0 else math.inf


def check_temperature(T: float) -> float:
    T = float(T)
    if not math.isfinite(T) or T < T_MIN:
        raise DomainError(f"temperature {T} K is below T_min = {T_MIN} K")
    return T


def heisenberg_zeeman(J: float, E0: float) -> np.ndarray:
    """E0 (S1z + S2z) + J S1.S2 with S = sigma/2, for any real J and E0."""
    heisenberg = sum(np.kron(s, s) for s in (_PAULI_X, _PAULI_Y, _PAULI_Z)) / 4.0
    return E0 * MAGNETIZATION + J * heisenberg


def build_hamiltonian(p: DimerParams) -> np.ndarray:
    return heisenberg_zeeman(p.J, p.E0)


def build_reference_hamiltonian(p: DimerParams) -> np.ndarray:
    return p.E0 * MAGNETIZATION.copy()


def log_partition_function(H, T: float) -> float:
    T = check_temperature(T)
    w = hermitian_eigen(check_hermitian(H)).values
    shifted = -(w - w[0]) / T
    return float(-w[0] / T + math.log(np.sum(np.exp(shifted))))


def gibbs_state(H, T: float) -> np.ndarray:
    T = check_temperature(T)
    w, v = hermitian_eigen(check_hermitian(H))
    weights = np.exp(-(w - w[0]) / T)
    weights /= weights.sum()
    rho = (v * weights) @ v.conj().T
    return 0.5 * (rho + rho.conj().T)


def partition_function_closed(T: float, p: DimerParams) -> float:
    """Z = e^xi + e^{-3 xi} + 2 e^xi cosh(E0/T), xi = -J/(4T)."""
    T = check_temperature(T)
    xi = -p.J / (4.0 * T)
    return math.exp(xi) + math.exp(-3.0 * xi) + 2.0 * math.exp(xi) * math.cosh(p.E0 / T)


def x_state_closed_form(T: float, p: DimerParams) -> np.ndarray:
    """Thermal state written out entry by entry in the product basis.

    Evaluated with every exponent shifted by the singlet energy so the entries
    stay finite down to T_min.
    """
    T = check_temperature(T)
    beta = 1.0 / T
    xi = -beta * p.J / 4.0
    # e^{xi} * stuff / Z, rescaled by e^{3 xi} (the singlet Boltzmann factor)
    a = math.exp(4.0 * xi)  # e^{xi} / e^{-3 xi}
    z = a + 1.0 + 2.0 * a * math.cosh(beta * p.E0)
    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[0, 0] = a * 2.0 * math.exp(beta * p.E0) / (2.0 * z)
    rho[1, 1] = rho[2, 2] = (a + 1.0) / (2.0 * z)
    rho[1, 2] = rho[2, 1] = (a - 1.0) / (2.0 * z)
    rho[3, 3] = a * 2.0 * math.exp(-beta * p.E0) / (2.0 * z)
    return rho


def bleaney_bowers_reduced(T: float, J: float) -> float:
    """Reduced Bleaney-Bowers susceptibility s = 2 / (3 + e^{J/T})."""
    T = check_temperature(T)
    x = J / T
    if x > 700.0:
        return 2.0 * math.exp(-x)
    return 2.0 / (3.0 + math.exp(x))


def reduced_susceptibility(rho, tol: float = DEFAULT_TOL) -> float:
    """Magnetisation fluctuation <M^2> - <M>^2, equal to k_B T chi / (N g^2 muB^2)."""
    a = check_density(rho, tol)
    m1 = expectation(a, MAGNETIZATION)
    m2 = expectation(a, MAGNETIZATION @ MAGNETIZATION)
    return float(min(max(m2 - m1 * m1, 0.0), 1.0))


def discord_from_susceptibility(s: float) -> float:
    """Schatten one-norm discord of the dimer, 0.5 |2 s - 1|."""
    if not (-1e-12 <= s <= 1.0 + 1e-12):
        raise DomainError(f"reduced susceptibility {s} outside [0, 1]")
    return 0.5 * abs(2.0 * s - 1.0)


def _energy_basis(H0):
    return hermitian_eigen(check_hermitian(H0))


def ergotropy_spectral(rho, H0, tol: float = DEFAULT_TOL) -> float:
    """sum_{i,j} r_i e_j (|<r_i|e_j>|^2 - delta_ij), r descending, e ascending."""
    rho = check_density(rho, tol)
    r, rv = hermitian_eigen(rho, tol)
    r = np.clip(r[::-1], 0.0, None)
    rv = rv[:, ::-1]
    e, ev = _energy_basis(H0)
    overlaps = np.abs(rv.conj().T @ ev) ** 2
    value = float(r @ overlaps @ e - np.dot(r, e))
    return max(value, 0.0)


def brute_force_ergotropy(rho, H0, tol: float = DEFAULT_TOL) -> float:
    """Ergotropy by exhaustive search over the 24 eigenbasis permutations.

    Uses numpy's LAPACK eigensolver so it shares no code with the Jacobi path.
    """
    rho = check_density(rho, tol)
    r = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    e = np.linalg.eigvalsh(np.asarray(H0, dtype=np.complex128))
    energy = float(np.trace(rho @ H0).real)
    best = min(sum(r[i] * e[perm[i]] for i in range(4)) for perm in itertools.permutations(range(4)))
    return max(energy - best, 0.0)


def passive_state(rho, H0, tol: float = DEFAULT_TOL) -> np.ndarray:
    r = spectrum(check_density(rho, tol), tol)[::-1]
    e, ev = _energy_basis(H0)
    sigma = (ev * r) @ ev.conj().T
    return 0.5 * (sigma + sigma.conj().T)


def energy_variance(rho, H0) -> float:
    h = np.asarray(H0, dtype=np.complex128)
    # centred form: avoids cancelling two large terms when the spread is tiny
    centred = h - expectation(rho, h) * np.eye(h.shape[0])
    return max(expectation(rho, centred @ centred), 0.0)


def precision_delta_sigma(active, passive, H0) -> float:
    """sqrt(V(active)) - sqrt(V(passive)) for the energy variance V."""
    return math.sqrt(energy_variance(active, H0)) - math.sqrt(energy_variance(passive, H0))


def ergotropy_closed(T: float, p: DimerParams) -> float:
    """2 E0 D(T) from the Bleaney-Bowers susceptibility; valid for E0 << T."""
    T = check_temperature(T)
    if p.E0 / T > 0.1:
        warnings.warn(
            f"E0/T = {p.E0 / T:.3g} > 0.1: closed-form ergotropy is outside its validity regime",
            RuntimeWarning,
            stacklevel=2,
        )
    return 2.0 * p.E0 * discord_from_susceptibility(bleaney_bowers_reduced(T, p.J))


def thermal_point(T: float, p: DimerParams) -> ThermalPoint:
    T = check_temperature(T)
    H = build_hamiltonian(p)
    H0 = build_reference_hamiltonian(p)
    rho = gibbs_state(H, T)
    s = reduced_susceptibility(rho)
    d = discord_from_susceptibility(s)
    sigma = passive_state(rho, H0)
    erg = ergotropy_spectral(rho, H0)
    return ThermalPoint(
        T=T,
        xi=-p.J / (4.0 * T),
        log_Z=log_partition_function(H, T),
        rho=rho,
        s=s,
        discord=d,
        ergotropy=erg,
        ergotropy_normalized=2.0 * d,
        ergotropy_closed_normalized=2.0 * discord_from_susceptibility(bleaney_bowers_reduced(T, p.J)),
        variance_active=energy_variance(rho, H0),
        variance_passive=energy_variance(sigma, H0),
    )


def oracle_sweep(p: DimerParams, T_grid) -> list:
    grid = [float(t) for t in T_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("temperature grid must be sorted ascending")
    points = []
    for T in grid:
        try:
            points.append(thermal_point(T, p))
        except (DomainError, ValidationError) as exc:
            raise type(exc)(f"at T = {T} K: {exc}") from exc
    return points
