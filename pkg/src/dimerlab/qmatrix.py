"""Small complex linear algebra for 2- and 4-dimensional quantum operators.

Matrices are plain ``numpy`` complex arrays.  Density matrices are validated
on entry to the functions that need them rather than wrapped in a class.
"""

from typing import NamedTuple

import numpy as np

from dimerlab import kernels

DEFAULT_TOL = 1e-9
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60


class ValidationError(ValueError):
    """Raised when a matrix violates a structural requirement."""


class PositivityError(ValidationError):
    """Raised when a state has eigenvalues or populations below -tol."""


class EigenSystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def as_cmatrix(m) -> np.ndarray:
    """Return ``m`` as a complex square array of dimension 2 or 4."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise ValidationError(f"expected a 2x2 or 4x4 matrix, got shape {a.shape}")
    return a


def check_hermitian(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    a = as_cmatrix(m)
    diff = np.abs(a - a.conj().T)
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    if diff.max() > tol:
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        raise ValidationError(
            f"matrix is not Hermitian: entry ({i}, {j}) = {a[i, j]} "
            f"differs from conj of ({j}, {i}) by {diff[i, j]:.3e} > {tol:g}"
        )
    return a


def hermitian_eigen(m, tol: float = DEFAULT_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues come back ascending with orthonormal eigenvectors as columns.
    Inside a degenerate eigenspace the basis is whatever the sweep produced.
    """
    a = check_hermitian(m, tol)
    a = 0.5 * (a + a.conj().T)
    w, v, _ = kernels.jacobi_eigh(a, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    return EigenSystem(w, v)


def check_density(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Validate a 4x4 density matrix and return it as a complex array."""
    a = check_hermitian(rho, tol)
    if a.shape != (4, 4):
        raise ValidationError(f"density matrix must be 4x4, got {a.shape}")
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density matrix trace {tr!r} differs from 1 by more than {tol:g}")
    lo = hermitian_eigen(a, tol).values[0]
    if lo < -tol:
        raise PositivityError(f"density matrix has eigenvalue {lo:.3e} < -{tol:g}")
    return a


def spectrum(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues of a density matrix, ascending, with tiny negatives clipped."""
    w = hermitian_eigen(rho, tol).values
    if w[0] < -tol:
        raise PositivityError(f"eigenvalue {w[0]:.3e} < -{tol:g}")
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho, tol: float = DEFAULT_TOL) -> float:
    """Entropy in nats, with 0 ln 0 = 0."""
    w = spectrum(check_density(rho, tol), tol)
    w = w[w > 0.0]
    # rounding can push a pure state's single eigenvalue just above 1
    return max(float(-np.sum(w * np.log(w))), 0.0)


def ground_fidelity(rho, tol: float = DEFAULT_TOL) -> float:
    """sqrt(<00|rho|00>): overlap of a state with the |00> ground state."""
    a = check_density(rho, tol)
    p = a[0, 0].real
    if p < -tol:
        raise PositivityError(f"<00|rho|00> = {p:.3e} is negative")
    return float(np.sqrt(min(max(p, 0.0), 1.0)))


def sqrtm_psd(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    w, v = hermitian_eigen(rho, tol)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def uhlmann_fidelity(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    """Squared Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))**2."""
    r = sqrtm_psd(check_density(rho, tol), tol)
    m = r @ check_density(sigma, tol) @ r
    w = hermitian_eigen(0.5 * (m + m.conj().T), tol).values
    return float(min(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2, 1.0))


def expectation(rho, op) -> float:
    return float(np.trace(np.asarray(rho) @ np.asarray(op)).real)


def ket(index: int, dim: int = 4) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128)
    return np.outer(v, v.conj())


def basis_state(index: int) -> np.ndarray:
    """|index><index| in the 4-dimensional product basis."""
    return projector(ket(index))


SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=np.complex128) / np.sqrt(2.0)


def singlet() -> np.ndarray:
    """Projector onto (|01> - |10>)/sqrt(2)."""
    return projector(SINGLET)


def maximally_mixed() -> np.ndarray:
    return np.eye(4, dtype=np.complex128) / 4.0


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return bool(np.abs(u @ u.conj().T - np.eye(u.shape[0])).max() <= tol)


def equal_up_to_phase(u, v, tol: float = 1e-10) -> bool:
    """True when u = e^{i a} v for some real a, within ``tol`` entrywise."""
    u = np.asarray(u)
    v = np.asarray(v)
    overlap = np.trace(v.conj().T @ u)
    if abs(overlap) < 1e-12:
        return False
    phase = overlap / abs(overlap)
    return bool(np.abs(u - phase * v).max() <= tol)
