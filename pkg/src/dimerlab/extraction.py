"""Work extraction from the dimer: the optimal unitary and its gate circuits."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from dimerlab.circuit import Circuit, Gate, NoiseModel, measure_populations, run, sample_counts
from dimerlab.oracle import (
    DimerParams,
    build_reference_hamiltonian,
    ergotropy_spectral,
    precision_delta_sigma,
)
from dimerlab.qmatrix import DEFAULT_TOL, ValidationError, check_density, expectation, ground_fidelity, hermitian_eigen

PROTOCOL_VARIANTS = ("optimal", "minimal", "printed")
GROUND_AVERAGE_T_MAX = 100.0


def protocol_circuit(variant: str = "optimal") -> Circuit:
    """Gate sequence that discharges the dimer.

    ``minimal``: zero-controlled CNOT 0->1, H on 0, X on 0.  It sends the
    singlet to |00> but leaves |00> and |11> in superpositions.
    ``optimal``: ``minimal`` followed by a controlled-H (control 1, target 0),
    which folds those two superpositions back onto |01> and |11>, so the
    circuit equals the optimal unitary for every thermal state of the dimer.
    ``printed``: CNOT 0->1 then H on 0, the textbook Bell-basis rotation,
    kept for comparison; it sends the singlet to |11>.
    """
    minimal = (Gate("cnot_zero_ctrl", (0, 1)), Gate("h", (0,)), Gate("x", (0,)))
    if variant == "minimal":
        return Circuit(minimal)
    if variant == "optimal":
        return Circuit(minimal + (Gate("ch", (1, 0)),))
    if variant == "printed":
        return Circuit((Gate("cx", (0, 1)), Gate("h", (0,))))
    raise ValidationError(f"unknown protocol variant {variant!r}; choose from {PROTOCOL_VARIANTS}")


def optimal_extraction_unitary(rho, H0, tol: float = DEFAULT_TOL) -> np.ndarray:
    """U = sum_i |e_i><r_i|, r_i by decreasing population, e_i by increasing energy."""
    rho = check_density(rho, tol)
    _, rv = hermitian_eigen(rho, tol)
    _, ev = hermitian_eigen(H0)
    return ev @ rv[:, ::-1].conj().T


@dataclass(frozen=True)
class ExtractionReportRow:
    T: Optional[float]
    populations: np.ndarray
    fidelity: float
    delta_E: float
    ergotropy_oracle: float
    delta_sigma: float
    mode: str

    def __post_init__(self):
        pops = np.asarray(self.populations, dtype=float)
        object.__setattr__(self, "populations", pops)
        if pops.shape != (4,) or abs(pops.sum() - 1.0) > 1e-9:
            raise ValidationError(f"populations must sum to 1, got {pops}")
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValidationError(f"fidelity {self.fidelity} outside [0, 1]")

    @property
    def delta_sigma_abs(self) -> float:
        return abs(self.delta_sigma)

    @property
    def ground_population(self) -> float:
        return float(self.populations[0])


def run_extraction(rho, nm: Optional[NoiseModel] = None, p: DimerParams = DimerParams(),
                   T: Optional[float] = None, variant: str = "optimal",
                   shots: Optional[int] = None, seed: int = 0) -> ExtractionReportRow:
    """Apply the protocol to ``rho`` and measure the discharged state.

    ``fidelity``, ``delta_E`` and ``delta_sigma`` are computed from the output
    density matrix.  ``populations`` include readout errors when noise is on,
    and are sampled frequencies when ``shots`` is given.
    """
    rho = check_density(rho)
    H0 = build_reference_hamiltonian(p)
    sigma = run(protocol_circuit(variant), rho, nm)
    pops = measure_populations(sigma, nm)
    if shots is not None:
        pops = sample_counts(pops, shots, seed) / float(shots)
    noisy = nm is not None and nm.enabled
    return ExtractionReportRow(
        T=T,
        populations=pops,
        fidelity=ground_fidelity(sigma),
        delta_E=expectation(rho, H0) - expectation(sigma, H0),
        ergotropy_oracle=ergotropy_spectral(rho, H0),
        delta_sigma=precision_delta_sigma(rho, sigma, H0),
        mode="noisy" if noisy else "noiseless",
    )


def extraction_sweep(states, nm: Optional[NoiseModel] = None, p: DimerParams = DimerParams(),
                     variant: str = "optimal", shots: Optional[int] = None, seed: int = 0) -> list:
    """One row per (T, state) pair, in input order."""
    rows = []
    for i, (T, rho) in enumerate(states):
        try:
            rows.append(run_extraction(rho, nm, p, T=T, variant=variant, shots=shots, seed=seed + i))
        except ValueError as exc:
            raise type(exc)(f"at T = {T} K: {exc}") from exc
    return rows


def average_ground_population(rows, t_max: float = GROUND_AVERAGE_T_MAX) -> float:
    """Mean |00> population over the rows with T < t_max."""
    vals = [r.ground_population for r in rows if r.T is not None and r.T < t_max]
    if not vals:
        raise ValidationError(f"no rows below {t_max} K")
    return float(np.mean(vals))
