"""Variational quantum thermalizer for the two-qubit dimer.

A classical distribution over the four computational basis states is loaded
as a diagonal density matrix and pushed through a layered rotation circuit.
The parameters minimise the free-energy cost beta tr(rho H) - S(rho), whose
minimum -ln Z is reached exactly at the Gibbs state.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dimerlab import kernels
from dimerlab.circuit import Circuit, Gate, NoiseModel, compile_program
from dimerlab.oracle import DimerParams, build_hamiltonian, check_temperature
from dimerlab.optimizers import OptimizeResult, cobyla, nelder_mead
from dimerlab.qmatrix import JACOBI_MAX_SWEEPS, JACOBI_TOL, ValidationError
from dimerlab.seeds import derive_seed

LATENTS = ("categorical", "product")
OPTIMIZERS = ("cobyla", "nelder_mead")
ROTATION_ORDER = ("rx", "ry", "rz")


@dataclass(frozen=True)
class AnsatzConfig:
    """Layer layout: rx, ry, rz on qubit 0, the same on qubit 1, then cx(0, 1).

    ``latent`` picks the classical distribution: ``categorical`` is a softmax
    over the four basis states (three free logits), ``product`` is one
    independent Bernoulli per qubit (two logits).
    """

    layers: int = 4
    latent: str = "categorical"

    def __post_init__(self):
        if not isinstance(self.layers, int) or self.layers < 1:
            raise ValidationError(f"layers must be an integer >= 1, got {self.layers!r}")
        if self.latent not in LATENTS:
            raise ValidationError(f"latent must be one of {LATENTS}, got {self.latent!r}")

    @property
    def n_phi(self) -> int:
        return self.layers * 2 * len(ROTATION_ORDER)

    @property
    def n_theta(self) -> int:
        return 3 if self.latent == "categorical" else 2

    @property
    def n_params(self) -> int:
        return self.n_theta + self.n_phi


@dataclass(frozen=True)
class VqtParams:
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float).ravel())
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float).ravel())
        if not (np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.phi))):
            raise ValidationError("VQT parameters must be finite")

    @classmethod
    def from_vector(cls, x, ansatz: AnsatzConfig) -> "VqtParams":
        x = np.asarray(x, dtype=float).ravel()
        if x.size != ansatz.n_params:
            raise ValidationError(f"expected {ansatz.n_params} parameters, got {x.size}")
        return cls(x[: ansatz.n_theta], x[ansatz.n_theta:])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.theta, self.phi])


@dataclass(frozen=True)
class VqtConfig:
    optimizer: str = "cobyla"
    max_evals: int = 5000
    seed: int = 0
    noise: Optional[NoiseModel] = None
    ansatz: AnsatzConfig = field(default_factory=AnsatzConfig)
    repetitions: Optional[int] = None
    rho_begin: float = 0.5
    rho_end: float = 1e-6

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise ValidationError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.max_evals < 1:
            raise ValidationError(f"max_evals must be >= 1, got {self.max_evals}")
        if self.repetitions is not None and self.repetitions < 1:
            raise ValidationError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")

    @property
    def noisy(self) -> bool:
        return self.noise is not None and self.noise.enabled

    @property
    def resolved_repetitions(self) -> int:
        if self.repetitions is not None:
            return self.repetitions
        return 30 if self.noisy else 1


@dataclass(frozen=True)
class VqtResult:
    T: float
    params: VqtParams
    rho: np.ndarray
    cost: float
    n_evals: int
    converged: bool
    seed: int
    message: str = ""


def _sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def product_latent_probabilities(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (2,) or not np.all(np.isfinite(theta)):
        raise ValidationError(f"product latent needs 2 finite logits, got {theta}")
    p0, p1 = _sigmoid(theta[0]), _sigmoid(theta[1])
    return np.array([(1 - p0) * (1 - p1), (1 - p0) * p1, p0 * (1 - p1), p0 * p1])


def categorical_latent_probabilities(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (3,) or not np.all(np.isfinite(theta)):
        raise ValidationError(f"categorical latent needs 3 finite logits, got {theta}")
    z = np.concatenate([[0.0], theta])
    w = np.exp(z - z.max())
    return w / w.sum()


def latent_probabilities(theta, ansatz: AnsatzConfig) -> np.ndarray:
    if ansatz.latent == "product":
        return product_latent_probabilities(theta)
    return categorical_latent_probabilities(theta)


def latent_state(theta) -> np.ndarray:
    """Product of per-qubit diag(1 - p_i, p_i) with p_i = sigmoid(theta_i)."""
    return np.diag(product_latent_probabilities(theta)).astype(np.complex128)


def categorical_latent_state(theta) -> np.ndarray:
    """diag(softmax(0, theta_1, theta_2, theta_3))."""
    return np.diag(categorical_latent_probabilities(theta)).astype(np.complex128)


def ansatz_circuit(phi=None, cfg: AnsatzConfig = AnsatzConfig()) -> Circuit:
    """Layered circuit whose rotation angles are parameters ``phi[k]``.

    With ``phi`` given, the angles are baked in; without it the gates stay
    parametric so the circuit can be compiled once and re-bound.
    Index of a rotation: ``layer * 6 + qubit * 3 + r`` with r over rx, ry, rz.
    """
    if phi is not None:
        phi = np.asarray(phi, dtype=float).ravel()
        if phi.size != cfg.n_phi:
            raise ValidationError(f"ansatz with {cfg.layers} layers needs {cfg.n_phi} angles, got {phi.size}")
    gates = []
    k = 0
    for _ in range(cfg.layers):
        for q in (0, 1):
            for kind in ROTATION_ORDER:
                if phi is None:
                    gates.append(Gate(kind, (q,), param=k))
                else:
                    gates.append(Gate(kind, (q,), angle=float(phi[k])))
                k += 1
        gates.append(Gate("cx", (0, 1)))
    return Circuit(gates)


def prepare_state(params: VqtParams, cfg: AnsatzConfig = AnsatzConfig(),
                  nm: Optional[NoiseModel] = None) -> np.ndarray:
    """Run the ansatz on the latent mixture.

    The circuit (noisy or not) is a linear map, so running it once on
    ``diag(p)`` equals the probability-weighted sum over basis inputs.
    """
    if params.phi.size != cfg.n_phi:
        raise ValidationError(f"expected {cfg.n_phi} angles, got {params.phi.size}")
    p = latent_probabilities(params.theta, cfg)
    program = compile_program(ansatz_circuit(None, cfg), nm)
    rho = program.run(np.diag(p).astype(np.complex128), params.phi)
    return 0.5 * (rho + rho.conj().T)


def _entropy_of(rho) -> float:
    w, _, _ = kernels.jacobi_eigh(rho, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    w = w[w > 0.0]
    return float(-np.sum(w * np.log(w)))


class FreeEnergyObjective:
    """x -> beta tr(rho H) - S(rho) for a flat parameter vector x = (theta, phi).

    The ansatz is compiled once at construction; each call only rebinds the
    angles and the latent weights.
    """

    def __init__(self, T: float, H, ansatz: AnsatzConfig = AnsatzConfig(),
                 nm: Optional[NoiseModel] = None):
        self.T = check_temperature(T)
        self.beta = 1.0 / self.T
        self.H = np.ascontiguousarray(H, dtype=np.complex128)
        self.ansatz = ansatz
        self.program = compile_program(ansatz_circuit(None, ansatz), nm)
        self._n_theta = ansatz.n_theta

    def state(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = latent_probabilities(x[: self._n_theta], self.ansatz)
        rho = self.program.run(np.diag(p).astype(np.complex128), x[self._n_theta:])
        return 0.5 * (rho + rho.conj().T)

    def cost_of_state(self, rho) -> float:
        energy = float(np.sum(rho * self.H.T).real)
        return self.beta * energy - _entropy_of(rho)

    def __call__(self, x) -> float:
        return self.cost_of_state(self.state(x))


def vqt_cost(params: VqtParams, T: float, H, cfg: AnsatzConfig = AnsatzConfig(),
             nm: Optional[NoiseModel] = None) -> float:
    obj = FreeEnergyObjective(T, H, cfg, nm)
    return obj(params.to_vector())


def free_energy_of_state(rho, T: float, H) -> float:
    """Cost of an arbitrary density matrix, e.g. the exact Gibbs state."""
    T = check_temperature(T)
    rho = np.asarray(rho, dtype=np.complex128)
    return float(np.trace(rho @ H).real) / T - _entropy_of(0.5 * (rho + rho.conj().T))


def initial_point(ansatz: AnsatzConfig, seed: int) -> np.ndarray:
    """theta = 0 (maximally mixed latent), phi uniform on [0, 2 pi)."""
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0.0, 2.0 * math.pi, ansatz.n_phi)
    return np.concatenate([np.zeros(ansatz.n_theta), phi])


def minimize(objective, x0, cfg: VqtConfig) -> OptimizeResult:
    if cfg.optimizer == "cobyla":
        return cobyla(objective, x0, max_evals=cfg.max_evals, rho_begin=cfg.rho_begin, rho_end=cfg.rho_end)
    return nelder_mead(objective, x0, max_evals=cfg.max_evals)


def optimize_point(T: float, cfg: VqtConfig = VqtConfig(), p: DimerParams = DimerParams(),
                   t_index: int = 0, repetition: int = 0) -> VqtResult:
    """Minimise the free-energy cost at temperature ``T``.

    The start point comes from the seed derived from ``cfg.seed`` and the
    (temperature index, repetition) pair.
    """
    T = check_temperature(T)
    seed = derive_seed(cfg.seed, t_index, repetition)
    objective = FreeEnergyObjective(T, build_hamiltonian(p), cfg.ansatz, cfg.noise)
    res = minimize(objective, initial_point(cfg.ansatz, seed), cfg)
    rho = objective.state(res.x)
    return VqtResult(
        T=T,
        params=VqtParams.from_vector(res.x, cfg.ansatz),
        rho=rho,
        cost=res.fun,
        n_evals=res.n_evals,
        converged=res.converged,
        seed=seed,
        message=res.message,
    )


def vqt_sweep(T_grid, cfg: VqtConfig = VqtConfig(), p: DimerParams = DimerParams(), map_fn=map) -> list:
    """All (temperature, repetition) runs, grouped per temperature in grid order.

    ``map_fn`` may be a parallel map; results are re-assembled by index so the
    output does not depend on completion order.
    """
    grid = [check_temperature(t) for t in T_grid]
    reps = cfg.resolved_repetitions
    tasks = [(T, cfg, p, i, r) for i, T in enumerate(grid) for r in range(reps)]
    flat = list(map_fn(_run_task, tasks))
    return [flat[i * reps:(i + 1) * reps] for i in range(len(grid))]


def _run_task(task):
    T, cfg, p, i, r = task
    try:
        return optimize_point(T, cfg, p, i, r)
    except (ValueError, ArithmeticError) as exc:
        raise type(exc)(f"at T = {T} K, repetition {r}: {exc}") from exc
