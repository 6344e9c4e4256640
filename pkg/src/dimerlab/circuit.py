"""Two-qubit gate-level density-matrix simulator with a T1/T2 noise model."""

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from dimerlab import kernels
from dimerlab.qmatrix import ValidationError, check_density

BASIS_GATES = ("cx", "delay", "id", "measure", "reset", "rz", "sx", "x")
CONVENIENCE_GATES = ("h", "rx", "ry", "cnot_zero_ctrl", "ch")
ROTATIONS = ("rz", "rx", "ry")
TWO_QUBIT = ("cx", "cnot_zero_ctrl", "ch")
NOISY_INSTRUCTIONS = ("sx", "id", "x", "cx", "measure")

# Backend calibration from which the relaxation times were taken.
T1_S = 0.00015774397097652505
T2_S = 0.00010861203881817735
FREQUENCY_HZ = 5227644738.696302

DEFAULT_DURATIONS_NS = {
    "sx": 35.6,
    "x": 35.6,
    "id": 35.6,
    "cx": 320.0,
    "measure": 1000.0,
    "rz": 0.0,
    "reset": 1000.0,
    "delay": 0.0,
}
DEFAULT_READOUT_FLIP = 0.02


class CircuitError(ValueError):
    pass


class TranspileError(CircuitError):
    pass


class NoiseModelError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """One instruction.

    ``angle`` is in radians.  When ``param`` is an integer the effective angle
    is ``phi[param] + angle``, which lets a variational circuit be compiled once
    and re-evaluated for new parameters.  ``duration`` is in seconds and only
    needed for ``delay`` (other kinds take it from the noise model).
    """

    kind: str
    qubits: tuple
    angle: float = 0.0
    duration: Optional[float] = None
    param: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in BASIS_GATES + CONVENIENCE_GATES:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if any(q not in (0, 1) for q in self.qubits):
            raise CircuitError(f"{self.kind}: qubit indices must be 0 or 1, got {self.qubits}")
        nq = 2 if self.kind in TWO_QUBIT else 1
        if len(self.qubits) != nq:
            raise CircuitError(f"{self.kind} acts on {nq} qubit(s), got {self.qubits}")
        if nq == 2 and self.qubits[0] == self.qubits[1]:
            raise CircuitError(f"{self.kind} needs two distinct qubits, got {self.qubits}")
        if self.param is not None and self.kind not in ROTATIONS:
            raise CircuitError(f"only rotation gates take parameters, not {self.kind}")
        if self.duration is not None and self.duration < 0:
            raise CircuitError(f"negative duration {self.duration}")
        if not math.isfinite(self.angle):
            raise CircuitError(f"{self.kind}: non-finite angle")


@dataclass(frozen=True)
class Circuit:
    gates: tuple = ()
    n_qubits: int = 2

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits != 2:
            raise CircuitError("only 2-qubit circuits are supported")
        for i, g in enumerate(self.gates):
            if not isinstance(g, Gate):
                raise CircuitError(f"gate {i}: expected Gate, got {type(g).__name__}")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other):
        return Circuit(self.gates + other.gates)

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def is_basis(self) -> bool:
        return all(g.kind in BASIS_GATES for g in self.gates)


def _symmetric_readout(p):
    return [[1.0 - p, p], [p, 1.0 - p]]


@dataclass(frozen=True)
class NoiseModel:
    t1: float = T1_S
    t2: float = T2_S
    frequency: float = FREQUENCY_HZ
    durations_ns: dict = field(default_factory=lambda: dict(DEFAULT_DURATIONS_NS))
    readout: tuple = (
        tuple(map(tuple, _symmetric_readout(DEFAULT_READOUT_FLIP))),
        tuple(map(tuple, _symmetric_readout(DEFAULT_READOUT_FLIP))),
    )
    noisy_instructions: frozenset = frozenset(NOISY_INSTRUCTIONS)
    depolarizing: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if not (self.t1 > 0 and self.t2 > 0):
            raise NoiseModelError(f"t1 and t2 must be positive, got t1={self.t1}, t2={self.t2}")
        if self.t2 > 2.0 * self.t1:
            raise NoiseModelError(f"t2 = {self.t2} s exceeds 2*t1 = {2 * self.t1} s; channel would not be CPTP")
        readout = tuple(tuple(tuple(float(x) for x in row) for row in a) for a in self.readout)
        if len(readout) != 2:
            raise NoiseModelError("readout needs one 2x2 assignment matrix per qubit")
        for q, a in enumerate(readout):
            m = np.array(a)
            if m.shape != (2, 2) or np.any(m < 0) or np.any(m > 1):
                raise NoiseModelError(f"readout matrix for qubit {q} must be 2x2 with entries in [0, 1]")
            if np.any(np.abs(m.sum(axis=0) - 1.0) > 1e-12):
                raise NoiseModelError(f"readout matrix for qubit {q}: columns must sum to 1")
        object.__setattr__(self, "readout", readout)
        object.__setattr__(self, "noisy_instructions", frozenset(self.noisy_instructions))
        unknown = self.noisy_instructions - set(BASIS_GATES)
        if unknown:
            raise NoiseModelError(f"noisy instructions must be basis gates, got {sorted(unknown)}")
        durations = dict(DEFAULT_DURATIONS_NS)
        durations.update({k: float(v) for k, v in self.durations_ns.items()})
        if any(v < 0 for v in durations.values()):
            raise NoiseModelError("gate durations must be non-negative")
        object.__setattr__(self, "durations_ns", durations)
        if not 0.0 <= self.depolarizing <= 1.0:
            raise NoiseModelError("depolarizing probability must lie in [0, 1]")

    @classmethod
    def symmetric(cls, flip: float = DEFAULT_READOUT_FLIP, **kwargs) -> "NoiseModel":
        a = tuple(map(tuple, _symmetric_readout(flip)))
        return cls(readout=(a, a), **kwargs)

    @classmethod
    def off(cls) -> "NoiseModel":
        return cls(enabled=False)

    def duration(self, kind: str) -> float:
        """Default duration of ``kind`` in seconds."""
        return self.durations_ns.get(kind, 0.0) * 1e-9

    def assignment_matrix(self) -> np.ndarray:
        return np.kron(np.array(self.readout[0]), np.array(self.readout[1]))

    def to_dict(self) -> dict:
        return {
            "basis_gates": list(BASIS_GATES),
            "noisy_instructions": sorted(self.noisy_instructions),
            "qubits": [0, 1],
            "t1_s": self.t1,
            "t2_s": self.t2,
            "frequency_hz": self.frequency,
            "durations_ns": dict(sorted(self.durations_ns.items())),
            "readout": [[list(row) for row in a] for a in self.readout],
            "depolarizing": self.depolarizing,
            "enabled": self.enabled,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NoiseModel":
        known = {
            "basis_gates", "noisy_instructions", "qubits", "t1_s", "t2_s", "frequency_hz",
            "durations_ns", "readout", "depolarizing", "enabled",
        }
        unknown = set(doc) - known
        if unknown:
            raise NoiseModelError(f"unknown noise model keys: {sorted(unknown)}")
        if "basis_gates" in doc and sorted(doc["basis_gates"]) != sorted(BASIS_GATES):
            raise NoiseModelError(f"basis_gates must be {list(BASIS_GATES)}")
        if "qubits" in doc and sorted(doc["qubits"]) != [0, 1]:
            raise NoiseModelError("noise model must cover qubits [0, 1]")
        kwargs = {}
        for key, attr in (("t1_s", "t1"), ("t2_s", "t2"), ("frequency_hz", "frequency"), ("depolarizing", "depolarizing")):
            if key in doc:
                kwargs[attr] = float(doc[key])
        if "durations_ns" in doc:
            kwargs["durations_ns"] = dict(doc["durations_ns"])
        if "readout" in doc:
            kwargs["readout"] = doc["readout"]
        if "noisy_instructions" in doc:
            kwargs["noisy_instructions"] = frozenset(doc["noisy_instructions"])
        if "enabled" in doc:
            kwargs["enabled"] = bool(doc["enabled"])
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        return cls.from_dict(json.loads(text))


def relaxation_factors(t1: float, t2: float, dt: float) -> tuple:
    """(e^{-dt/T1}, e^{-dt/T2}) for amplitude damping towards |0> plus dephasing."""
    if t2 > 2.0 * t1:
        raise NoiseModelError(f"t2 = {t2} s exceeds 2*t1 = {2 * t1} s")
    if dt < 0:
        raise NoiseModelError(f"negative duration {dt}")
    if math.isinf(dt):
        return 0.0, 0.0
    return math.exp(-dt / t1), math.exp(-dt / t2)


# ---------------------------------------------------------------------------
# Transpilation
# ---------------------------------------------------------------------------

_HALF_PI = 0.5 * math.pi


def _rz(q, angle, param=None):
    return Gate("rz", (q,), angle, param=param)


def _decompose(g: Gate) -> list:
    q = g.qubits[0]
    if g.kind == "h":
        return [_rz(q, _HALF_PI), Gate("sx", (q,)), _rz(q, _HALF_PI)]
    if g.kind == "rx":
        # U3(theta, -pi/2, pi/2) = RZ(pi/2) SX RZ(theta + pi) SX RZ(pi/2) up to phase
        return [
            _rz(q, _HALF_PI),
            Gate("sx", (q,)),
            _rz(q, g.angle + math.pi, g.param),
            Gate("sx", (q,)),
            _rz(q, _HALF_PI),
        ]
    if g.kind == "ry":
        return [
            Gate("sx", (q,)),
            _rz(q, g.angle + math.pi, g.param),
            Gate("sx", (q,)),
            _rz(q, math.pi),
        ]
    if g.kind == "cnot_zero_ctrl":
        c, t = g.qubits
        return [Gate("x", (c,)), Gate("cx", (c, t)), Gate("x", (c,))]
    if g.kind == "ch":
        # CH = RY(-pi/4)_t CX RY(pi/4)_t
        c, t = g.qubits
        return _decompose(Gate("ry", (t,), math.pi / 4)) + [Gate("cx", (c, t))] + _decompose(
            Gate("ry", (t,), -math.pi / 4)
        )
    return [g]


def transpile(c: Circuit, nm: Optional[NoiseModel] = None) -> Circuit:
    """Rewrite ``c`` in the basis {cx, delay, id, measure, reset, rz, sx, x}.

    The result equals the input up to a global phase.  When a noise model is
    given, every gate's duration is resolved from it (delays keep their own).
    """
    out = []
    for i, g in enumerate(c.gates):
        if g.kind not in BASIS_GATES + CONVENIENCE_GATES:  # pragma: no cover - Gate validates
            raise TranspileError(f"gate {i}: unknown kind {g.kind!r}")
        out.extend(_decompose(g))
    if nm is not None:
        out = [
            g if g.kind == "delay" else replace(g, duration=nm.duration(g.kind))
            for g in out
        ]
    return Circuit(tuple(out))


# ---------------------------------------------------------------------------
# Compiled programs and execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Program:
    """Array form of a circuit, ready for :func:`kernels.run_program`."""

    kinds: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    base_angles: np.ndarray
    params: np.ndarray
    pop: np.ndarray
    coh: np.ndarray
    depol: np.ndarray

    def angles(self, phi=None) -> np.ndarray:
        if phi is None or not np.any(self.params >= 0):
            return self.base_angles
        phi = np.asarray(phi, dtype=float)
        mask = self.params >= 0
        out = self.base_angles.copy()
        out[mask] += phi[self.params[mask]]
        return out

    def run(self, rho, phi=None) -> np.ndarray:
        return kernels.run_program(
            np.ascontiguousarray(rho, dtype=np.complex128),
            self.kinds, self.q0, self.q1, self.angles(phi), self.pop, self.coh, self.depol,
        )


def _is_noisy(g: Gate, nm: Optional[NoiseModel]) -> bool:
    if nm is None or not nm.enabled:
        return False
    return g.kind in nm.noisy_instructions or g.kind == "delay"


def compile_program(c: Circuit, nm: Optional[NoiseModel] = None) -> Program:
    """Compile ``c`` to arrays.

    With noise enabled the circuit is transpiled first so that noise attaches
    to basis instructions.  Without noise, kernel-native convenience gates
    (h, rx, ry) are kept as they are; they are exact unitaries either way.
    """
    noisy = nm is not None and nm.enabled
    if noisy or any(g.kind not in kernels.OP_CODES for g in c.gates):
        c = transpile(c, nm if noisy else None)
    n = len(c.gates)
    kinds = np.zeros(n, dtype=np.int64)
    q0 = np.zeros(n, dtype=np.int64)
    q1 = np.full(n, -1, dtype=np.int64)
    base = np.zeros(n)
    params = np.full(n, -1, dtype=np.int64)
    pop = np.ones(n)
    coh = np.ones(n)
    depol = np.zeros(n)
    for i, g in enumerate(c.gates):
        kinds[i] = kernels.OP_CODES[g.kind]
        q0[i] = g.qubits[0]
        if len(g.qubits) == 2:
            q1[i] = g.qubits[1]
        base[i] = g.angle
        if g.param is not None:
            params[i] = g.param
        if _is_noisy(g, nm):
            dt = g.duration if g.duration is not None else nm.duration(g.kind)
            try:
                pop[i], coh[i] = relaxation_factors(nm.t1, nm.t2, dt)
            except NoiseModelError as exc:
                raise CircuitError(f"gate {i} ({g.kind}): {exc}") from exc
            if g.kind != "delay":
                depol[i] = nm.depolarizing
    return Program(kinds, q0, q1, base, params, pop, coh, depol)


def run(c: Circuit, rho0, nm: Optional[NoiseModel] = None, phi=None, tol: float = 1e-9) -> np.ndarray:
    """Apply ``c`` gate by gate to ``rho0`` under ``nm`` (``None`` = ideal)."""
    rho0 = check_density(rho0, tol)
    if not c.gates:
        return rho0.copy()
    program = compile_program(c, nm)
    out = program.run(rho0, phi)
    return 0.5 * (out + out.conj().T)


def apply_gate(rho, g: Gate, nm: Optional[NoiseModel] = None) -> np.ndarray:
    return run(Circuit((g,)), rho, nm)


def circuit_unitary(c: Circuit, phi=None) -> np.ndarray:
    """Ideal 4x4 unitary of a circuit made of unitary gates only."""
    u = np.eye(4, dtype=np.complex128)
    for i, g in enumerate(c.gates):
        if g.kind in ("measure", "reset"):
            raise CircuitError(f"gate {i}: {g.kind} is not unitary")
        u = gate_unitary(g, phi) @ u
    return u


def gate_unitary(g: Gate, phi=None) -> np.ndarray:
    angle = g.angle
    if g.param is not None:
        if phi is None:
            raise CircuitError(f"gate {g.kind} is parametric but no parameters were given")
        angle += float(phi[g.param])
    if g.kind == "delay":
        return np.eye(4, dtype=np.complex128)
    if g.kind in TWO_QUBIT:
        c, t = g.qubits
        on_one = {
            "cx": kernels._X,
            "ch": kernels._one_qubit_matrix(kernels.OP_H, 0.0),
            "cnot_zero_ctrl": np.eye(2),
        }[g.kind]
        on_zero = kernels._X if g.kind == "cnot_zero_ctrl" else np.eye(2)
        embed = kernels._embed_numpy
        return embed(kernels._P0, c) @ embed(on_zero, t) + embed(kernels._P1, c) @ embed(on_one, t)
    return kernels._embed_numpy(kernels._one_qubit_matrix(kernels.OP_CODES[g.kind], angle), g.qubits[0])


# ---------------------------------------------------------------------------
# Readout
# ---------------------------------------------------------------------------


def measure_populations(rho, nm: Optional[NoiseModel] = None) -> np.ndarray:
    """Computational-basis outcome probabilities, through readout errors if enabled."""
    rho = check_density(rho)
    pops = np.clip(np.real(np.diag(rho)), 0.0, None)
    pops = pops / pops.sum()
    if nm is not None and nm.enabled:
        pops = nm.assignment_matrix() @ pops
    return pops


def sample_counts(pops, shots: int, seed: int) -> np.ndarray:
    pops = np.asarray(pops, dtype=float)
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    if pops.shape != (4,) or np.any(pops < -1e-12) or abs(pops.sum() - 1.0) > 1e-9:
        raise ValidationError(f"populations must be a length-4 distribution, got {pops}")
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, np.clip(pops, 0.0, None) / np.clip(pops, 0.0, None).sum())
