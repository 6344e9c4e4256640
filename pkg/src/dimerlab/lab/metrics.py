"""Sweep-level figures of merit."""

import math

import numpy as np

MAX_T_GAP = 1.0


class GridMismatchError(ValueError):
    pass


def _nearest(Ts, t):
    i = int(np.argmin(np.abs(Ts - t)))
    return i, abs(Ts[i] - t)


def avg_error_accumulation(ref, sim, max_gap: float = MAX_T_GAP) -> float:
    """(1/N) sum |e_ref - e_sim| over the N simulated temperatures.

    Each simulated point is joined to the nearest reference temperature,
    which must lie within ``max_gap`` kelvin.
    """
    if not sim:
        raise GridMismatchError("no simulated points to compare")
    Ts = np.asarray(ref.T)
    errors = []
    for rec in sim:
        i, gap = _nearest(Ts, rec.T)
        if gap > max_gap:
            raise GridMismatchError(
                f"simulated T = {rec.T} K has no reference point within {max_gap} K (nearest {Ts[i]} K)"
            )
        errors.append(abs(ref.ergotropy_normalized[i] - rec.mean("ergotropy_normalized")))
    return float(np.mean(errors))


def avg_function_evaluations(sim) -> float:
    if not sim:
        raise ValueError("no sweep records")
    counts = [r.n_evals_mean for r in sim]
    if any(math.isnan(c) for c in counts):
        raise ValueError("sweep records carry no evaluation counts")
    return float(np.mean(counts))
