"""Derivative-free minimisers with exact evaluation accounting.

Both methods stop after at most ``max_evals`` objective calls and report the
best point seen.  ``history[k]`` is the best value known after ``k + 1``
evaluations, so it is non-increasing by construction.
"""

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    n_evals: int
    converged: bool
    message: str = ""
    history: list = field(default_factory=list, repr=False)


class _BudgetExhausted(Exception):
    pass


class _Counter:
    """Wraps the objective; tracks the incumbent and enforces the budget."""

    def __init__(self, f, max_evals):
        if max_evals < 1:
            raise ValueError(f"max_evals must be >= 1, got {max_evals}")
        self.f = f
        self.max_evals = int(max_evals)
        self.n = 0
        self.best_x = None
        self.best_f = math.inf
        self.history = []

    def __call__(self, x):
        if self.n >= self.max_evals:
            raise _BudgetExhausted
        x = np.array(x, dtype=float)
        val = float(self.f(x))
        self.n += 1
        if not math.isfinite(val):
            val = math.inf
        if val < self.best_f or self.best_x is None:
            self.best_f = val
            self.best_x = x.copy()
        self.history.append(self.best_f)
        return val

    def result(self, converged, message):
        return OptimizeResult(self.best_x, self.best_f, self.n, converged, message, self.history)


def _start(x0, max_evals):
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size == 0 or not np.all(np.isfinite(x0)):
        raise ValueError("start point must be a non-empty finite vector")
    if max_evals < x0.size + 1:
        raise ValueError(f"max_evals = {max_evals} is below dim + 1 = {x0.size + 1}")
    return x0


def nelder_mead(f, x0, max_evals=5000, initial_step=0.5, ftol=1e-8, xtol=1e-8,
                reflect=1.0, expand=2.0, contract=0.5, shrink=0.5) -> OptimizeResult:
    """Nelder-Mead simplex search.

    Stops once the spread of function values over the simplex is at most
    ``ftol`` and every vertex lies within ``xtol`` of the best one, or when
    the evaluation budget runs out.
    """
    x0 = _start(x0, max_evals)
    n = x0.size
    ev = _Counter(f, max_evals)
    try:
        sim = np.vstack([x0] + [x0 + initial_step * e for e in np.eye(n)])
        fs = np.array([ev(v) for v in sim])
        while True:
            order = np.argsort(fs, kind="stable")
            sim, fs = sim[order], fs[order]
            if fs[-1] - fs[0] <= ftol and np.max(np.abs(sim[1:] - sim[0])) <= xtol:
                return ev.result(True, "simplex and function values converged")
            centroid = sim[:-1].mean(axis=0)
            xr = centroid + reflect * (centroid - sim[-1])
            fr = ev(xr)
            if fr < fs[0]:
                xe = centroid + expand * (xr - centroid)
                fe = ev(xe)
                if fe < fr:
                    sim[-1], fs[-1] = xe, fe
                else:
                    sim[-1], fs[-1] = xr, fr
                continue
            if fr < fs[-2]:
                sim[-1], fs[-1] = xr, fr
                continue
            if fr < fs[-1]:
                xc = centroid + contract * (xr - centroid)
                fc = ev(xc)
                if fc <= fr:
                    sim[-1], fs[-1] = xc, fc
                    continue
            else:
                xc = centroid + contract * (sim[-1] - centroid)
                fc = ev(xc)
                if fc < fs[-1]:
                    sim[-1], fs[-1] = xc, fc
                    continue
            for j in range(1, n + 1):
                sim[j] = sim[0] + shrink * (sim[j] - sim[0])
                fs[j] = ev(sim[j])
    except _BudgetExhausted:
        return ev.result(False, "evaluation budget exhausted")


# Trust-region and geometry constants of Powell's COBYLA.
_ETA1, _ETA2 = 0.1, 0.7
_GAMMA1, _GAMMA2 = 0.5, 2.0
_ALPHA, _BETA, _GAMMA_GEO = 0.25, 2.1, 0.5


def _reduce_rho(rho, rho_end):
    ratio = rho / rho_end
    if ratio > 250.0:
        return 0.1 * rho
    if ratio <= 16.0:
        return rho_end
    return math.sqrt(ratio) * rho_end


def cobyla(f, x0, max_evals=5000, rho_begin=0.5, rho_end=1e-6) -> OptimizeResult:
    """Unconstrained COBYLA: linear interpolation on n + 1 points in a trust region.

    ``rho`` is the resolution, reduced from ``rho_begin`` to ``rho_end``; the
    trust radius ``delta`` never drops below it but may grow after successful
    steps.  The simplex is repaired by geometry steps whenever a vertex is too
    far from the incumbent or too close to the opposite face.
    """
    x0 = _start(x0, max_evals)
    n = x0.size
    if rho_end <= 0 or rho_begin < rho_end:
        raise ValueError("need 0 < rho_end <= rho_begin")
    ev = _Counter(f, max_evals)
    rho = delta = float(rho_begin)
    # infinite values give NaN model gradients, which are handled as short steps
    with np.errstate(invalid="ignore"):
        return _cobyla_loop(ev, x0, n, rho, delta, rho_end)


def _cobyla_loop(ev, x0, n, rho, delta, rho_end):
    try:
        pts = np.vstack([x0] + [x0 + rho * e for e in np.eye(n)])
        fv = np.array([ev(p) for p in pts])
        pivot = int(np.argmin(fv))
        while True:
            best = int(np.argmin(fv))
            if fv[best] < fv[pivot]:
                pivot = best
            others = [j for j in range(n + 1) if j != pivot]
            xb, fb = pts[pivot], fv[pivot]
            D = pts[others] - xb
            try:
                A = np.linalg.inv(D)
            except np.linalg.LinAlgError:
                for k, j in enumerate(others):
                    pts[j] = xb + delta * np.eye(n)[k]
                    fv[j] = ev(pts[j])
                continue
            g = A @ (fv[others] - fb)
            gnorm = float(np.linalg.norm(g))
            dnorm = delta if gnorm > 0 else 0.0
            shortd = dnorm < 0.1 * rho
            ratio = -1.0
            if shortd:
                delta = 0.1 * delta
                if delta <= 1.5 * rho:
                    delta = rho
            else:
                d = -delta * g / gnorm
                fnew = ev(xb + d)
                prerem = delta * gnorm
                ratio = (fb - fnew) / prerem
                if ratio <= _ETA1:
                    delta = _GAMMA1 * dnorm
                elif ratio <= _ETA2:
                    delta = max(_GAMMA1 * delta, dnorm)
                else:
                    delta = max(_GAMMA1 * delta, _GAMMA2 * dnorm)
                if delta <= 1.5 * rho:
                    delta = rho
                improved = fnew < fb
                lam = d @ A
                coords = np.append(lam, 1.0 - lam.sum())
                cand = others + [pivot]
                if improved:
                    dist2 = np.array([np.sum((pts[j] - xb - d) ** 2) for j in cand])
                else:
                    dist2 = np.append(np.sum(D ** 2, axis=1), 0.0)
                weight = np.maximum(1.0, dist2 / max(0.1 * delta, rho) ** 2)
                score = weight * np.abs(coords)
                if not improved:
                    score[-1] = 0.0
                k = int(np.argmax(score))
                if improved or score[k] > 1.0:
                    pts[cand[k]] = xb + d
                    fv[cand[k]] = fnew
                    if improved:
                        pivot = cand[k]
            bad_step = shortd or ratio <= _ETA1
            if not bad_step:
                continue
            best = int(np.argmin(fv))
            if fv[best] < fv[pivot]:
                pivot = best
            others = [j for j in range(n + 1) if j != pivot]
            xb = pts[pivot]
            D = pts[others] - xb
            try:
                A = np.linalg.inv(D)
            except np.linalg.LinAlgError:
                A = None
            if A is not None:
                veta = np.linalg.norm(D, axis=1)
                vsig = 1.0 / np.linalg.norm(A, axis=0)
            if A is None or np.any(veta > _BETA * delta) or np.any(vsig < _ALPHA * delta):
                if A is None:
                    continue
                if np.any(veta > _BETA * delta):
                    k = int(np.argmax(veta))
                else:
                    k = int(np.argmin(vsig))
                step = _GAMMA_GEO * delta * A[:, k] / np.linalg.norm(A[:, k])
                g = A @ (fv[others] - fv[pivot])
                if step @ g > 0:
                    step = -step
                j = others[k]
                pts[j] = xb + step
                fv[j] = ev(pts[j])
                continue
            if max(delta, dnorm) > rho:
                continue
            if rho <= rho_end:
                return ev.result(True, "trust region reached rho_end")
            rho_new = _reduce_rho(rho, rho_end)
            delta = max(0.5 * rho, rho_new)
            rho = rho_new
    except _BudgetExhausted:
        return ev.result(False, "evaluation budget exhausted")
