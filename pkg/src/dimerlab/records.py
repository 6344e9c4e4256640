"""Per-temperature aggregates over repetitions."""

import math
from dataclasses import dataclass, field

import numpy as np

# Canonical column order for every sweep table; absent quantities are skipped.
QUANTITIES = (
    "ergotropy_normalized",
    "ergotropy_closed_normalized",
    "discord",
    "susceptibility_reduced",
    "ergotropy",
    "log_Z",
    "cost",
    "cost_gap",
    "gibbs_fidelity",
    "p00",
    "p01",
    "p10",
    "p11",
    "fidelity",
    "delta_E",
    "ergotropy_oracle",
    "delta_sigma",
    "delta_sigma_abs",
)


@dataclass(frozen=True)
class Stat:
    mean: float
    std: float

    def __post_init__(self):
        if not (self.std >= 0.0):
            raise ValueError(f"standard deviation must be >= 0, got {self.std}")


@dataclass(frozen=True)
class SweepRecord:
    T: float
    stats: dict = field(default_factory=dict)
    n_evals_mean: float = math.nan
    n_samples: int = 1

    def __getitem__(self, name) -> Stat:
        return self.stats[name]

    def mean(self, name) -> float:
        return self.stats[name].mean

    def std(self, name) -> float:
        return self.stats[name].std


def summarize(T: float, samples: dict, n_evals=None) -> SweepRecord:
    """Mean and population standard deviation of each list in ``samples``."""
    unknown = set(samples) - set(QUANTITIES)
    if unknown:
        raise ValueError(f"unknown quantities {sorted(unknown)}")
    sizes = {len(v) for v in samples.values()}
    if len(sizes) > 1 or 0 in sizes:
        raise ValueError(f"all quantities need the same non-zero number of samples, got {sizes}")
    stats = {}
    for name in QUANTITIES:
        if name in samples:
            arr = np.asarray(samples[name], dtype=float)
            stats[name] = Stat(float(arr.mean()), float(arr.std()))
    n_mean = float(np.mean(n_evals)) if n_evals else math.nan
    return SweepRecord(float(T), stats, n_mean, sizes.pop() if sizes else 0)


def columns_for(records) -> list:
    """CSV header: T_K, then mean/std pairs in canonical order, then n_evals_mean."""
    present = [q for q in QUANTITIES if all(q in r.stats for r in records)]
    cols = ["T_K"]
    for q in present:
        cols += [f"{q}_mean", f"{q}_std"]
    if records and all(not math.isnan(r.n_evals_mean) for r in records):
        cols.append("n_evals_mean")
    return cols


def record_row(rec: SweepRecord, columns) -> list:
    out = []
    for c in columns:
        if c == "T_K":
            out.append(rec.T)
        elif c == "n_evals_mean":
            out.append(rec.n_evals_mean)
        elif c.endswith("_mean"):
            out.append(rec.stats[c[:-5]].mean)
        else:
            out.append(rec.stats[c[:-4]].std)
    return out
