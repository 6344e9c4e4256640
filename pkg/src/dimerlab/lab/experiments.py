"""The sweeps behind each CLI subcommand, and their on-disk outputs."""

import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from dimerlab import kernels
from dimerlab.extraction import GROUND_AVERAGE_T_MAX, run_extraction
from dimerlab.lab.config import RunConfig
from dimerlab.lab.io import ReferenceCurve, read_reference_csv, read_sweep_csv, write_json, write_sweep_csv
from dimerlab.lab.metrics import avg_error_accumulation, avg_function_evaluations
from dimerlab.oracle import (
    discord_from_susceptibility,
    oracle_sweep,
    reduced_susceptibility,
    thermal_point,
)
from dimerlab.qmatrix import uhlmann_fidelity
from dimerlab.records import summarize
from dimerlab.seeds import derive_seed
from dimerlab.vqt import vqt_sweep

REFERENCE_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data", "reference_oracle.csv")


@dataclass
class RunOutput:
    records: list
    metrics: dict = field(default_factory=dict)
    points: list = field(default_factory=list)


@contextmanager
def worker_map(threads: int):
    """``map`` for one worker, an ordered process-pool map otherwise."""
    if threads <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        yield pool.map


def run_oracle(cfg: RunConfig) -> RunOutput:
    records = []
    for tp in oracle_sweep(cfg.dimer(), cfg.grid()):
        records.append(summarize(tp.T, {
            "ergotropy_normalized": [tp.ergotropy_normalized],
            "ergotropy_closed_normalized": [tp.ergotropy_closed_normalized],
            "discord": [tp.discord],
            "susceptibility_reduced": [tp.s],
            "ergotropy": [tp.ergotropy],
            "log_Z": [tp.log_Z],
        }))
    return RunOutput(records)


def _vqt_runs(cfg: RunConfig, threads: int) -> list:
    with worker_map(threads) as fmap:
        return vqt_sweep(cfg.grid(), cfg.vqt_config(), cfg.dimer(), map_fn=fmap)


def run_vqt(cfg: RunConfig, threads: int = 1) -> RunOutput:
    p = cfg.dimer()
    records, points = [], []
    for i, runs in enumerate(_vqt_runs(cfg, threads)):
        exact = thermal_point(runs[0].T, p)
        samples = {k: [] for k in ("ergotropy_normalized", "discord", "susceptibility_reduced",
                                   "cost", "cost_gap", "gibbs_fidelity")}
        for r, res in enumerate(runs):
            s = reduced_susceptibility(res.rho)
            d = discord_from_susceptibility(s)
            values = {
                "ergotropy_normalized": 2.0 * d,
                "discord": d,
                "susceptibility_reduced": s,
                "cost": res.cost,
                "cost_gap": res.cost + exact.log_Z,
                "gibbs_fidelity": uhlmann_fidelity(res.rho, exact.rho),
            }
            for k, v in values.items():
                samples[k].append(v)
            points.append({
                "T_K": res.T, "t_index": i, "repetition": r, "seed": res.seed,
                "n_evals": res.n_evals, "converged": res.converged,
                "theta": res.params.theta.tolist(), "phi": res.params.phi.tolist(), **values,
            })
        records.append(summarize(runs[0].T, samples, [res.n_evals for res in runs]))
    metrics = {"avg_function_evaluations": avg_function_evaluations(records)}
    return RunOutput(records, metrics, points)


def _states(cfg: RunConfig, threads: int):
    """Per temperature, the list of states the protocol is applied to."""
    if cfg.source == "vqt":
        return [[(res.T, res.rho, res.seed) for res in runs] for runs in _vqt_runs(cfg, threads)]
    reps = cfg.vqt_config().resolved_repetitions
    out = []
    for i, tp in enumerate(oracle_sweep(cfg.dimer(), cfg.grid())):
        out.append([(tp.T, tp.rho, derive_seed(cfg.master_seed, i, r)) for r in range(reps)])
    return out


def run_extract(cfg: RunConfig, threads: int = 1) -> RunOutput:
    p = cfg.dimer()
    nm = cfg.noise_model()
    records, points, ground = [], [], []
    for i, states in enumerate(_states(cfg, threads)):
        samples = {k: [] for k in ("p00", "p01", "p10", "p11", "fidelity", "delta_E",
                                   "ergotropy_oracle", "delta_sigma", "delta_sigma_abs")}
        for r, (T, rho, seed) in enumerate(states):
            row = run_extraction(rho, nm, p, T=T, variant=cfg.protocol, shots=cfg.shot_count, seed=seed)
            values = dict(zip(("p00", "p01", "p10", "p11"), (float(x) for x in row.populations)))
            values.update(fidelity=row.fidelity, delta_E=row.delta_E, ergotropy_oracle=row.ergotropy_oracle,
                          delta_sigma=row.delta_sigma, delta_sigma_abs=row.delta_sigma_abs)
            for k, v in values.items():
                samples[k].append(v)
            points.append({"T_K": T, "t_index": i, "repetition": r, "seed": seed, "mode": row.mode, **values})
        rec = summarize(states[0][0], samples)
        records.append(rec)
        if rec.T < GROUND_AVERAGE_T_MAX:
            ground.append(rec.mean("p00"))
    metrics = {"ground_population_avg_below_100K": float(np.mean(ground)) if ground else None}
    return RunOutput(records, metrics, points)


def load_reference(cfg: RunConfig) -> ReferenceCurve:
    if cfg.reference:
        return read_reference_csv(cfg.reference)
    return read_reference_csv(REFERENCE_PATH, source="oracle")


def run_compare(cfg: RunConfig, sim_path: str) -> RunOutput:
    ref = load_reference(cfg)
    sim = read_sweep_csv(sim_path)
    metrics = {
        "reference_source": ref.source,
        "simulation": os.path.abspath(sim_path),
        "n_points": len(sim),
        "avg_error_accumulation": avg_error_accumulation(ref, sim),
    }
    if all(not np.isnan(r.n_evals_mean) for r in sim):
        metrics["avg_function_evaluations"] = avg_function_evaluations(sim)
    return RunOutput(sim, metrics)


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def manifest(command: str, cfg: RunConfig, output: RunOutput, wall_time: float, threads: int) -> dict:
    seeds = []
    if command in ("vqt", "extract"):
        reps = cfg.vqt_config().resolved_repetitions
        seeds = [[derive_seed(cfg.master_seed, i, r) for r in range(reps)] for i in range(cfg.t_points)]
    return {
        "command": command,
        "config": cfg.to_dict(),
        "resolved": cfg.resolved(),
        "seeds": seeds,
        "metrics": output.metrics,
        "library_version": package_version(),
        "kernel_backend": kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": threads,
        "wall_time_s": wall_time,
    }


def emit_outputs(out_dir: str, command: str, cfg: RunConfig, output: RunOutput,
                 wall_time: float, threads: int = 1) -> dict:
    paths = {"sweep": os.path.join(out_dir, "sweep.csv"), "manifest": os.path.join(out_dir, "manifest.json")}
    write_sweep_csv(paths["sweep"], output.records)
    if output.points:
        paths["points"] = os.path.join(out_dir, "points.json")
        write_json(paths["points"], output.points)
    write_json(paths["manifest"], manifest(command, cfg, output, wall_time, threads))
    return paths


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - t0
