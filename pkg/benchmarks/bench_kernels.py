"""Compare the numba loop kernels with the vectorised numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the density-matrix program runner and the Jacobi eigensolver directly,
then one VQT optimisation end to end in a subprocess per backend (the
backend is fixed at import time by DIMERLAB_DISABLE_NUMBA).
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from dimerlab import kernels
from dimerlab._jit import NUMBA_AVAILABLE
from dimerlab.circuit import NoiseModel, compile_program
from dimerlab.vqt import AnsatzConfig, ansatz_circuit

END_TO_END = """
import json, time
from dimerlab import kernels
from dimerlab.vqt import VqtConfig, optimize_point
optimize_point(300.0, VqtConfig(max_evals=40))  # compile / warm caches
t0 = time.perf_counter()
r = optimize_point(300.0, VqtConfig(max_evals={evals}))
print(json.dumps({{"backend": kernels.BACKEND, "seconds": time.perf_counter() - t0, "cost": r.cost}}))
"""


def per_call(fn, repeat):
    fn()  # warm-up (triggers compilation on first use)
    n = max(1, repeat)
    return min(timeit.repeat(fn, number=n, repeat=3)) / n


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--evals", type=int, default=1000, help="budget of the end-to-end VQT run")
    args = ap.parse_args()
    if not NUMBA_AVAILABLE:
        sys.exit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    prog = compile_program(ansatz_circuit(rng.uniform(0, 6.28, 24), AnsatzConfig()), NoiseModel.symmetric())
    arrays = (prog.kinds, prog.q0, prog.q1, prog.base_angles, prog.pop, prog.coh, prog.depol)
    herm = (g + g.conj().T) / 2

    rows = [
        (f"noisy 4-layer ansatz ({len(prog.kinds)} ops)",
         per_call(lambda: kernels.run_program_loops(rho, *arrays), args.repeat),
         per_call(lambda: kernels.run_program_numpy(rho, *arrays), args.repeat // 20)),
        ("Jacobi eigensolver 4x4",
         per_call(lambda: kernels.jacobi_eigh_loops(herm, 1e-14, 60), args.repeat),
         per_call(lambda: kernels.jacobi_eigh_numpy(herm, 1e-14, 60), args.repeat // 20)),
    ]
    print(f"{'kernel':40s} {'numba':>12s} {'numpy':>12s} {'speed-up':>9s}")
    for name, a, b in rows:
        print(f"{name:40s} {a * 1e6:10.1f}us {b * 1e6:10.1f}us {b / a:8.1f}x")

    print(f"\nend to end: one noiseless VQT optimisation, {args.evals} evaluations")
    for flag in ("", "1"):
        env = dict(os.environ, DIMERLAB_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(evals=args.evals)],
                             env=env, capture_output=True, text=True, check=True)
        doc = json.loads(out.stdout.strip().splitlines()[-1])
        print(f"  {doc['backend']:6s} {doc['seconds']:8.3f} s   final cost {doc['cost']:.10f}")


if __name__ == "__main__":
    main()
