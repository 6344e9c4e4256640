"""Simulation lab for a two-qubit Heisenberg dimer used as a quantum battery."""

from dimerlab.circuit import Circuit, Gate, NoiseModel, run, transpile
from dimerlab.extraction import optimal_extraction_unitary, protocol_circuit, run_extraction
from dimerlab.optimizers import cobyla, nelder_mead
from dimerlab.oracle import DimerParams, gibbs_state, oracle_sweep, thermal_point
from dimerlab.vqt import AnsatzConfig, VqtConfig, optimize_point, vqt_sweep

__all__ = [
    "AnsatzConfig",
    "Circuit",
    "DimerParams",
    "Gate",
    "NoiseModel",
    "VqtConfig",
    "cobyla",
    "gibbs_state",
    "nelder_mead",
    "optimal_extraction_unitary",
    "optimize_point",
    "oracle_sweep",
    "protocol_circuit",
    "run",
    "run_extraction",
    "thermal_point",
    "transpile",
    "vqt_sweep",
]
