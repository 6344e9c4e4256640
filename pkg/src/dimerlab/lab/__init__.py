"""Experiment orchestration: configs, sweeps, metrics and file outputs."""
