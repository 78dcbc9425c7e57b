"""Benchmark scenarios, sweeps, plots and the command line."""
from .runner import BenchRecord, run_benchmarks, run_one
from .scenarios import SCENARIOS, Scenario, get_scenario

__all__ = ["BenchRecord", "run_benchmarks", "run_one", "SCENARIOS", "Scenario", "get_scenario"]
