"""Trajectory synthesis from Signal Temporal Logic with compact mixed-integer encodings."""
from .encoder import PROPOSED, STANDARD, EncoderConfig, EncodingStats, encode
from .formula import (
    And, Always, Eventually, Formula, Or, Pred, Predicate, Until, build_tree, flatten,
    predicted_binaries, robustness,
)
from .model import MilpModel
from .parser import ParseError, RegionDef, parse, to_text
from .solver import BnBOptions, SolveResult, branch_and_bound, export_lp, import_solution, synthesize
from .system import LinearSystem, Trajectory, double_integrator, rollout

__version__ = "0.1.0"

__all__ = [
    "PROPOSED", "STANDARD", "EncoderConfig", "EncodingStats", "encode",
    "And", "Always", "Eventually", "Formula", "Or", "Pred", "Predicate", "Until",
    "build_tree", "flatten", "predicted_binaries", "robustness", "MilpModel",
    "ParseError", "RegionDef", "parse", "to_text", "BnBOptions", "SolveResult",
    "branch_and_bound", "export_lp", "import_solution", "synthesize",
    "LinearSystem", "Trajectory", "double_integrator", "rollout",
]
