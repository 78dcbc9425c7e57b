"""Dense simplex, branch-and-bound and LP-file exchange."""
from .bnb import BnBOptions, BnBOutcome, solve_milp
from .heuristic import PlanRounding
from .lp import KERNEL, Tableau, solve_lp, use_kernel
from .lpfile import export_lp, import_solution, lp_text, read_lp, read_solution, write_solution
from .solve import SolveResult, Verification, VerificationError, branch_and_bound, synthesize, verify

__all__ = [
    "BnBOptions", "BnBOutcome", "solve_milp", "PlanRounding", "KERNEL", "Tableau", "solve_lp", "use_kernel",
    "export_lp", "import_solution", "lp_text", "read_lp", "read_solution", "write_solution",
    "SolveResult", "Verification", "VerificationError", "branch_and_bound", "synthesize", "verify",
]
