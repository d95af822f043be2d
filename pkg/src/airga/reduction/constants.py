"""Default run protocol for AIRGA reductions."""
from typing import Tuple

DEFAULT_R_MAX = 30
LARGE_MODEL_R_MAX = 150
LARGE_MODEL_SIZE = 10000

DEFAULT_POINT_RANGE: Tuple[float, float] = (1.0, 100.0)
DEFAULT_POINT_COUNT = 3

DEFAULT_OUTER_TOL = 1e-6
DEFAULT_INNER_TOL = 1e-6
DEFAULT_SPAI_TOL = 0.01
DEFAULT_CG_RTOL = 1e-10
DEFAULT_UPDATE_START = 3
DEFAULT_MAX_OUTER = 20
DEFAULT_SEED = 42

# relative gap under which two candidate expansion points are the same point
POINT_DEDUP_GAP = 1e-8
# a deflated block below this fraction of its pre-deflation norm adds nothing
EXHAUSTED_BLOCK_TOL = 1e-12

TRACE_FILES = {
    "solves": "solves.csv",
    "preconditioners": "preconditioners.csv",
    "iterations": "iterations.csv",
}
SUMMARY_FILE = "summary.txt"
LEDGER_FILE = "ledger.npz"
REDUCED_DIR = "reduced"
BASIS_FILE = "V.mtx"

SOLVES_COLUMNS = [
    "outer",
    "inner",
    "point_index",
    "point",
    "order",
    "rhs_columns",
    "cg_iterations",
    "converged",
    "solve_seconds",
]
PRECONDITIONERS_COLUMNS = [
    "outer",
    "point_index",
    "point",
    "kind",
    "chain_length",
    "alpha",
    "identity_distance",
    "shift_distance",
    "max_column_residual",
    "columns_over_tol",
    "inner_iterations",
    "build_seconds",
]
ITERATIONS_COLUMNS = [
    "outer",
    "r",
    "inner_steps",
    "h2_change",
    "h2_method",
    "points",
    "moment_errors",
    "projection_seconds",
    "points_padded",
]
