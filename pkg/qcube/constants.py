# Edge colors
BLUE = 0
RED = 1
COLORS = (BLUE, RED)
COLOR_NAMES = {BLUE: "blue", RED: "red"}
COLOR_CHARS = {BLUE: "b", RED: "r"}

# Hypercube limits
MIN_DIM = 2
MAX_DIM = 30

# Conjectures
CONJ1 = 1  # antipodal colorings, monochromatic antipodal path
CONJ2 = 2  # antipodal colorings, monochromatic antipodal geodesic
CONJ3 = 3  # any coloring, antipodal path with at most one change
CONJ4 = 4  # any coloring, antipodal geodesic with at most one change
CONJECTURES = (CONJ1, CONJ2, CONJ3, CONJ4)

# Bound kinds
KIND_F = "f"
KIND_FHAT = "fhat"
KIND_MU = "mu"
BOUND_KINDS = (KIND_F, KIND_FHAT, KIND_MU)

# Symmetry breaking
DEFAULT_MAX_COMP = 30
# compared positions behind the tabulated encoding sizes
SIZE_TABLE_MAX_COMP = 13

# Cardinality encodings
SEQ = "seq"
MTOT = "mtot"
AT_MOST = "atmost"
AT_LEAST = "atleast"

# Solver conventions
SAT_EXIT = 10
UNSAT_EXIT = 20
DEFAULT_TIMEOUT = 3600.0
DEFAULT_CONFLICT_BUDGET = 1_000_000
SIMPLIFY_CONFLICTS = 20_000_000

# Environment overrides
SOLVER_ENV_PREFIX = "QCUBE_SOLVER_"
MARCH_ENV = "QCUBE_MARCH_CU"

# Oracle sweeps
ORACLE_MAX_DIM = 3
ORACLE_BATCH = 4096

# File formats
COLORING_HEADER = "qn-coloring v1 dim={dim}"
JOURNAL_VERSION = 1
RECORD_VERSION = 1
