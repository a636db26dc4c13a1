"""Constants for the FCSA coding library."""
from __future__ import annotations

from enum import StrEnum

DOMAIN = "fcsa"

DEFAULT_MODULUS = 2**31 - 1
# field elements are stored as int64
MAX_MODULUS = 2**63 - 1
DEFAULT_SEED = 0

# power assignment search
DEFAULT_SEARCH_BUDGET = 10**6
DEFAULT_RESTARTS = 100
SWEEP_SEARCH_BUDGET = 2_000
SWEEP_RESTARTS = 4

# sampling and verification limits
RESAMPLE_LIMIT = 100
SUBSET_LIMIT = 10**6
TENSOR_CHECK_TRIALS = 50
SPOT_CHECK_EVERY = 100
SPOT_CHECK_SHAPE = (2, 4, 2)

DEFAULT_LAMBDA_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
DEFAULT_K_GRID = (1, 2, 3, 4, 5)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID_INPUT = 2

# instance document keys
CONF_FIELD_MODULUS = "field_modulus"
CONF_ALPHA = "alpha"
CONF_BETA = "beta"
CONF_GAMMA = "gamma"
CONF_LEFT_COUNT = "L_A"
CONF_RIGHT_COUNT = "L_B"
CONF_EDGES = "edges"
CONF_MATRICES_A = "matrices_A"
CONF_MATRICES_B = "matrices_B"

# plan document keys
CONF_GROUPS = "groups"
CONF_GROUP_LEFT = "A"
CONF_GROUP_RIGHT = "B"
CONF_POWERS_A = "P_A"
CONF_POWERS_B = "P_B"
CONF_ROOTS = "roots"
CONF_EVAL_POINTS = "eval_points"
CONF_M = "m"
CONF_P = "p"
CONF_N = "n"
CONF_RHO = "rho"
CONF_TENSOR = "tensor"
CONF_THRESHOLD = "R"

# share / result document keys
CONF_WORKER = "worker"
CONF_SHARE_A = "A"
CONF_SHARE_B = "B"
CONF_RESULT_C = "C"

CSV_HEADER = (
    "ensemble",
    "L_A",
    "L_B",
    "param",
    "trials",
    "mean_S",
    "mean_R_T1",
    "mean_R_T2",
    "baseline_R",
    "G_T1",
    "G_T2",
    "baseline_ratio",
    "se_T1",
    "se_T2",
    "spot_check_failures",
)


class Ensemble(StrEnum):
    """Random computation-graph ensembles."""

    ERDOS_RENYI = "er"
    BOUNDED_DEGREE = "deg"


class Scheme(StrEnum):
    """Task assignment constructions."""

    T1 = "t1"
    T2 = "t2"
    SINGLE = "single"
    CUSTOM = "custom"


class Side(StrEnum):
    """Which vertex side a Type-2 assignment partitions on."""

    LEFT = "left"
    RIGHT = "right"
    BEST = "best"


class TensorKind(StrEnum):
    """Built-in bilinear multiplication tensors."""

    NAIVE = "naive"
    STRASSEN = "strassen"


class StragglerKind(StrEnum):
    """Straggler models used by the simulator."""

    ERASURE = "erasure"
    IID = "iid"


class SubsetMode(StrEnum):
    """How many R-subsets the verifier decodes from."""

    ALL = "all"
    SAMPLED = "sampled"


class Violation(StrEnum):
    """Conditions checked when validating a task and power assignment."""

    GROUP_RANGE = "group_range"
    GROUP_OVERLAP = "group_overlap"
    EDGE_COVERAGE = "edge_coverage"
    POWER_SHAPE = "power_shape"
    POWER_SUPPORT = "power_support"
    POWER_ORIENTATION = "power_orientation"
    POWER_DISTINCT = "power_distinct"
    POWER_PERMUTATION = "power_permutation"
