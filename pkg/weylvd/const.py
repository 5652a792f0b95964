"""Constants for weylvd."""

import math

DOMAIN = "weylvd"

ENV_THREADS = "WEYLVD_THREADS"

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_NON_CONVERGENCE = 2
EXIT_BOUND_VIOLATION = 3
EXIT_INVALID_WINDOWS = 4

# bound checks pass iff lhs <= rhs * (1 + TOL_REL) + TOL_ABS
DEFAULT_TOL_REL = 1e-9
DEFAULT_TOL_ABS = 1e-12

# constants of the L2 bound and of the free tail bound, with their advertised ceilings
C_LEMMA2 = math.sqrt(2.0) * (1.0 / math.sqrt(2.0) - 1.0 / math.sinh(math.sqrt(2.0))) ** -0.5
C_LEMMA3 = 2.0**0.25 * C_LEMMA2
C_LEMMA2_CLAIM = 3.3
C_LEMMA3_CLAIM = 3.9

DEFAULT_D_LADDER = (1e-1, 1e-2, 1e-3)
DEFAULT_M_TOLERANCE = 1e-8
DEFAULT_M_ATTEMPTS = 3
MIN_TAIL_LENGTH = 50.0

# piecewise-linear potentials are propagated on a grid this many times finer
LINEAR_REFINEMENT = 4

CSV_FLOAT_FORMAT = ".17g"

CONF_POTENTIAL = "potential"
CONF_EXPERIMENT = "experiment"
CONF_COROLLARY2 = "corollary2"
CONF_LOGGER = "logger"

CONF_GENERATOR = "generator"
CONF_FILE = "file"
CONF_INTERPOLATION = "interpolation"
CONF_X_MAX = "x_max"
CONF_STEP = "h"
CONF_BUMP_HEIGHT = "bump_height"
CONF_BUMP_WIDTH = "bump_width"
CONF_BUMP_SHAPE = "bump_shape"
CONF_GAP_GROWTH = "gap_growth"
CONF_FIRST_GAP = "first_gap"
CONF_COUNT = "count"
CONF_PERTURBATION = "perturbation"
CONF_PERTURBATION_AMPLITUDE = "perturbation_amplitude"
CONF_SHIFT = "shift"
CONF_WINDOWS = "windows"
CONF_SCAN_LENGTH = "scan_length"
CONF_SCAN_DELTA = "scan_delta"

CONF_A_SET = "a_set"
CONF_S_SET = "s_set"
CONF_D_LADDER = "d_ladder"
CONF_K_RANGE = "k_range"
CONF_LAMBDA_POINTS = "lambda_points"
CONF_DELTA = "delta"
CONF_SEED = "seed"
CONF_DEFAULT = "default"
