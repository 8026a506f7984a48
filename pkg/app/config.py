# config.py
# Configuration file for the equichar application
# - Series and quadrature defaults
# - Finite difference steps for the chart oracle
# - Output file names and formats
# - Logging configuration and exit codes
import os

from errors import ConfigError

# Series settings
# SERIES_ORDER - germs are expanded through the power 2*SERIES_ORDER + 1.
# MAX_SERIES_ORDER - upper limit accepted from a run configuration.
SERIES_ORDER = 16
MAX_SERIES_ORDER = 64
PRUNE_THRESHOLD = 0.0
TAIL_WARNING = 1e-12
# SERIES_TOLERANCE - the order is raised past the requested one until the
# first omitted terms at the measured spectral radius fall below this.
SERIES_TOLERANCE = 1e-16

# Quadrature settings
# Gauss-Legendre nodes per panel, panels on [tau_min, 0] and the endpoint ladder
# used when Q vanishes at tau_min.
QUADRATURE_NODES = 32
TAU_PANELS = 12
EPSILON_LADDER = (1e-3, 1e-4, 1e-5)

# Finite difference settings
FD_STEP = 1e-4
PHI_FD_STEP = 1e-5
ORACLE_POINTS = 10
ORACLE_SEED = 20240611
# Sample points keep this fraction of |tau_min| away from the critical end,
# where Q vanishes and the finite differences lose accuracy.
ORACLE_MARGIN = 0.3

# Sampling of the L-form table
LFORM_SAMPLES = 41

# Tolerances used by the check suite.
CHECK_TOLERANCES = {
    "relations": 1e-10,
    "sparsity": 1e-14,
    "char_poly": 1e-12,
    "sqrt_a": 1e-13,
    "lform_routes": 1e-10,
    "reducible_vanishing": 1e-10,
    "transgression_routes": 1e-8,
    "transgression_alt": 1e-10,
    "oracle_curvature": 1e-5,
    "oracle_vanishing": 1e-6,
    "oracle_connection": 1e-6,
    "oracle_kahler": 1e-6,
}

# Output location and formats.
OUTPUT_PATH = "data/output"
LFORM_FILE = "lform.csv"
TRANSGRESSION_FILE = "transgression.csv"
REPORT_FILE = "report.json"
FLOAT_FORMAT = "%.17g"

# Logging
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

# Parallelism cap for quadrature node evaluation.
THREADS_ENV = "EQUICHAR_THREADS"

# Process exit codes
EXIT_OK = 0
EXIT_NUMERICAL_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def thread_count():
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(count, 1)
