# config.py
import os
from dotenv import load_dotenv

load_dotenv()

WEAVE_PROJECT = os.getenv('WEAVE_PROJECT')
LOG_LEVEL = os.getenv('INNER_CLT_LOG_LEVEL', 'INFO')
THREADS = int(os.getenv('INNER_CLT_THREADS', '1'))
MAX_GRID = int(os.getenv('INNER_CLT_MAX_GRID', str(2 ** 22)))
OUT_DIR = os.getenv('INNER_CLT_OUT', 'out')

SCHEMA_VERSION = 1
TOOL_VERSION = "0.3.0"

# inner_core
UNIT_TOL = 1e-12
DISK_MARGIN = 1e-12
MAX_TAYLOR_ORDER = 16

# circle_quad
CHUNK_SIZE = 8192
QUAD_ABS_TOL = 1e-12
QUAD_REL_TOL = 1e-11
MIN_ADAPTIVE_GRID = 64

# clark
CLARK_PULLBACK_TOL = 1e-9
CLARK_WEIGHT_TOL = 1e-10
CLARK_ON_CIRCLE_TOL = 1e-6
CLARK_NEWTON_STEPS = 3

# sequences
LAG_CUTOFF = 1e-16

# blocks
REL_SLACK = 1e-12

# correlations
ABS_TOL = 1e-9
COV_TOL = 1e-10
REL_TOL = 1e-8
SYMMETRY_TOL = 1e-12
UNDERFLOW = 1e-14
DECAY_SLOPE_MARGIN = 0.05
Q_MIN = 1

# clt_harness
DEFAULT_T_GRID = [0, 0.5, 1.0, 1.5, 2.0, 3.0, 0.5j, 1j, 2j, 3j,
                  (1 + 1j) / 2 ** 0.5, (1 - 1j), (2 + 2j) / 2 ** 0.5]
CF_GAP_THRESHOLD = 0.02
KS_PVALUE_THRESHOLD = 0.01
CF_T_RADIUS = 3.0
MIN_SAMPLES = 1000
COMPENSATE_ABOVE = 10 ** 4
TAIL_REL_TOL = 1e-3
TAIL_CF_GAP_THRESHOLD = 0.04
