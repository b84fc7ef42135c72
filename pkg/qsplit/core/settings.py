"""
qsplit settings
Physical constants, numerical defaults and logging configuration
"""

from pathlib import Path

import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

env = environ.Env(
    QSPLIT_THREADS=(int, 0),
    QSPLIT_LOG_LEVEL=(str, 'INFO'),
)

# Units: energy eV, length nm, time fs, mass in electron masses
HBAR_EV_FS = 0.6582119569
HBAR2_2ME_EV_NM2 = 0.0380998

# Transfer matrix / stationary states
FD_STEP = 1e-4                 # nm^-1, 5-point stencil half-spacing unit
R_DEGENERATE = 1e-14           # below this R the reflection state vanishes
PARITY_TOL = 1e-9
SERIES_SWITCH = 0.1            # |kappa d| below which closed forms use series

# Spectral synthesis
K_GRID_POINTS = 4096
K_SPAN_SIGMAS = 9.0
K_TAIL_CUTOFF = 1e-8
NEGATIVE_K_MASS = 1e-8
X_GRID = {'min': -200.0, 'max': 800.0, 'step': 0.25}
SYNTH_CHUNK = 512

# Observables / timing
ZERO_NORM = 1e-12
ZERO_WEIGHT = 1e-12
ROOT_SCAN_DT = 1.0             # fs
ROOT_TOL = 0.01                # fs
CM_FIT_WINDOW = (0.0, 100.0)   # fs
CM_FIT_SAMPLES = 11
BALLISTIC_TOL = 0.01

# Crank-Nicolson oracle
ORACLE_DX = 0.025
ORACLE_DT = 0.02
ORACLE_DOMAIN = (-400.0, 1200.0)
ORACLE_PHASE_LIMIT = 0.1
ORACLE_POINTS_PER_WAVELENGTH = 8
BOUNDARY_LEAK = 1e-10

# Output
CSV_FLOAT_FORMAT = '%.17g'
SCHEMA_VERSION = '1.0'
FIXTURES_DIR = BASE_DIR / 'apps' / 'scenarios' / 'fixtures'
BUNDLED_SCENARIOS = {'barrier': 'barrier_fig1.json', 'well': 'well_fig4.json'}

THREADS = env('QSPLIT_THREADS')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'qsplit': {
            'handlers': ['console'],
            'level': env('QSPLIT_LOG_LEVEL'),
            'propagate': False,
        },
    },
}
