"""
Configuration settings for the Mallows process lab.

Copy to config.py and adjust. Experiment parameters (n, T, replicas, ...)
come from the command line or a JSON file, not from here.
"""

# =============================================================================
# Logging
# =============================================================================
# Python logging level name: DEBUG, INFO, WARNING, ERROR, CRITICAL.
LOG_LEVEL = "INFO"
# False raises the effective level to WARNING (quiet batch runs).
LOG_VERBOSE_EVENTS = True
# Daily rolling log file lives in LOG_DIR/mallows_lab.log (7 days kept).
LOG_DIR = "logs"

# =============================================================================
# Runs & Output
# =============================================================================
# Master seed used when --seed is not given. 64-bit unsigned.
DEFAULT_SEED = 20240611
# Replica-level worker processes. Reports do not depend on this value.
WORKERS = 1
# Reports land here when --out is a bare file name or omitted.
OUTPUT_DIR = "results"

# =============================================================================
# Process Simulation
# =============================================================================
# Hard cap on jumps per simulated path before ExplosionGuard is raised.
EXPLOSION_CAP = 10_000_000
# Rates at q within this distance of 1 interpolate linearly between the q = 1 value and the closed form at the window edge.
RATE_SINGULARITY_EPS = 1e-6
# Below this |t| the limit curves use their Taylor expansion.
SERIES_SWITCH = 1e-4
# Thinning envelope: number of q-clock segments and the safety factor
# applied to the sampled rate maximum on each segment.
ENVELOPE_SEGMENTS = 32
ENVELOPE_SAFETY = 2.0

# =============================================================================
# Local Window
# =============================================================================
# Largest number of integer positions a window may be grown to.
WINDOW_EXTENSION_CAP = 100_000
# Residual mass below which a right-inversion count is certified exact.
CERTIFICATION_TOL = 1e-9
