import sys
import types


if "config" not in sys.modules:
    config = types.ModuleType("config")
    config.LOG_LEVEL = "INFO"
    config.LOG_VERBOSE_EVENTS = True
    config.LOG_DIR = "logs"
    config.DEFAULT_SEED = 12345
    config.WORKERS = 1
    config.OUTPUT_DIR = "results"
    config.EXPLOSION_CAP = 10_000_000
    config.RATE_SINGULARITY_EPS = 1e-6
    config.SERIES_SWITCH = 1e-4
    config.ENVELOPE_SEGMENTS = 32
    config.ENVELOPE_SAFETY = 2.0
    config.WINDOW_EXTENSION_CAP = 100_000
    config.CERTIFICATION_TOL = 1e-9
    sys.modules["config"] = config
