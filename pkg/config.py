"""
Configuration settings for fractrans
Centralized numerical tolerances, capacity limits and output locations
"""

import os
from pathlib import Path
from version import __version__, get_app_identifier


class Config:
    """Configuration settings for the fractional transmission solver"""

    # ============================================================================
    # APPLICATION INFORMATION
    # ============================================================================
    APP_NAME = "fractrans"
    VERSION = __version__  # Imported from version.py
    APP_ID = get_app_identifier()  # e.g. "fractrans v0.3.0"

    # ============================================================================
    # NUMERICS
    # ============================================================================

    # |s - 1/2| at or below this routes kernels to the logarithmic formulas
    BRANCH_TOLERANCE = 1e-7

    # Critical contrast: |sigma1(1-b) + sigma2 b| relative to the contrast scale
    CRITICAL_TOLERANCE = 1e-12
    NEAR_CRITICAL_BAND = 1e-6  # Warn (do not refuse) inside this band

    # c* is degenerate below this fraction of its |sigma|-weighted counterpart
    CSTAR_DEGENERACY = 1e-10

    # Largest order accepted for fractional kernels; beyond it h^(1-2s) and C(s) cancel badly
    MAX_ORDER = 0.9999

    # ============================================================================
    # MESH
    # ============================================================================

    MAX_CELLS = 2 ** 16  # Dense matrices are O(N^2) in memory

    # ============================================================================
    # QUADRATURE
    # ============================================================================

    # Interface load and alpha1 (graded toward 0, b, 1)
    LIFTING_GAUSS_POINTS = 7
    LIFTING_GRADING_LEVELS = 40
    GRADING_RATIO = 0.5

    # Error norms: elements touching 0, b, 1 when a lifting term is present
    ERROR_GAUSS_POINTS = 7
    ERROR_GRADING_LEVELS = 30
    PROFILE_OVERSAMPLING = 10

    # ============================================================================
    # ORACLE
    # ============================================================================

    ORACLE_TOLERANCE = 1e-8  # Relative
    ORACLE_MIN_TOLERANCE = 1e-10
    ORACLE_BUDGET = 1_000_000  # Integrand evaluations per quantity
    ORACLE_START_LEVELS = 16
    ORACLE_START_POINTS = 6
    ORACLE_ABS_FLOOR = 1e-4  # Of the h^(1-2s) entry scale, for entries that cancel to zero

    VERIFY_FAIL_THRESHOLD = 1e-5
    VERIFY_MAX_CELLS = 32
    VERIFY_ZERO_FLOOR = 1e-6  # Of the largest entry; discrepancies below it count as absolute

    # ============================================================================
    # SOLVER
    # ============================================================================

    PIVOT_TOLERANCE = 1e-14  # Relative to ||A||_inf
    RESIDUAL_TOLERANCE = 1e-10

    # ============================================================================
    # OUTPUT
    # ============================================================================

    OUTPUT_DIR = "results"
    RUNS_LOG_FILE = "runs.jsonl"
    MANIFEST_FILE = "manifest.json"
    CSV_FLOAT_FORMAT = "%.17g"
    CSV_COLUMNS = (
        "h", "s", "b", "sigma1", "sigma2", "sigma3", "alpha", "model",
        "l2", "h1", "energy", "interface_abs", "walltime_ms",
    )

    # ============================================================================
    # LOGGING
    # ============================================================================

    QUIET = False  # Suppress console status lines (records are still written)
    THREADS_ENV_VAR = "FRACTRANS_THREADS"

    # ============================================================================
    # METHODS
    # ============================================================================

    @classmethod
    def get_thread_count(cls):
        """Worker pool size, capped by FRACTRANS_THREADS when it is a positive integer"""
        fallback = os.cpu_count() or 1
        raw = os.environ.get(cls.THREADS_ENV_VAR)
        if not raw:
            return fallback
        try:
            value = int(raw)
        except ValueError:
            return fallback
        return value if value > 0 else fallback

    @classmethod
    def get_output_dir(cls, override=None):
        """Output directory as a Path (created by the writers, not here)"""
        return Path(override) if override else Path(cls.OUTPUT_DIR)

    @classmethod
    def get_runs_log_file(cls, out_dir=None):
        """Path of the JSONL run log inside an output directory"""
        return cls.get_output_dir(out_dir) / cls.RUNS_LOG_FILE
