"""
Configuration settings for shiftlab.
"""
import os


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


class Config:
    """Centralized configuration for exact and approximate shift analysis."""

    # Approx track (mpmath)
    PRECISION_BITS = _env_int("SHIFTLAB_PRECISION_BITS", 64)
    GUARD_BITS = 16
    APPROX_TOL = 1e-12

    # Truncation depths
    HANKEL_DEPTH = 10
    LATTICE_DEPTH = 10
    RECT = (8, 8)
    SCREEN_K = 4
    MOMENT_CHECK_DEPTH = 8
    MONOMIAL_OFFSETS = 3
    DOMINATES_MAX_SPLITS = 30

    # Bisection
    BISECT_TOL = "1/1000000000"
    BISECT_MAX_ITER = 200

    # Sweeps and random suites
    SWEEP_WORKERS = _env_int("SHIFTLAB_SWEEP_WORKERS", 1)
    DEFAULT_SEED = 7
    TC_INSTANCES = 200
    FLAT_INSTANCES = 50
    GRID_SIZE = 50
    CONJECTURE_INSTANCES = 40
    MAX_UNDECIDED_SHARE = 0.1

    # Theorems known to the verifier
    THEOREMS = (
        "firstmain",
        "powhyp",
        "thm1",
        "pro1",
        "tc_propagation",
        "equivalent",
        "four",
        "thm4",
        "conjecture",
    )

    @classmethod
    def working_precision(cls) -> int:
        """Binary precision of the approx-track context."""
        return cls.PRECISION_BITS + cls.GUARD_BITS

    @classmethod
    def get_precision_info(cls):
        """Return numeric settings for logging."""
        return {
            "precision_bits": cls.PRECISION_BITS,
            "working_precision": cls.working_precision(),
            "approx_tol": cls.APPROX_TOL,
            "hankel_depth": cls.HANKEL_DEPTH,
            "lattice_depth": cls.LATTICE_DEPTH,
            "rect": cls.RECT,
            "sweep_workers": cls.SWEEP_WORKERS,
        }
