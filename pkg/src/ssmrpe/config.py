"""Run configuration shared by the evaluation harness and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

from .core import check_window_size
from .errors import ConfigError
from .ssgraph import DEFAULT_EPS
from .wmf import DEFAULT_GAMMA0

METHODS = ("raw", "pca", "npe", "ssmrpe")

DEFAULT_W = 13
DEFAULT_K = 20
DEFAULT_D = 30


@dataclass(frozen=True)
class RunConfig:
    """Method choice plus every knob of the embedding pipeline.

    ``ridge = None`` selects the trace-scaled default at fit time;
    ``scd_const`` overrides the coordinate-distance divisor with a constant
    (the baseline-equivalence switch); ``project_filtered`` projects
    filtered instead of raw spectra.
    """

    method: str = "ssmrpe"
    w: int = DEFAULT_W
    k: int = DEFAULT_K
    d: int = DEFAULT_D
    gamma0: float = DEFAULT_GAMMA0
    eps: float = DEFAULT_EPS
    ridge: float | None = None
    project_filtered: bool = False
    scd_const: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        check_window_size(self.w)
        if self.k < 1:
            raise ConfigError(f"neighbor count must be >= 1, got {self.k}")
        if self.d < 1:
            raise ConfigError(f"embedding dimension must be >= 1, got {self.d}")
        if not (self.gamma0 > 0):
            raise ConfigError(f"gamma0 must be > 0, got {self.gamma0}")
        if not (self.eps >= 0):
            raise ConfigError(f"eps must be >= 0, got {self.eps}")
        if self.ridge is not None and not (self.ridge >= 0):
            raise ConfigError(f"ridge must be >= 0, got {self.ridge}")
        if self.scd_const is not None and not (self.scd_const > 0):
            raise ConfigError(f"scd-const must be > 0, got {self.scd_const}")
