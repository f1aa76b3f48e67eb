"""Number backends for the coefficient chains: IEEE double or mpmath extended precision."""

import math
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from mpmath import mp

from config import settings, setup_logging
from model.params import ModelParams, Regime

logger = setup_logging("solvers.precision")

# Digits of double precision the general path may spend on cancellation before auto
# mode switches to mpmath.
MAX_DOUBLE_LOSS = 6.0
MIN_EXTENDED_DPS = 30

# A sign-only screen in double may lose this many digits; below MIN_SCREEN_N it is useless.
MAX_SCREEN_LOSS = 12.0
MIN_SCREEN_N = 8


@dataclass(frozen=True)
class NumericContext:
    """
    Arithmetic used by one chain evaluation.

    ``dps=None`` selects Python floats / float64 arrays. Otherwise values are ``mp.mpf``
    scalars or object arrays of them, evaluated inside ``mp.workdps(dps)``.
    """

    dps: Optional[int] = None

    @property
    def extended(self) -> bool:
        return self.dps is not None

    def workspace(self):
        return mp.workdps(self.dps) if self.extended else nullcontext()

    def scalar(self, value: Any) -> Any:
        return mp.mpf(value) if self.extended else float(value)

    def energies(self, energy: Any) -> Any:
        """Convert one trial energy (scalar) or a grid of them (1-d array)."""
        if np.ndim(energy) == 0:
            return self.scalar(energy)
        if self.extended:
            return np.array([mp.mpf(e) for e in np.ravel(energy)], dtype=object)
        return np.asarray(energy, dtype=float).ravel()

    def to_float(self, value: Any) -> Any:
        if isinstance(value, np.ndarray):
            return value.astype(float)
        return float(value)

    def describe(self) -> str:
        return f"mpmath dps={self.dps}" if self.extended else "double"


DOUBLE = NumericContext()


def digits_lost(p: ModelParams, n_max: int) -> float:
    """
    Estimate the decimal digits the unequal-coupling determinant loses to cancellation.

    Both determinant terms grow like (g/|g'|)^n from the dominant d-space solution, times
    the A-chain growth g/(g - |g'|), times the B-chain growth when |g'| > g - |g'|.
    """
    g = p.g_sum
    gp = abs(p.g_diff)
    if gp == 0.0 or g <= gp:
        return 0.0
    growth = (g / gp) * (g / (g - gp)) * max(1.0, gp / (g - gp))
    return max(0.0, n_max * math.log10(growth))


def context_for(
    p: ModelParams, n_max: int, regime: Regime, precision: Optional[str] = None
) -> NumericContext:
    """
    Choose the arithmetic for evaluating G-functions at one parameter point.

    Args:
        p: Canonical model parameters
        n_max: Truncation of the chains
        regime: Solving path for p
        precision: "auto", "double" or "extended" (defaults to the configured policy)

    Returns:
        NumericContext to evaluate with
    """
    mode = precision or settings.precision
    if mode == "double":
        return DOUBLE

    lost = digits_lost(p, n_max) if regime is Regime.GENERAL else 0.0
    if mode == "auto" and lost < MAX_DOUBLE_LOSS:
        return DOUBLE

    wanted = settings.guard_digits + math.ceil(lost)
    dps = min(settings.max_dps, max(MIN_EXTENDED_DPS, wanted))
    if wanted > settings.max_dps:
        logger.warning(
            f"Cancellation estimate needs {wanted} digits, capped at max_dps={settings.max_dps}"
        )
    logger.debug(f"Extended precision for n_max={n_max}: {lost:.1f} digits at risk, dps={dps}")
    return NumericContext(dps=dps)


def screening_truncation(p: ModelParams, n_max: int) -> Optional[int]:
    """
    Largest truncation (at most n_max) whose G-function keeps readable signs in double.

    Returns None when cancellation grows so fast that fewer than MIN_SCREEN_N terms fit.
    """
    per_term = digits_lost(p, 1)
    if per_term == 0.0:
        return n_max
    n_screen = math.floor(MAX_SCREEN_LOSS / per_term)
    if n_screen < MIN_SCREEN_N:
        return None
    return min(n_screen, n_max)
