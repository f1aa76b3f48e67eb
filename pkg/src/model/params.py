"""Physical parameters of the two-qubit Rabi model and the regime that routes solving."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config import settings, setup_logging

logger = setup_logging("model.params")


class Parity(str, Enum):
    """Eigenvalue of the conserved parity operator."""

    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1

    @classmethod
    def parse(cls, value: str) -> Tuple["Parity", ...]:
        """Turn a CLI-style selector ("even", "odd", "both") into a tuple of parities."""
        if value == "both":
            return (cls.EVEN, cls.ODD)
        return (cls(value),)


class Regime(str, Enum):
    GENERAL = "general"
    EQUAL_COUPLING = "equal_coupling"
    ZERO_COUPLING = "zero_coupling"
    SINGLE_QUBIT_LIKE = "single_qubit_like"


class ModelParams(BaseModel):
    """
    Qubit splittings and couplings in units of the cavity frequency.

    Instances built directly keep the signs they were given (the oracle accepts them);
    the G-function solvers work on the canonical form returned by validate_params.
    """

    model_config = ConfigDict(frozen=True)

    delta1: float = Field(allow_inf_nan=False)
    delta2: float = Field(allow_inf_nan=False)
    g1: float = Field(allow_inf_nan=False)
    g2: float = Field(allow_inf_nan=False)
    omega: float = 1.0
    sign_flips: Tuple[str, ...] = ()

    @field_validator("omega")
    @classmethod
    def _omega_is_unit(cls, value: float) -> float:
        if value != 1.0:
            raise ValueError("omega is the energy unit and must equal 1")
        return value

    @property
    def g_sum(self) -> float:
        return self.g1 + self.g2

    @property
    def g_diff(self) -> float:
        return self.g1 - self.g2

    @property
    def is_canonical(self) -> bool:
        return min(self.delta1, self.delta2, self.g1, self.g2) >= 0.0

    def canonical(self) -> "ModelParams":
        """Return the gauge-equivalent parameters with non-negative splittings and couplings."""
        flips = [name for name in ("delta1", "delta2", "g1", "g2") if getattr(self, name) < 0.0]
        if not flips:
            return self
        update = {name: abs(getattr(self, name)) for name in flips}
        update["sign_flips"] = tuple(self.sign_flips) + tuple(flips)
        return self.model_copy(update=update)

    def with_couplings(self, g1: float, g2: float) -> "ModelParams":
        return self.model_copy(update={"g1": g1, "g2": g2})

    def as_dict(self) -> dict:
        return {"delta1": self.delta1, "delta2": self.delta2, "g1": self.g1, "g2": self.g2}


@dataclass(frozen=True)
class DerivedCouplings:
    g_sum: float
    g_diff: float


def validate_params(delta1: float, delta2: float, g1: float, g2: float) -> ModelParams:
    """
    Build canonical model parameters from raw user input.

    Args:
        delta1: Splitting of qubit 1
        delta2: Splitting of qubit 2
        g1: Coupling of qubit 1
        g2: Coupling of qubit 2

    Returns:
        ModelParams with non-negative entries; ``sign_flips`` names every field whose
        sign was absorbed by a qubit rotation

    Raises:
        ValueError: If an input is not a finite real number
    """
    raw = {"delta1": delta1, "delta2": delta2, "g1": g1, "g2": g2}
    for name, value in raw.items():
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ValueError(f"{name} must be a real number, got {value!r}") from None
        if not math.isfinite(number):
            raise ValueError(f"{name} must be finite, got {value!r}")
        raw[name] = number

    params = ModelParams(**raw).canonical()
    if params.sign_flips:
        logger.info(f"Canonicalized signs of {', '.join(params.sign_flips)} (gauge symmetry)")
    return params


def derived_couplings(p: ModelParams) -> DerivedCouplings:
    return DerivedCouplings(g_sum=p.g1 + p.g2, g_diff=p.g1 - p.g2)


def classify_regime(p: ModelParams, eps_eq: Optional[float] = None) -> Regime:
    """
    Pick the solving path for a parameter point.

    Args:
        p: Canonical model parameters
        eps_eq: Coupling tolerance (defaults to the configured eps_eq)

    Returns:
        The unique Regime tag
    """
    eps = settings.eps_eq if eps_eq is None else eps_eq
    g1_off = abs(p.g1) <= eps
    g2_off = abs(p.g2) <= eps

    if g1_off and g2_off:
        return Regime.ZERO_COUPLING
    if g1_off or g2_off:
        return Regime.SINGLE_QUBIT_LIKE
    if abs(p.g1 - p.g2) <= eps:
        return Regime.EQUAL_COUPLING
    return Regime.GENERAL
