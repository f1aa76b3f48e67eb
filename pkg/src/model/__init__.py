from .params import (
    DerivedCouplings,
    ModelParams,
    Parity,
    Regime,
    classify_regime,
    derived_couplings,
    validate_params,
)

__all__ = [
    "DerivedCouplings",
    "ModelParams",
    "Parity",
    "Regime",
    "classify_regime",
    "derived_couplings",
    "validate_params",
]
