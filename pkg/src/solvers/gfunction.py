"""
G-functions whose zeros are the regular spectrum.

Unequal couplings use the 2x2 determinant built from the A-space and B-space conditions,
with one column per d-space start (a0, b0) = (1, 0) and (0, 1). Equal couplings use the
scalar A-space condition of the reduced chain, cross-checked by the forward residual of
the three-term chain. Evaluation only: grids and root handling live in solvers.spectrum.
"""

from dataclasses import dataclass
from typing import Any, Dict, Literal, Optional, Sequence, Tuple

import numpy as np

from config import settings, setup_logging
from model.params import ModelParams, Parity, Regime, classify_regime
from solvers.errors import PoleAtA, PoleAtB, PoleAtInteger, RegimeError
from solvers.precision import NumericContext, context_for
from solvers.recurrence import (
    TruncationConfig,
    _a_chain,
    _b_chain,
    _d_chain,
    _eq_chain,
    _project_a,
    _project_b,
    _project_eq,
    _three_term_chain,
    default_init_choice,
    default_truncation,
    integer_pole_indices,
)

logger = setup_logging("solvers.gfunction")

EntryName = Literal["11", "12", "21", "22"]


@dataclass(frozen=True)
class GEvaluation:
    energy: float
    value: Optional[float]
    parity: Parity
    n_max_used: int
    pole_adjacent: bool
    entries: Optional[Tuple[float, float, float, float]] = None
    tail: Optional[float] = None


@dataclass(frozen=True)
class PoleMap:
    a_poles: Tuple[float, ...]
    b_poles: Tuple[float, ...]
    integer_poles: Tuple[float, ...]

    def energies(self) -> Tuple[float, ...]:
        return tuple(sorted(set(self.a_poles) | set(self.b_poles) | set(self.integer_poles)))

    def in_window(self, window: Tuple[float, float]) -> Tuple[float, ...]:
        lo, hi = window
        return tuple(e for e in self.energies() if lo <= e <= hi)


def pole_map(p: ModelParams, trunc: TruncationConfig, parity: Optional[Parity] = None) -> PoleMap:
    """
    Enumerate the pole energies of the chains used for p up to trunc.n_max.

    Args:
        p: Canonical parameters
        trunc: Truncation
        parity: Restrict the integer poles of the equal-coupling chain to one sector

    Returns:
        PoleMap with sorted pole energies
    """
    n_max = trunc.n_max
    g2 = p.g_sum**2
    a_poles = tuple(m - g2 for m in range(n_max + 1))

    if classify_regime(p) is Regime.EQUAL_COUPLING:
        integers = tuple(float(m) for m in integer_pole_indices(p, parity, n_max))
        return PoleMap(a_poles=a_poles, b_poles=(), integer_poles=integers)

    gp2 = p.g_diff**2
    b_poles = tuple(m - gp2 for m in range(n_max + 1))
    return PoleMap(a_poles=a_poles, b_poles=b_poles, integer_poles=())


def _peak(coeffs: Sequence[Any]) -> Any:
    return np.abs(np.array(coeffs, dtype=object)).max(axis=0)


def _tail_ratio(terms: Sequence[Any]) -> float:
    total = abs(sum(terms))
    last = abs(terms[-1])
    if total == 0:
        return float("inf") if last else 0.0
    return float(last / total)


class _Evaluator:
    """Shared pole bookkeeping for the per-sector evaluators."""

    def __init__(
        self,
        p: ModelParams,
        parity: Parity,
        trunc: Optional[TruncationConfig] = None,
        ctx: Optional[NumericContext] = None,
        precision: Optional[str] = None,
    ):
        self.params = p
        self.parity = parity
        self.regime = classify_regime(p)
        if self.regime not in (Regime.GENERAL, Regime.EQUAL_COUPLING):
            raise RegimeError(f"No G-function for {self.regime.value} parameters (oracle only)")
        self.trunc = trunc or default_truncation(self.regime)
        self.precision = precision
        self._explicit_ctx = ctx
        self.ctx = ctx or context_for(p, self.trunc.n_max, self.regime, precision)
        self.poles = self._pole_energies()
        self._pole_array = np.array(self.poles, dtype=float)
        self._cache: Dict[float, Any] = {}

    def _pole_energies(self) -> Tuple[float, ...]:
        return pole_map(self.params, self.trunc, self.parity).energies()

    def with_truncation(self, trunc: TruncationConfig) -> "_Evaluator":
        return type(self)(self.params, self.parity, trunc, self._explicit_ctx, self.precision)

    def pole_mask(self, energies: np.ndarray) -> np.ndarray:
        energies = np.asarray(energies, dtype=float)
        if self._pole_array.size == 0:
            return np.zeros(energies.shape, dtype=bool)
        distance = np.abs(energies[:, None] - self._pole_array[None, :]).min(axis=1)
        return distance < settings.eps_pole

    def is_pole_adjacent(self, energy: float) -> bool:
        return bool(self.pole_mask(np.array([float(energy)]))[0])

    def values(self, energies: Sequence[float]) -> np.ndarray:
        """Evaluate on a grid; pole-adjacent samples come back as NaN."""
        energies = np.asarray(energies, dtype=float)
        out = np.full(energies.shape, np.nan)
        good = ~self.pole_mask(energies)
        if good.any():
            with self.ctx.workspace(), np.errstate(all="ignore"):
                raw = self._compute(self.ctx.energies(energies[good]))
                out[good] = self.ctx.to_float(raw)
        return out

    def value(self, energy: float) -> Optional[Any]:
        """Evaluate at one energy in the working arithmetic; None when pole-adjacent."""
        energy = float(energy)
        if energy in self._cache:
            return self._cache[energy]
        if self.is_pole_adjacent(energy):
            return None
        with self.ctx.workspace():
            result = self._compute(self.ctx.energies(energy))
        self._cache[energy] = result
        return result

    def _compute(self, energy: Any) -> Any:
        raise NotImplementedError

    def _constants(self) -> Tuple[Any, Any, Any, Any]:
        p = self.params
        return tuple(self.ctx.scalar(x) for x in (p.delta1, p.delta2, p.g_sum, p.g_diff))


class GFunction(_Evaluator):
    """
    G-function of one parity sector at fixed truncation.

    General regime: determinant G11*G22 - G12*G21. Equal couplings: the scalar sum over
    (u_n - sign*z_n) g^n of the reduced chain.
    """

    @property
    def uses_determinant(self) -> bool:
        return self.regime is Regime.GENERAL

    def _compute(self, energy: Any) -> Any:
        if self.uses_determinant:
            g11, g12, g21, g22 = self._entries(energy)
            return g11 * g22 - g12 * g21
        return sum(self._equal_terms(energy))

    def _columns(self, energy: Any):
        d1, d2, g, gp = self._constants()
        sign = self.parity.sign
        n_max = self.trunc.n_max
        one = energy * 0 + 1
        zero = energy * 0
        ratio = gp / g
        for a0, b0 in ((one, zero), (zero, one)):
            a, b = _d_chain(d1, d2, g, gp, sign, energy, a0, b0, n_max)
            v0, w0, z0 = _project_a(a, b, sign)
            u, _, _, z = _a_chain(d1, d2, g, gp, energy, v0, w0, z0, n_max)
            a_terms = [un - sign * zn for un, zn in zip(u, z)]
            u0, w0, z0 = _project_b(a, b, sign, ratio)
            _, v, w, _ = _b_chain(d1, d2, g, gp, energy, u0, w0, z0, n_max)
            b_terms = [vn - sign * wn for vn, wn in zip(v, w)]
            yield a_terms, b_terms

    def _entries(self, energy: Any) -> Tuple[Any, Any, Any, Any]:
        (a1, b1), (a2, b2) = self._columns(energy)
        return sum(a1), sum(a2), sum(b1), sum(b2)

    def _equal_terms(self, energy: Any):
        d1, d2, g, _ = self._constants()
        sign = self.parity.sign
        n_max = self.trunc.n_max
        start_with_b = default_init_choice(self.params) == "b0"
        a, b = _three_term_chain(d1, d2, g, sign, energy, start_with_b, n_max)
        y0, z0, x0 = _project_eq(a, b, d1, d2, sign)
        u, _, _, z = _eq_chain(d1, d2, g, energy, y0, z0, x0, n_max)
        return [un - sign * zn for un, zn in zip(u, z)]

    def entries(self, energy: float) -> Tuple[float, float, float, float]:
        """(G11, G12, G21, G22) at one energy (general regime only)."""
        if not self.uses_determinant:
            raise RegimeError("Determinant entries exist only for unequal couplings")
        self._raise_if_pole(energy)
        with self.ctx.workspace():
            return tuple(float(x) for x in self._entries(self.ctx.energies(energy)))

    def evaluate(self, energy: float) -> GEvaluation:
        """Evaluate with metadata: entries and the worst tail-to-sum ratio."""
        n_max = self.trunc.n_max
        if self.is_pole_adjacent(energy):
            return GEvaluation(energy, None, self.parity, n_max, pole_adjacent=True)

        with self.ctx.workspace():
            e = self.ctx.energies(energy)
            if self.uses_determinant:
                (a1, b1), (a2, b2) = self._columns(e)
                g11, g12, g21, g22 = sum(a1), sum(a2), sum(b1), sum(b2)
                value = g11 * g22 - g12 * g21
                entries = tuple(float(x) for x in (g11, g12, g21, g22))
                tail = max(_tail_ratio(t) for t in (a1, a2, b1, b2))
            else:
                terms = self._equal_terms(e)
                value = sum(terms)
                entries = None
                tail = _tail_ratio(terms)
        return GEvaluation(
            energy=float(energy),
            value=float(value),
            parity=self.parity,
            n_max_used=n_max,
            pole_adjacent=False,
            entries=entries,
            tail=tail,
        )

    def coefficient_decay(self, energy: float) -> float:
        """
        Tail-to-peak ratio of the scaled d-space coefficients at one energy.

        General regime: the two column series are combined so that the last b-coefficient
        cancels, which removes the solution growing like (g/g')^n; what remains decays only
        at an eigenvalue. Equal couplings: the three-term chain itself.
        """
        with self.ctx.workspace():
            e = self.ctx.energies(energy)
            d1, d2, g, gp = self._constants()
            sign = self.parity.sign
            n_max = self.trunc.n_max
            if self.uses_determinant:
                one, zero = e * 0 + 1, e * 0
                a1, b1 = _d_chain(d1, d2, g, gp, sign, e, one, zero, n_max)
                a2, b2 = _d_chain(d1, d2, g, gp, sign, e, zero, one, n_max)
                c1, c2 = b2[-1], -b1[-1]
                a = [c1 * x + c2 * y for x, y in zip(a1, a2)]
                b = [c1 * x + c2 * y for x, y in zip(b1, b2)]
                tail = max(abs(a[-1]), abs(a[-2]), abs(b[-2]))
            else:
                start_with_b = default_init_choice(self.params) == "b0"
                a, b = _three_term_chain(d1, d2, g, sign, e, start_with_b, n_max)
                tail = max(abs(a[-1]), abs(b[-1]))
            peak = max(_peak(a), _peak(b))
            if peak == 0:
                return float("inf")
            return float(tail / peak)

    def _raise_if_pole(self, energy: float) -> None:
        if not self.is_pole_adjacent(energy):
            return
        g2 = self.params.g_sum**2
        for m in range(self.trunc.n_max + 1):
            if abs(energy - (m - g2)) < settings.eps_pole:
                raise PoleAtA(m, m - g2)
        gp2 = self.params.g_diff**2
        for m in range(self.trunc.n_max + 1):
            if abs(energy - (m - gp2)) < settings.eps_pole:
                raise PoleAtB(m, m - gp2)
        raise PoleAtInteger(round(energy), float(round(energy)))


class ContinuedFractionResidual(_Evaluator):
    """
    Forward residual of the equal-coupling three-term chain: the last scaled coefficient
    a~_{n_max} over the largest |a~_n|. It changes sign where the dominant solution drops
    out of the chain, i.e. at the eigenvalues.
    """

    def __init__(self, p: ModelParams, parity: Parity, *args, **kwargs):
        super().__init__(p, parity, *args, **kwargs)
        if self.regime is not Regime.EQUAL_COUPLING:
            raise RegimeError("The three-term chain exists only for equal couplings")

    def _pole_energies(self) -> Tuple[float, ...]:
        indices = integer_pole_indices(self.params, self.parity, self.trunc.n_max)
        if default_init_choice(self.params) == "b0":
            indices = [m for m in indices if m != 0]
        return tuple(float(m) for m in indices)

    def _compute(self, energy: Any) -> Any:
        d1, d2, g, _ = self._constants()
        start_with_b = default_init_choice(self.params) == "b0"
        a, _ = _three_term_chain(
            d1, d2, g, self.parity.sign, energy, start_with_b, self.trunc.n_max
        )
        return a[-1] / _peak(a)


def _evaluator_for(p, parity, trunc, ctx, regime: Regime) -> GFunction:
    evaluator = GFunction(p, parity, trunc, ctx)
    if evaluator.regime is not regime:
        raise RegimeError(
            f"{evaluator.regime.value} parameters cannot use the {regime.value} G-function"
        )
    return evaluator


def g_entry(
    p: ModelParams,
    parity: Parity,
    energy: float,
    which: EntryName,
    trunc: Optional[TruncationConfig] = None,
    ctx: Optional[NumericContext] = None,
) -> float:
    """
    One entry of the 2x2 determinant.

    G11/G12 are the A-space conditions of the (1, 0)/(0, 1) columns, G21/G22 the
    B-space conditions.

    Raises:
        PoleAtA, PoleAtB: If E is pole-adjacent (an entry has no value there)
    """
    evaluator = _evaluator_for(p, parity, trunc, ctx, Regime.GENERAL)
    index = {"11": 0, "12": 1, "21": 2, "22": 3}[which]
    return evaluator.entries(energy)[index]


def g_det(
    p: ModelParams,
    parity: Parity,
    energy: float,
    trunc: Optional[TruncationConfig] = None,
    ctx: Optional[NumericContext] = None,
) -> GEvaluation:
    """Determinant G-function for unequal couplings (flagged, valueless at poles)."""
    return _evaluator_for(p, parity, trunc, ctx, Regime.GENERAL).evaluate(energy)


def g_equal(
    p: ModelParams,
    parity: Parity,
    energy: float,
    trunc: Optional[TruncationConfig] = None,
    ctx: Optional[NumericContext] = None,
) -> GEvaluation:
    """Determinant-free G-function for equal couplings (flagged, valueless at poles)."""
    return _evaluator_for(p, parity, trunc, ctx, Regime.EQUAL_COUPLING).evaluate(energy)


def cf_residual(
    p: ModelParams,
    parity: Parity,
    energy: float,
    trunc: Optional[TruncationConfig] = None,
    ctx: Optional[NumericContext] = None,
) -> float:
    """
    Normalized tail residual of the three-term chain.

    Raises:
        PoleAtInteger: If E is within eps_pole of an integer pole of the chain
    """
    evaluator = ContinuedFractionResidual(p, parity, trunc, ctx)
    value = evaluator.value(energy)
    if value is None:
        m = int(round(energy))
        raise PoleAtInteger(m, float(m))
    return float(value)
