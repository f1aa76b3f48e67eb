"""
Coefficient chains of the displaced-Fock expansions.

All chains are carried in scaled form c~_n = c_n * s^n, where s is the displacement the
G-functions later evaluate at (g for the d-space, A-space and equal-coupling chains, g' for
the B-space chain). The G-functions and projections only ever consume c_n * s^n, and the
scaled recurrences stay finite as s -> 0.

The private ``_*_chain`` functions are written once for three kinds of energy argument:
Python floats, float64 arrays (vectorized scans) and mpmath numbers or object arrays of
them (extended precision). They never branch on the energy value.
"""

import warnings
from dataclasses import dataclass
from typing import Any, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from config import settings, setup_logging
from model.params import ModelParams, Parity, Regime, classify_regime
from solvers.errors import PoleAtA, PoleAtB, PoleAtInteger, RegimeError, TruncationWarning
from solvers.precision import DOUBLE, NumericContext

logger = setup_logging("solvers.recurrence")


class TruncationConfig(BaseModel):
    """Number of retained expansion terms and the increment used by convergence re-runs."""

    model_config = ConfigDict(frozen=True)

    n_max: int = Field(ge=2)
    n_max_step: int = Field(1, ge=1)

    def stepped(self) -> "TruncationConfig":
        return TruncationConfig(n_max=self.n_max + self.n_max_step, n_max_step=self.n_max_step)

    def with_n_max(self, n_max: int) -> "TruncationConfig":
        return TruncationConfig(n_max=n_max, n_max_step=self.n_max_step)


def default_truncation(regime: Regime) -> TruncationConfig:
    n_max = settings.n_max_equal if regime is Regime.EQUAL_COUPLING else settings.n_max_general
    return TruncationConfig(n_max=n_max, n_max_step=settings.n_max_step)


@dataclass(frozen=True)
class DSeries:
    """Scaled d-space coefficients a~_n = a_n g^n, b~_n = b_n g^n."""

    a: Tuple[Any, ...]
    b: Tuple[Any, ...]
    parity: Parity
    energy: Any
    scale: float

    @property
    def n_max(self) -> int:
        return len(self.a) - 1

    def unscaled(self) -> Tuple[List[Any], List[Any]]:
        return _unscale(self.a, self.scale), _unscale(self.b, self.scale)


@dataclass(frozen=True)
class ASeries:
    """Scaled A-space coefficients (displacement g)."""

    u: Tuple[Any, ...]
    v: Tuple[Any, ...]
    w: Tuple[Any, ...]
    z: Tuple[Any, ...]
    energy: Any
    scale: float

    def unscaled(self) -> Tuple[List[Any], ...]:
        return tuple(_unscale(c, self.scale) for c in (self.u, self.v, self.w, self.z))


@dataclass(frozen=True)
class BSeries:
    """Scaled B-space coefficients (displacement g')."""

    u: Tuple[Any, ...]
    v: Tuple[Any, ...]
    w: Tuple[Any, ...]
    z: Tuple[Any, ...]
    energy: Any
    scale: float

    def unscaled(self) -> Tuple[List[Any], ...]:
        return tuple(_unscale(c, self.scale) for c in (self.u, self.v, self.w, self.z))


@dataclass(frozen=True)
class EqSeries:
    """
    Scaled equal-coupling A-space chain.

    y_m = D2 v_m + D1 w_m feeds the u-line and x_m = D1 v_m + D2 w_m feeds the z-line;
    they coincide when the splittings are equal.
    """

    u: Tuple[Any, ...]
    y: Tuple[Any, ...]
    x: Tuple[Any, ...]
    z: Tuple[Any, ...]
    energy: Any
    scale: float

    def unscaled(self) -> Tuple[List[Any], ...]:
        return tuple(_unscale(c, self.scale) for c in (self.u, self.y, self.x, self.z))


@dataclass(frozen=True)
class EqInitial:
    y0: Any
    z0: Any
    x0: Any

    def as_tuple(self) -> Tuple[Any, Any, Any]:
        return self.y0, self.z0, self.x0


def _unscale(coeffs: Sequence[Any], scale: float) -> List[Any]:
    if scale == 0:
        raise ValueError("coefficients scaled by a vanishing displacement cannot be unscaled")
    out = []
    power = 1
    for c in coeffs:
        out.append(c / power)
        power = power * scale
    return out


def bracket_factor(p: ModelParams, parity: Parity, m: int) -> float:
    """D_m = D2 + sign*(-1)^m D1, the coupling of e_m and f_m (with a minus sign) in one sector."""
    return p.delta2 + parity.sign * (-1) ** m * p.delta1


def _bracket(d1: Any, d2: Any, sign: int, m: int) -> Any:
    return d2 + d1 if sign * (-1) ** m > 0 else d2 - d1


def _swapped_bracket(d1: Any, d2: Any, sign: int, m: int) -> Any:
    return d1 + d2 if sign * (-1) ** m > 0 else d1 - d2


def _alt(n: int) -> int:
    return -1 if n % 2 else 1


# Chain kernels


def _d_chain(d1, d2, g, gp, sign, energy, a0, b0, n_max):
    g2 = g * g
    ratio = g / gp
    a, b = [a0], [b0]
    a_prev = b_prev = 0
    for m in range(n_max):
        dm = _bracket(d1, d2, sign, m)
        shift = m - energy
        a_next = (dm * b[m] - shift * a[m] - g2 * a_prev) / (m + 1)
        b_next = (ratio * (dm * a[m] - shift * b[m]) - g2 * b_prev) / (m + 1)
        a_prev, b_prev = a[m], b[m]
        a.append(a_next)
        b.append(b_next)
    return a, b


def _a_chain(d1, d2, g, gp, energy, v0, w0, z0, n_max):
    g2 = g * g
    cross = 2 * g * gp
    k_minus = g / (g - gp)
    k_plus = g / (g + gp)
    u, v, w, z = [], [v0], [w0], [z0]
    v_prev = w_prev = z_prev = 0
    for m in range(n_max + 1):
        shift = m - energy
        u_m = (d2 * v[m] + d1 * w[m]) / (shift - g2)
        u.append(u_m)
        if m == n_max:
            break
        v_next = (k_minus * ((shift + g2 - cross) * v[m] - d2 * u_m - d1 * z[m]) - g2 * v_prev) / (
            m + 1
        )
        w_next = (k_plus * ((shift + g2 + cross) * w[m] - d1 * u_m - d2 * z[m]) - g2 * w_prev) / (
            m + 1
        )
        z_next = (((shift + 3 * g2) * z[m] - d1 * v[m] - d2 * w[m]) / 2 - g2 * z_prev) / (m + 1)
        v_prev, w_prev, z_prev = v[m], w[m], z[m]
        v.append(v_next)
        w.append(w_next)
        z.append(z_next)
    return u, v, w, z


def _b_chain(d1, d2, g, gp, energy, u0, w0, z0, n_max):
    h2 = gp * gp
    cross = 2 * g * gp
    k_minus = gp / (g - gp)
    k_plus = gp / (g + gp)
    u, v, w, z = [u0], [], [w0], [z0]
    u_prev = w_prev = z_prev = 0
    for m in range(n_max + 1):
        shift = m - energy
        v_m = (d2 * u[m] + d1 * z[m]) / (shift - h2)
        v.append(v_m)
        if m == n_max:
            break
        u_next = (k_minus * (d2 * v_m + d1 * w[m] - (shift + h2 - cross) * u[m]) - h2 * u_prev) / (
            m + 1
        )
        w_next = (((shift + 3 * h2) * w[m] - d1 * u[m] - d2 * z[m]) / 2 - h2 * w_prev) / (m + 1)
        z_next = (k_plus * ((shift + h2 + cross) * z[m] - d1 * v_m - d2 * w[m]) - h2 * z_prev) / (
            m + 1
        )
        u_prev, w_prev, z_prev = u[m], w[m], z[m]
        u.append(u_next)
        w.append(w_next)
        z.append(z_next)
    return u, v, w, z


def _eq_chain(d1, d2, g, energy, y0, z0, x0, n_max):
    g2 = g * g
    same = d1 * d1 + d2 * d2
    mixed = 2 * d1 * d2
    u, y, x, z = [], [y0], [x0], [z0]
    y_prev = x_prev = z_prev = 0
    for m in range(n_max + 1):
        shift = m - energy
        u_m = y[m] / (shift - g2)
        u.append(u_m)
        if m == n_max:
            break
        y_next = ((shift + g2) * y[m] - same * u_m - mixed * z[m] - g2 * y_prev) / (m + 1)
        x_next = ((shift + g2) * x[m] - mixed * u_m - same * z[m] - g2 * x_prev) / (m + 1)
        z_next = (((shift + 3 * g2) * z[m] - x[m]) / 2 - g2 * z_prev) / (m + 1)
        y_prev, x_prev, z_prev = y[m], x[m], z[m]
        y.append(y_next)
        x.append(x_next)
        z.append(z_next)
    return u, y, x, z


def _three_term_chain(d1, d2, g, sign, energy, start_with_b, n_max):
    g2 = g * g
    one = energy * 0 + 1
    d0 = _bracket(d1, d2, sign, 0)
    if start_with_b:
        b0 = one
        a0 = -energy * one / d0
    else:
        a0 = one
        b0 = d0 * one / (0 - energy) if d0 != 0 else one * 0

    a, b = [a0], [b0]
    a_prev = 0
    for m in range(n_max):
        dm = _bracket(d1, d2, sign, m)
        a_next = (dm * b[m] - (m - energy) * a[m] - g2 * a_prev) / (m + 1)
        a_prev = a[m]
        a.append(a_next)
        d_next = _bracket(d1, d2, sign, m + 1)
        b.append(d_next * a_next / (m + 1 - energy) if d_next != 0 else a_next * 0)
    return a, b


# Projections of the d-series onto the displaced vacua


def _project_a(a, b, sign):
    """(v0, w0, z0) of the A-space chain from a d-series scaled by g."""
    v_terms = [_alt(n) * bn for n, bn in enumerate(b)]
    return sum(v_terms), sign * sum(b), sign * sum(a)


def _project_b(a, b, sign, ratio):
    """(u0, w0, z0) of the B-space chain; ``ratio`` = g'/g converts the g-scaling to g'."""
    u0 = w0 = z0 = 0
    power = 1
    for n, (an, bn) in enumerate(zip(a, b)):
        u0 = u0 + _alt(n) * power * an
        w0 = w0 + power * bn
        z0 = z0 + power * an
        power = power * ratio
    return u0, sign * w0, sign * z0


def _project_eq(a, b, d1, d2, sign):
    """(y0, z0, x0) of the equal-coupling chain from a three-term d-series scaled by g."""
    y0 = sum(_alt(n) * _bracket(d1, d2, sign, n) * bn for n, bn in enumerate(b))
    x0 = sum(_alt(n) * _swapped_bracket(d1, d2, sign, n) * bn for n, bn in enumerate(b))
    return y0, sign * sum(a), x0


def _check_tail(terms: Sequence[Any], label: str) -> None:
    total = sum(terms)
    last = abs(terms[-1])
    if last > settings.tail_tol * abs(total):
        message = (
            f"{label} projection tail {float(last):.3e} is not negligible against "
            f"|sum| = {float(abs(total)):.3e}"
        )
        logger.debug(message)
        warnings.warn(message, TruncationWarning, stacklevel=3)


# Public operations


def _require(p: ModelParams, *regimes: Regime) -> Regime:
    regime = classify_regime(p)
    if regime not in regimes:
        allowed = ", ".join(r.value for r in regimes)
        raise RegimeError(f"{regime.value} parameters cannot use this chain (needs {allowed})")
    return regime


def _check_poles(energy: Any, offset: float, n_max: int, error) -> None:
    for m in range(n_max + 1):
        if abs(energy - (m - offset)) < settings.eps_pole:
            raise error(m, float(m - offset))


def d_space_coeffs(
    p: ModelParams,
    parity: Parity,
    energy: float,
    init: Tuple[float, float] = (1.0, 0.0),
    trunc: Optional[TruncationConfig] = None,
    ctx: NumericContext = DOUBLE,
) -> DSeries:
    """
    Run the coupled (a, b) recurrence of the d-space expansion.

    Args:
        p: Canonical parameters in the general regime
        parity: Parity sector
        energy: Trial energy E
        init: Initial pair (a0, b0)
        trunc: Truncation (defaults to the general-regime default)
        ctx: Arithmetic backend

    Returns:
        DSeries with scaled coefficients up to trunc.n_max

    Raises:
        RegimeError: If the parameters are not in the general regime
    """
    _require(p, Regime.GENERAL)
    trunc = trunc or default_truncation(Regime.GENERAL)
    with ctx.workspace():
        d1, d2, g, gp = (ctx.scalar(x) for x in (p.delta1, p.delta2, p.g_sum, p.g_diff))
        e = ctx.energies(energy)
        a0, b0 = (ctx.scalar(x) for x in init)
        a, b = _d_chain(d1, d2, g, gp, parity.sign, e, a0, b0, trunc.n_max)
    return DSeries(a=tuple(a), b=tuple(b), parity=parity, energy=energy, scale=p.g_sum)


def a_space_coeffs(
    p: ModelParams,
    energy: float,
    init: Tuple[float, float, float],
    trunc: Optional[TruncationConfig] = None,
    ctx: NumericContext = DOUBLE,
) -> ASeries:
    """
    Run the A-space recurrence from (v0, w0, z0); u_m follows algebraically.

    Raises:
        RegimeError: If g +- g' vanishes (not the general regime)
        PoleAtA: If E is within eps_pole of m - g^2 for a retained m
    """
    _require(p, Regime.GENERAL)
    trunc = trunc or default_truncation(Regime.GENERAL)
    _check_poles(energy, p.g_sum**2, trunc.n_max, PoleAtA)
    with ctx.workspace():
        d1, d2, g, gp = (ctx.scalar(x) for x in (p.delta1, p.delta2, p.g_sum, p.g_diff))
        v0, w0, z0 = (ctx.scalar(x) for x in init)
        u, v, w, z = _a_chain(d1, d2, g, gp, ctx.energies(energy), v0, w0, z0, trunc.n_max)
    return ASeries(
        u=tuple(u), v=tuple(v), w=tuple(w), z=tuple(z), energy=energy, scale=p.g_sum
    )


def b_space_coeffs(
    p: ModelParams,
    energy: float,
    init: Tuple[float, float, float],
    trunc: Optional[TruncationConfig] = None,
    ctx: NumericContext = DOUBLE,
) -> BSeries:
    """
    Run the B-space recurrence from (u0, w0, z0); v_m follows algebraically.

    Raises:
        RegimeError: If g' vanishes or g +- g' vanishes
        PoleAtB: If E is within eps_pole of m - g'^2 for a retained m
    """
    _require(p, Regime.GENERAL)
    trunc = trunc or default_truncation(Regime.GENERAL)
    _check_poles(energy, p.g_diff**2, trunc.n_max, PoleAtB)
    with ctx.workspace():
        d1, d2, g, gp = (ctx.scalar(x) for x in (p.delta1, p.delta2, p.g_sum, p.g_diff))
        u0, w0, z0 = (ctx.scalar(x) for x in init)
        u, v, w, z = _b_chain(d1, d2, g, gp, ctx.energies(energy), u0, w0, z0, trunc.n_max)
    return BSeries(
        u=tuple(u), v=tuple(v), w=tuple(w), z=tuple(z), energy=energy, scale=p.g_diff
    )


def initial_from_d(
    series: DSeries, which: Literal["A", "B"], p: ModelParams
) -> Tuple[Any, Any, Any]:
    """
    Project a d-series onto the A+ (displacement g) or B+ (displacement g') vacuum.

    The common factor exp(-s^2/2) of the vacuum overlap is dropped.

    Args:
        series: d-space coefficients of one column
        which: "A" for (v0, w0, z0), "B" for (u0, w0, z0)
        p: Parameters the series was computed for

    Returns:
        Initial triple of the requested chain; a TruncationWarning is emitted when the
        last projected term is not negligible
    """
    sign = series.parity.sign
    if which == "A":
        v0, w0, z0 = _project_a(series.a, series.b, sign)
        _check_tail([_alt(n) * bn for n, bn in enumerate(series.b)], "A-space v0")
        _check_tail(list(series.a), "A-space z0")
        return v0, w0, z0
    if which == "B":
        ratio = p.g_diff / series.scale
        result = _project_b(series.a, series.b, sign, ratio)
        _check_tail([bn * ratio**n for n, bn in enumerate(series.b)], "B-space w0")
        return result
    raise ValueError(f"Unknown expansion space: {which!r}")


def eq_coupling_coeffs(
    p: ModelParams,
    energy: float,
    init: Sequence[float],
    trunc: Optional[TruncationConfig] = None,
    ctx: NumericContext = DOUBLE,
) -> EqSeries:
    """
    Run the reduced A-space chain at equal couplings.

    Args:
        p: Canonical equal-coupling parameters
        energy: Trial energy E
        init: (y0, z0) or (y0, z0, x0); x0 defaults to y0, which is exact for equal splittings
        trunc: Truncation (defaults to the equal-coupling default)
        ctx: Arithmetic backend

    Raises:
        RegimeError: If the couplings differ
        PoleAtA: If E is within eps_pole of m - g^2
    """
    _require(p, Regime.EQUAL_COUPLING)
    trunc = trunc or default_truncation(Regime.EQUAL_COUPLING)
    _check_poles(energy, p.g_sum**2, trunc.n_max, PoleAtA)
    y0, z0 = init[0], init[1]
    x0 = init[2] if len(init) > 2 else y0
    with ctx.workspace():
        d1, d2, g = (ctx.scalar(x) for x in (p.delta1, p.delta2, p.g_sum))
        y0, z0, x0 = (ctx.scalar(x) for x in (y0, z0, x0))
        u, y, x, z = _eq_chain(d1, d2, g, ctx.energies(energy), y0, z0, x0, trunc.n_max)
    return EqSeries(
        u=tuple(u), y=tuple(y), x=tuple(x), z=tuple(z), energy=energy, scale=p.g_sum
    )


def eq_initial_from_d(series: DSeries, p: ModelParams, parity: Parity) -> EqInitial:
    """Project a three-term d-series onto the A+ vacuum, returning (y0, z0, x0)."""
    sign = parity.sign
    y0, z0, x0 = _project_eq(series.a, series.b, p.delta1, p.delta2, sign)
    _check_tail(
        [_alt(n) * bracket_factor(p, parity, n) * bn for n, bn in enumerate(series.b)],
        "equal-coupling y0",
    )
    _check_tail(list(series.a), "equal-coupling z0")
    return EqInitial(y0=y0, z0=z0, x0=x0)


def default_init_choice(p: ModelParams) -> Literal["b0", "a0"]:
    """b0=1 unless the splittings are equal, where D_0 vanishes in the odd sector."""
    return "a0" if abs(p.delta1 - p.delta2) <= settings.eps_eq else "b0"


def three_term_coeffs(
    p: ModelParams,
    parity: Parity,
    energy: float,
    init_choice: Optional[Literal["b0", "a0"]] = None,
    trunc: Optional[TruncationConfig] = None,
    ctx: NumericContext = DOUBLE,
) -> DSeries:
    """
    Run the equal-coupling d-space chain, where b_m = D_m a_m / (m - E) and a obeys a
    three-term recurrence.

    Args:
        p: Canonical equal-coupling parameters
        parity: Parity sector
        energy: Trial energy E
        init_choice: "b0" (b0=1) or "a0" (a0=1); defaults to default_init_choice(p)
        trunc: Truncation
        ctx: Arithmetic backend

    Raises:
        RegimeError: If the couplings differ
        PoleAtInteger: If E is within eps_pole of an integer m whose D_m is nonzero
    """
    _require(p, Regime.EQUAL_COUPLING)
    trunc = trunc or default_truncation(Regime.EQUAL_COUPLING)
    choice = init_choice or default_init_choice(p)
    if choice == "b0" and abs(bracket_factor(p, parity, 0)) <= settings.eps_eq:
        raise ValueError("b0=1 start needs a nonzero D_0; use a0=1")

    for m in integer_pole_indices(p, parity, trunc.n_max):
        if choice == "b0" and m == 0:
            continue
        if abs(energy - m) < settings.eps_pole:
            raise PoleAtInteger(m, float(m))

    with ctx.workspace():
        d1, d2, g = (ctx.scalar(x) for x in (p.delta1, p.delta2, p.g_sum))
        a, b = _three_term_chain(
            d1, d2, g, parity.sign, ctx.energies(energy), choice == "b0", trunc.n_max
        )
    return DSeries(a=tuple(a), b=tuple(b), parity=parity, energy=energy, scale=p.g_sum)


def integer_pole_indices(p: ModelParams, parity: Optional[Parity], n_max: int) -> List[int]:
    """Integers m <= n_max at which b_m = D_m a_m / (m - E) has a pole in the given sector(s)."""
    parities = (parity,) if parity is not None else (Parity.EVEN, Parity.ODD)
    return [
        m
        for m in range(n_max + 1)
        if any(abs(bracket_factor(p, par, m)) > settings.eps_eq for par in parities)
    ]
