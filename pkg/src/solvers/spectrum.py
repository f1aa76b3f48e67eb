"""
Certified level lists from the G-functions.

Scans bracket the sign changes of G between poles, brackets are refined by bisection and
every zero is located again at n_max + n_max_step. Zeros that move, or whose coefficients do
not decay, are rejected as spurious. Equal couplings add the coupling-independent dark and
spin-singlet levels; pole energies are certified against the oracle only.
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from config import settings, setup_logging
from model.params import ModelParams, Parity, Regime, classify_regime, validate_params
from oracle.diagonalization import oracle_levels
from solvers.errors import BracketError, SolverError
from solvers.gfunction import ContinuedFractionResidual, GFunction, pole_map
from solvers.precision import DOUBLE, screening_truncation
from solvers.recurrence import TruncationConfig, default_truncation

logger = setup_logging("solvers.spectrum")

LevelKind = Literal["regular", "exceptional", "dark", "singlet"]
Window = Tuple[float, float]

DEFAULT_E_MAX = 5.0
# Half-widths (times max(1, |E|)) searched for a zero after changing the truncation
TRACK_WINDOWS = tuple(1e-9 * 10**k for k in range(8))
CF_AGREEMENT = 1e-8
MAX_BISECTIONS = 200
MAX_RESCANS = 4
# Degenerate levels (spacing 0) are tracked against this spacing instead
MIN_TRACK_SPACING = 1e-6


@dataclass(frozen=True)
class EnergyLevel:
    energy: float
    parity: Parity
    kind: LevelKind
    r_nc: Optional[float] = None
    coeff_decay: Optional[float] = None
    n_max_used: Optional[int] = None
    stable: bool = True
    warning: Optional[str] = None
    drift: Optional[float] = None


@dataclass(frozen=True)
class RejectedZero:
    energy: float
    r_nc: Optional[float]
    parity: Parity
    reason: str
    drift: Optional[float] = None


@dataclass(frozen=True)
class ExceptionalCandidate:
    energy: float
    is_eigenvalue: bool
    oracle_gap: float
    family: Literal["A", "B", "integer"]
    m: int
    parities: Tuple[Parity, ...] = ()


@dataclass(frozen=True)
class DarkStateCheck:
    parity: Parity
    residual: float
    holds: bool
    level: Optional[EnergyLevel] = None


@dataclass(frozen=True)
class SpectrumResult:
    params: ModelParams
    levels: Tuple[EnergyLevel, ...]
    window: Window
    rejected_zeros: Tuple[RejectedZero, ...] = ()
    oracle_residuals: Optional[Tuple[float, ...]] = None
    regime: Regime = Regime.GENERAL
    notices: Tuple[str, ...] = ()
    exceptional: Tuple[ExceptionalCandidate, ...] = ()
    status: str = "ok"

    def levels_for(self, parity: Parity, kind: Optional[str] = None) -> List[EnergyLevel]:
        return [
            lvl
            for lvl in self.levels
            if lvl.parity is parity and (kind is None or lvl.kind == kind)
        ]

    def energies(self, parity: Parity) -> List[float]:
        return [lvl.energy for lvl in self.levels_for(parity)]

    @property
    def has_warnings(self) -> bool:
        return any(lvl.warning for lvl in self.levels)


@dataclass(frozen=True)
class SweepRow:
    g: float
    parity: Optional[Parity]
    level_index: Optional[int]
    energy: Optional[float]
    kind: Optional[str]
    continuous: bool
    status: str = "ok"


def default_window(p: ModelParams, e_max: float = DEFAULT_E_MAX) -> Window:
    """(-max(g^2, g'^2) - D1 - D2 - 0.5, e_max); the lower end sits below the ground state."""
    lower = -max(p.g_sum**2, p.g_diff**2) - abs(p.delta1) - abs(p.delta2) - 0.5
    if e_max <= lower:
        raise ValueError(f"Window upper bound {e_max} is below the ground-state bound {lower}")
    return lower, e_max


def _sign(value) -> int:
    return int(value > 0) - int(value < 0)


def _pole_free_segments(poles: Sequence[float], window: Window, margin: float) -> List[Window]:
    lo, hi = window
    segments = []
    start = lo
    for pole in sorted(poles):
        if pole + margin < lo or pole - margin > hi:
            continue
        if pole - margin > start:
            segments.append((start, pole - margin))
        start = max(start, pole + margin)
    if hi > start:
        segments.append((start, hi))
    return segments


def _enclosing_segment(poles: Sequence[float], energy: float, margin: float) -> Window:
    left = max((p + margin for p in poles if p < energy), default=-math.inf)
    right = min((p - margin for p in poles if p > energy), default=math.inf)
    return left, right


class SpectrumSolver:
    """
    Regular spectrum of one parameter point from the G-function of its regime.

    Evaluators are cached per (parity, n_max), so re-truncation and repeated refinement
    reuse their pole tables, arithmetic context and computed values. When G needs extended
    precision, scans first read signs from a double-precision screen at a lower truncation
    and spend extended evaluations only on confirming what the screen found.
    """

    def __init__(
        self,
        p: ModelParams,
        trunc: Optional[TruncationConfig] = None,
        grid_step: Optional[float] = None,
        refine_tol: Optional[float] = None,
        precision: Optional[str] = None,
        oracle_n: Optional[int] = None,
        screen: Optional[bool] = None,
    ):
        self.params = p
        self.regime = classify_regime(p)
        self.trunc = trunc or default_truncation(self.regime)
        self.grid_step = grid_step or settings.grid_step
        self.refine_tol = refine_tol or settings.refine_tol
        self.precision = precision
        self.oracle_n = oracle_n or settings.oracle_n
        self.screen = settings.screen if screen is None else screen
        self.margin = 2 * settings.eps_pole
        self._evaluators: Dict[Tuple[Parity, int, str], GFunction] = {}

    def evaluator(
        self, parity: Parity, trunc: Optional[TruncationConfig] = None, residual: bool = False
    ):
        """GFunction (or the continued-fraction residual) of one sector, cached."""
        trunc = trunc or self.trunc
        key = (parity, trunc.n_max, "residual" if residual else "g")
        if key not in self._evaluators:
            cls = ContinuedFractionResidual if residual else GFunction
            self._evaluators[key] = cls(self.params, parity, trunc, precision=self.precision)
            logger.debug(
                f"{cls.__name__} for {parity.value}, n_max={trunc.n_max}: "
                f"{self._evaluators[key].ctx.describe()}"
            )
        return self._evaluators[key]

    def screening_evaluator(self, ev) -> Optional[GFunction]:
        """Double-precision GFunction that pre-scans an extended one; None if not screening."""
        if not self.screen or not ev.ctx.extended or not isinstance(ev, GFunction):
            return None
        n_screen = screening_truncation(self.params, ev.trunc.n_max)
        if n_screen is None:
            return None
        key = (ev.parity, n_screen, "screen")
        if key not in self._evaluators:
            trunc = ev.trunc.with_n_max(n_screen)
            self._evaluators[key] = GFunction(self.params, ev.parity, trunc, ctx=DOUBLE)
            logger.debug(f"Screening {ev.parity.value} scans in double at n_max={n_screen}")
        return self._evaluators[key]

    # Bracketing

    def scan_sign_changes(
        self,
        parity: Parity,
        window: Window,
        grid_step: Optional[float] = None,
        trunc: Optional[TruncationConfig] = None,
        residual: bool = False,
    ) -> List[Window]:
        """
        Bracket every sign change of G on a uniform grid, pole neighborhoods excluded.

        Args:
            parity: Parity sector
            window: (E_min, E_max)
            grid_step: Grid spacing (defaults to the solver's)
            trunc: Truncation (defaults to the solver's)
            residual: Scan the continued-fraction residual instead of G

        Returns:
            Brackets (E_lo, E_hi), each inside one pole-free subinterval
        """
        ev = self.evaluator(parity, trunc, residual)
        screen = self.screening_evaluator(ev)
        step = grid_step or self.grid_step
        brackets: List[Window] = []
        for lo, hi in _pole_free_segments(ev.poles, window, self.margin):
            if screen is None:
                brackets.extend(self._scan_segment(ev, lo, hi, step, MAX_RESCANS))
            else:
                brackets.extend(self._screened_segment(ev, screen, lo, hi, step))
        logger.info(
            f"{len(brackets)} sign changes of {type(ev).__name__} ({parity.value}) "
            f"in [{window[0]:.4g}, {window[1]:.4g}]"
        )
        return brackets

    def _screened_segment(self, ev, screen, lo: float, hi: float, step: float) -> List[Window]:
        """
        Scan one segment with the screen, then confirm every cell it flags with ev.

        The segment is rescanned with ev itself when a flagged cell has no sign change of ev,
        or when the number of confirmed cells disagrees in parity with the signs of ev at
        the segment ends.
        """
        count = max(2, math.ceil((hi - lo) / step) + 1)
        grid = np.linspace(lo, hi, count)
        signs = np.sign(screen.values(grid))
        if np.isnan(signs).any():
            logger.debug(f"Screen overflows in [{lo:.6g}, {hi:.6g}], scanning at full precision")
            return self._scan_segment(ev, lo, hi, step, MAX_RESCANS)

        confirmed: List[Window] = []
        for i in np.flatnonzero(signs[:-1] * signs[1:] <= 0):
            a, b = float(grid[i]), float(grid[i + 1])
            if _sign(ev.value(a)) * _sign(ev.value(b)) > 0:
                logger.debug(f"Screened cell [{a:.6g}, {b:.6g}] not confirmed, rescanning")
                return self._scan_segment(ev, lo, hi, step, MAX_RESCANS)
            confirmed.append((a, b))

        ends_differ = _sign(ev.value(lo)) * _sign(ev.value(hi)) < 0
        if len(confirmed) % 2 != int(ends_differ):
            logger.debug(f"Odd sign-change count in [{lo:.6g}, {hi:.6g}] unconfirmed, rescanning")
            return self._scan_segment(ev, lo, hi, step, MAX_RESCANS)
        return confirmed

    def _scan_segment(self, ev, lo: float, hi: float, step: float, rescans: int) -> List[Window]:
        count = max(2, math.ceil((hi - lo) / step) + 1)
        grid = np.linspace(lo, hi, count)
        signs = np.sign(ev.values(grid))

        found: List[Window] = []
        for i in range(count):
            if np.isnan(signs[i]):
                continue
            if signs[i] == 0:
                found.append((float(grid[i]), float(grid[i])))
            elif i + 1 < count and signs[i] * signs[i + 1] < 0:
                found.append((float(grid[i]), float(grid[i + 1])))

        # Adjacent cells that both change sign are rescanned at half the step
        merged: List[Window] = []
        i = 0
        while i < len(found):
            j = i
            while rescans and j + 1 < len(found) and found[j][1] == found[j + 1][0]:
                j += 1
            if j > i:
                logger.debug(f"Touching brackets in [{found[i][0]}, {found[j][1]}], rescanning")
                merged.extend(
                    self._scan_segment(ev, found[i][0], found[j][1], step / 2, rescans - 1)
                )
            else:
                merged.append(found[i])
            i = j + 1
        return merged

    # Refinement

    def refine_zero(
        self,
        bracket: Window,
        parity: Parity,
        trunc: Optional[TruncationConfig] = None,
        residual: bool = False,
    ) -> float:
        """
        Bisect a bracket down to refine_tol, then take one false-position step inside it.

        Raises:
            BracketError: If the bracket has no sign change even after widening it once, or
                a pole is met during bisection
        """
        return self._refine(self.evaluator(parity, trunc, residual), *bracket)

    def _refine(self, ev, lo: float, hi: float, f_lo=None, f_hi=None) -> float:
        lo, hi = float(lo), float(hi)
        if lo == hi:
            return lo
        if f_lo is None:
            f_lo = ev.value(lo)
        if f_hi is None:
            f_hi = ev.value(hi)
        if f_lo is not None and _sign(f_lo) == 0:
            return lo
        if f_hi is not None and _sign(f_hi) == 0:
            return hi
        if f_lo is None or f_hi is None or _sign(f_lo) == _sign(f_hi):
            lo, hi, f_lo, f_hi = self._widen(ev, lo, hi)

        for _ in range(MAX_BISECTIONS):
            if hi - lo <= self.refine_tol:
                break
            mid = 0.5 * (lo + hi)
            f_mid = ev.value(mid)
            if f_mid is None:
                raise BracketError(f"Bracket [{lo}, {hi}] closes onto a pole")
            s = _sign(f_mid)
            if s == 0:
                return mid
            if s == _sign(f_lo):
                lo, f_lo = mid, f_mid
            else:
                hi, f_hi = mid, f_mid

        fraction = float(f_lo / (f_lo - f_hi))
        if not 0.0 <= fraction <= 1.0:
            fraction = 0.5
        return lo + fraction * (hi - lo)

    def _widen(self, ev, lo: float, hi: float):
        width = hi - lo
        left, right = _enclosing_segment(ev.poles, 0.5 * (lo + hi), self.margin)
        new_lo, new_hi = max(lo - width, left), min(hi + width, right)
        f_lo, f_hi = ev.value(new_lo), ev.value(new_hi)
        if f_lo is None or f_hi is None or _sign(f_lo) * _sign(f_hi) >= 0:
            raise BracketError(f"No sign change in [{lo}, {hi}] even after widening once")
        logger.info(f"Bracket [{lo}, {hi}] lost its sign change; widened to [{new_lo}, {new_hi}]")
        return new_lo, new_hi, f_lo, f_hi

    def _track_root(self, ev, root: float) -> Optional[float]:
        """Nearest zero of ev around root, searched in expanding symmetric windows."""
        seg_lo, seg_hi = _enclosing_segment(ev.poles, root, self.margin)
        scale = max(1.0, abs(root))
        for width in TRACK_WINDOWS:
            lo, hi = max(root - width * scale, seg_lo), min(root + width * scale, seg_hi)
            if hi <= lo:
                continue
            f_lo, f_hi = ev.value(lo), ev.value(hi)
            if f_lo is None or f_hi is None:
                continue
            if _sign(f_lo) * _sign(f_hi) <= 0:
                return self._refine(ev, lo, hi, f_lo, f_hi)
        return None

    # Classification

    def classify_zero(
        self, root: float, parity: Parity, trunc: Optional[TruncationConfig] = None
    ) -> EnergyLevel:
        """
        Locate the zero again at n_max + n_max_step and measure its coefficient decay.

        The level is stable iff |E_N - E_N+1| / max(|E_N+1|, 1) < stability_tol and
        coeff_decay < decay_tol; r_nc = ln(E_N / E_N+1), None across a sign change.
        """
        trunc = trunc or self.trunc
        stepped = trunc.stepped()
        ev = self.evaluator(parity, trunc)
        ev_next = self.evaluator(parity, stepped)
        decay = ev.coefficient_decay(root)
        level = EnergyLevel(
            energy=float(root),
            parity=parity,
            kind="regular",
            coeff_decay=decay,
            n_max_used=trunc.n_max,
        )

        if ev_next.is_pole_adjacent(root):
            return replace(
                level, stable=False, warning=f"drifts onto a pole at n_max={stepped.n_max}"
            )

        moved = self._track_root(ev_next, root)
        if moved is None:
            return replace(level, stable=False, warning=f"no zero nearby at n_max={stepped.n_max}")

        drift = abs(root - moved)
        relative = drift / max(abs(moved), 1.0)
        r_nc = math.log(root / moved) if root * moved > 0 else None
        warning = None
        if relative >= settings.stability_tol:
            warning = f"moves by {relative:.2e} (relative) at n_max={stepped.n_max}"
        elif not decay < settings.decay_tol:
            warning = f"coefficients decay only to {decay:.2e}"
        return replace(level, r_nc=r_nc, stable=warning is None, warning=warning, drift=drift)

    # Full solve

    def solve(
        self,
        window: Optional[Window] = None,
        parities: Sequence[Parity] = (Parity.EVEN, Parity.ODD),
        certify_exceptional: bool = True,
    ) -> SpectrumResult:
        """
        Scan, refine and classify every zero in the window, then add the special levels.

        Args:
            window: Energy window (default_window(p) when omitted)
            parities: Sectors to solve
            certify_exceptional: Query the oracle for eigenvalues at the pole energies

        Returns:
            SpectrumResult with levels sorted by energy
        """
        p = self.params
        window = window or default_window(p)
        logger.info(f"Solving {self.regime.value} point {p.as_dict()} on {window}")

        if self.regime in (Regime.ZERO_COUPLING, Regime.SINGLE_QUBIT_LIKE):
            return self._oracle_only(window, parities)

        levels: List[EnergyLevel] = []
        rejected: List[RejectedZero] = []
        for parity in parities:
            for bracket in self.scan_sign_changes(parity, window):
                try:
                    root = self.refine_zero(bracket, parity)
                except BracketError as e:
                    logger.warning(f"Dropped bracket {bracket} ({parity.value}): {e}")
                    continue
                level = self.classify_zero(root, parity)
                if level.stable:
                    levels.append(level)
                else:
                    logger.info(f"Rejected zero E={root:.10g} ({parity.value}): {level.warning}")
                    rejected.append(
                        RejectedZero(root, level.r_nc, parity, level.warning, level.drift)
                    )

        special: List[EnergyLevel] = []
        if self.regime is Regime.EQUAL_COUPLING:
            levels = [self._cross_check(level) for level in levels]
            special = self._special_levels(window, parities)
            levels = _without_duplicates_of(levels, special, settings.match_tol)

        candidates: Tuple[ExceptionalCandidate, ...] = ()
        if certify_exceptional:
            candidates = tuple(exceptional_candidates(p, window, self.trunc, self.oracle_n))
            certified = [
                EnergyLevel(c.energy, parity, "exceptional", n_max_used=self.oracle_n)
                for c in candidates
                if c.is_eigenvalue
                for parity in c.parities
                if parity in parities
            ]
            special.extend(_without_duplicates_of(certified, special, settings.match_tol))

        ordered = sorted(levels + special, key=lambda lvl: (lvl.energy, lvl.parity.value))
        merged = _merge_close(ordered)
        logger.info(f"{len(merged)} levels, {len(rejected)} rejected zeros for {p.as_dict()}")
        return SpectrumResult(
            params=p,
            levels=tuple(merged),
            window=window,
            rejected_zeros=tuple(rejected),
            regime=self.regime,
            exceptional=candidates,
        )

    def _oracle_only(self, window: Window, parities: Sequence[Parity]) -> SpectrumResult:
        notice = (
            f"{self.regime.value} parameters have no G-function; "
            f"levels come from exact diagonalization (N={self.oracle_n})"
        )
        logger.info(notice)
        levels = [
            EnergyLevel(energy, parity, "regular", n_max_used=self.oracle_n)
            for parity in parities
            for energy in oracle_levels(self.params, parity, window, self.oracle_n)
        ]
        levels.sort(key=lambda lvl: (lvl.energy, lvl.parity.value))
        return SpectrumResult(
            params=self.params,
            levels=tuple(levels),
            window=window,
            regime=self.regime,
            notices=(notice,),
        )

    def _cross_check(self, level: EnergyLevel) -> EnergyLevel:
        ev = self.evaluator(level.parity, residual=True)
        if ev.is_pole_adjacent(level.energy):
            return level
        partner = self._track_root(ev, level.energy)
        if partner is None:
            return replace(level, warning="no continued-fraction root nearby")
        gap = abs(partner - level.energy)
        if gap > CF_AGREEMENT:
            return replace(level, warning=f"continued-fraction root differs by {gap:.2e}")
        return level

    def _special_levels(self, window: Window, parities: Sequence[Parity]) -> List[EnergyLevel]:
        lo, hi = window
        special = [
            check.level
            for check in detect_dark_states(self.params)
            if check.holds and check.parity in parities and lo <= 1.0 <= hi
        ]
        for parity in parities:
            special.extend(singlet_levels(self.params, parity, window))
        return special


def _without_duplicates_of(
    levels: Sequence[EnergyLevel], keep: Sequence[EnergyLevel], tol: float
) -> List[EnergyLevel]:
    return [
        lvl
        for lvl in levels
        if not any(k.parity is lvl.parity and abs(k.energy - lvl.energy) < tol for k in keep)
    ]


def _merge_close(levels: Sequence[EnergyLevel]) -> List[EnergyLevel]:
    merged: List[EnergyLevel] = []
    for level in levels:
        twin = next(
            (
                m
                for m in merged
                if m.parity is level.parity
                and abs(m.energy - level.energy) < 2 * settings.refine_tol
            ),
            None,
        )
        if twin is None:
            merged.append(level)
        else:
            logger.debug(f"Merged duplicate {level.parity.value} level at E={level.energy}")
    return merged


# Module-level operations


def scan_sign_changes(
    p: ModelParams,
    parity: Parity,
    window: Window,
    grid_step: Optional[float] = None,
    trunc: Optional[TruncationConfig] = None,
) -> List[Window]:
    return SpectrumSolver(p, trunc, grid_step).scan_sign_changes(parity, window)


def refine_zero(
    bracket: Window,
    p: ModelParams,
    parity: Parity,
    trunc: Optional[TruncationConfig] = None,
    refine_tol: Optional[float] = None,
) -> float:
    return SpectrumSolver(p, trunc, refine_tol=refine_tol).refine_zero(bracket, parity)


def classify_zero(
    root: float, p: ModelParams, parity: Parity, trunc: Optional[TruncationConfig] = None
) -> EnergyLevel:
    return SpectrumSolver(p, trunc).classify_zero(root, parity)


def detect_dark_states(p: ModelParams) -> List[DarkStateCheck]:
    """
    Check the E=1 dark-state conditions at equal couplings and unequal splittings:
    (D1 + D2)^2 = 1 (even parity) and (D1 - D2)^2 = 1 (odd parity).
    """
    if classify_regime(p) is not Regime.EQUAL_COUPLING:
        return []
    if abs(p.delta1 - p.delta2) <= settings.eps_eq:
        return []

    checks = []
    conditions = (
        (Parity.EVEN, (p.delta1 + p.delta2) ** 2 - 1.0),
        (Parity.ODD, (p.delta1 - p.delta2) ** 2 - 1.0),
    )
    for parity, residual in conditions:
        holds = abs(residual) <= settings.dark_tol
        level = EnergyLevel(1.0, parity, "dark", r_nc=0.0) if holds else None
        if holds:
            logger.info(f"Dark state at E=1 in the {parity.value} sector")
        checks.append(DarkStateCheck(parity=parity, residual=residual, holds=holds, level=level))
    return checks


def singlet_levels(p: ModelParams, parity: Parity, window: Window) -> List[EnergyLevel]:
    """E = m levels of the spin singlet: even m in the odd sector, odd m in the even sector."""
    if classify_regime(p) is not Regime.EQUAL_COUPLING:
        return []
    if abs(p.delta1 - p.delta2) > settings.eps_eq:
        return []
    lo, hi = window
    wanted = 0 if parity is Parity.ODD else 1
    return [
        EnergyLevel(float(m), parity, "singlet", r_nc=0.0)
        for m in range(max(0, math.ceil(lo)), math.floor(hi) + 1)
        if m % 2 == wanted
    ]


def exceptional_candidates(
    p: ModelParams,
    window: Window,
    trunc: Optional[TruncationConfig] = None,
    oracle_n: Optional[int] = None,
) -> List[ExceptionalCandidate]:
    """
    Pole energies in the window, each checked against the oracle.

    A candidate is an eigenvalue iff some parity sector has an oracle level within
    exceptional_tol of it; the G-function itself cannot certify these energies.
    """
    regime = classify_regime(p)
    trunc = trunc or default_truncation(regime)
    poles = pole_map(p, trunc)
    lo, hi = window
    padded = (lo - 1.0, hi + 1.0)
    oracle = {parity: np.array(oracle_levels(p, parity, padded, oracle_n)) for parity in Parity}

    families = (
        ("A", list(enumerate(poles.a_poles))),
        ("B", list(enumerate(poles.b_poles))),
        ("integer", [(int(round(e)), e) for e in poles.integer_poles]),
    )
    candidates = []
    for family, entries in families:
        for m, energy in entries:
            if not lo <= energy <= hi:
                continue
            gaps = {
                parity: float(np.abs(levels - energy).min()) if levels.size else math.inf
                for parity, levels in oracle.items()
            }
            parities = tuple(
                parity for parity, gap in gaps.items() if gap <= settings.exceptional_tol
            )
            candidates.append(
                ExceptionalCandidate(
                    energy=float(energy),
                    is_eigenvalue=bool(parities),
                    oracle_gap=min(gaps.values()),
                    family=family,
                    m=m,
                    parities=parities,
                )
            )
    found = sum(c.is_eigenvalue for c in candidates)
    logger.info(f"{found} of {len(candidates)} pole energies are oracle eigenvalues")
    return candidates


def solve_spectrum(
    p: ModelParams,
    window: Optional[Window] = None,
    parities: Sequence[Parity] = (Parity.EVEN, Parity.ODD),
    trunc: Optional[TruncationConfig] = None,
    grid_step: Optional[float] = None,
    precision: Optional[str] = None,
    certify_exceptional: bool = True,
    oracle_n: Optional[int] = None,
) -> SpectrumResult:
    solver = SpectrumSolver(p, trunc, grid_step, precision=precision, oracle_n=oracle_n)
    return solver.solve(window, parities, certify_exceptional)


# Sweeps


def sweep_points(p_base: ModelParams, g_range: Window, steps: int) -> List[ModelParams]:
    """
    Parameter points with g = g1 + g2 running over g_range at the base ratio g2/g1.

    Equal-coupling (or uncoupled) bases split g evenly.
    """
    if steps < 1:
        raise ValueError(f"A sweep needs at least one step, got {steps}")
    even_split = classify_regime(p_base) is Regime.EQUAL_COUPLING or p_base.g_sum == 0
    fraction = 0.5 if even_split else p_base.g1 / p_base.g_sum

    points = []
    for g in np.linspace(g_range[0], g_range[1], steps):
        g = float(g)
        g1 = g / 2 if even_split else g * fraction
        g2 = g / 2 if even_split else g - g1
        points.append(validate_params(p_base.delta1, p_base.delta2, g1, g2))
    return points


def solve_sweep_step(
    p: ModelParams,
    window: Window,
    parities: Sequence[Parity],
    trunc: Optional[TruncationConfig] = None,
    grid_step: Optional[float] = None,
    precision: Optional[str] = None,
    oracle_n: Optional[int] = None,
) -> SpectrumResult:
    """One sweep step; failures are recorded in ``status`` instead of raised."""
    try:
        regime = classify_regime(p)
        step_trunc = trunc if regime in (Regime.GENERAL, Regime.EQUAL_COUPLING) else None
        return solve_spectrum(
            p, window, parities, step_trunc, grid_step, precision, oracle_n=oracle_n
        )
    except (SolverError, ValueError, ArithmeticError) as e:
        logger.error(f"Sweep step g={p.g_sum:.6g} failed: {e}")
        return SpectrumResult(
            params=p,
            levels=(),
            window=window,
            regime=classify_regime(p),
            status=f"failed: {e}",
        )


def sweep_coupling(
    p_base: ModelParams,
    g_range: Window,
    steps: int,
    parities: Sequence[Parity] = (Parity.EVEN, Parity.ODD),
    window: Optional[Window] = None,
    trunc: Optional[TruncationConfig] = None,
    grid_step: Optional[float] = None,
    precision: Optional[str] = None,
    oracle_n: Optional[int] = None,
) -> List[SpectrumResult]:
    """
    Solve every step of a coupling sweep in order.

    The default window is the one of the strongest coupling in the sweep, so all steps
    share it.
    """
    points = sweep_points(p_base, g_range, steps)
    if window is None:
        window = default_window(max(points, key=lambda q: q.g_sum))
    logger.info(f"Sweeping g over {g_range} in {steps} steps, window {window}")
    return [
        solve_sweep_step(q, window, parities, trunc, grid_step, precision, oracle_n)
        for q in points
    ]


def _is_continuous(previous: Optional[List[float]], current: List[float]) -> bool:
    if previous is None:
        return True
    if len(previous) != len(current):
        return False
    if len(current) < 2:
        return True
    spacing = max(float(np.diff(current).min()), MIN_TRACK_SPACING)
    shifts = np.abs(np.array(current) - np.array(previous))
    return bool((shifts < 0.5 * spacing).all())


def track_levels(results: Sequence[SpectrumResult]) -> List[SweepRow]:
    """
    Long-format rows (g, parity, level_index, E, kind) with nearest-neighbor tracking.

    Levels are indexed by energy order within their parity at each step; ``continuous`` drops
    to False when the level count changes or a level moves by half the local spacing or more,
    i.e. where identity through a near-crossing would be a guess.
    """
    rows: List[SweepRow] = []
    previous: Dict[Parity, List[float]] = {}
    for result in results:
        g = result.params.g_sum
        if result.status != "ok":
            rows.append(SweepRow(g, None, None, None, None, False, result.status))
            previous.clear()
            continue
        for parity in Parity:
            current = sorted(result.levels_for(parity), key=lambda lvl: lvl.energy)
            if not current:
                continue
            energies = [lvl.energy for lvl in current]
            continuous = _is_continuous(previous.get(parity), energies)
            rows.extend(
                SweepRow(g, parity, index, lvl.energy, lvl.kind, continuous, result.status)
                for index, lvl in enumerate(current)
            )
            previous[parity] = energies
    return rows
