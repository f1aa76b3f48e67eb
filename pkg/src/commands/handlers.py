"""Command handlers: each turns a RunConfig into a rendered payload and an exit code."""

import asyncio
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Awaitable, Callable, Dict, List

import numpy as np

from config import setup_logging
from model.params import Parity, Regime
from oracle.diagonalization import ComparisonReport, compare_spectra, oracle_levels
from solvers.errors import RegimeError
from solvers.spectrum import (
    EnergyLevel,
    SpectrumResult,
    SpectrumSolver,
    detect_dark_states,
    solve_spectrum,
    solve_sweep_step,
    sweep_coupling,
    sweep_points,
    track_levels,
)

from .output import render
from .run_config import RunConfig

logger = setup_logging("commands.handlers")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_WARNING = 3
EXIT_VERIFY_FAILED = 4

LEVEL_COLUMNS = (
    "parity",
    "energy",
    "kind",
    "r_nc",
    "coeff_decay",
    "n_max_used",
    "stable",
    "warning",
)
GSCAN_COLUMNS = ("E", "G_even", "G_odd", "pole_flag")
SWEEP_COLUMNS = ("g", "parity", "level_index", "E", "kind", "continuous", "status")
VERIFY_COLUMNS = ("parity", "energy", "oracle_energy", "residual", "status")
DARK_COLUMNS = ("parity", "condition_residual", "holds", "energy", "oracle_gap")


@dataclass(frozen=True)
class CommandOutput:
    text: str
    exit_code: int = EXIT_OK


def _level_row(level: EnergyLevel) -> Dict[str, Any]:
    return {
        "parity": level.parity,
        "energy": level.energy,
        "kind": level.kind,
        "r_nc": level.r_nc,
        "coeff_decay": level.coeff_decay,
        "n_max_used": level.n_max_used,
        "stable": level.stable,
        "warning": level.warning,
    }


def _spectrum(config: RunConfig) -> SpectrumResult:
    return solve_spectrum(
        config.params,
        config.window,
        config.parities,
        config.trunc,
        config.grid_step,
        config.precision,
        oracle_n=config.oracle_n,
    )


def spectrum_payload(result: SpectrumResult) -> Dict[str, Any]:
    return {
        "regime": result.regime,
        "window": list(result.window),
        "levels": [_level_row(lvl) for lvl in result.levels],
        "rejected_zeros": [
            {"parity": z.parity, "energy": z.energy, "r_nc": z.r_nc, "reason": z.reason}
            for z in result.rejected_zeros
        ],
        "exceptional": [
            {
                "energy": c.energy,
                "family": c.family,
                "m": c.m,
                "is_eigenvalue": c.is_eigenvalue,
                "oracle_gap": c.oracle_gap,
            }
            for c in result.exceptional
        ],
        "oracle_residuals": result.oracle_residuals,
        "notices": list(result.notices),
    }


async def cmd_spectrum(config: RunConfig) -> CommandOutput:
    """Solve the spectrum in the configured window; exit 3 when a level carries a warning."""
    result = _spectrum(config)
    for notice in result.notices:
        logger.warning(notice)

    rows = [_level_row(lvl) for lvl in result.levels]
    text = render(config.output, config.params, rows, LEVEL_COLUMNS, spectrum_payload(result))
    if result.has_warnings:
        flagged = sum(1 for lvl in result.levels if lvl.warning)
        logger.warning(f"{flagged} levels carry convergence warnings")
        return CommandOutput(text, EXIT_WARNING)
    return CommandOutput(text)


async def cmd_gscan(config: RunConfig) -> CommandOutput:
    """
    Sample G of the requested parities on a uniform grid.

    A G column is empty where that sector's G has a pole nearby; pole_flag marks samples
    that are pole-adjacent in any requested sector.
    """
    if config.regime not in (Regime.GENERAL, Regime.EQUAL_COUPLING):
        raise RegimeError(f"{config.regime.value} parameters have no G-function to scan")

    solver = SpectrumSolver(config.params, config.trunc, precision=config.precision)
    energies = np.linspace(config.window[0], config.window[1], config.samples)
    columns = {Parity.EVEN: "G_even", Parity.ODD: "G_odd"}
    values: Dict[str, np.ndarray] = {}
    pole_flag = np.zeros(energies.shape, dtype=bool)
    for parity in config.parities:
        ev = solver.evaluator(parity)
        values[columns[parity]] = ev.values(energies)
        pole_flag |= ev.pole_mask(energies)

    rows = []
    for i, energy in enumerate(energies):
        row = {"E": float(energy), "pole_flag": bool(pole_flag[i])}
        for name, column in values.items():
            row[name] = None if np.isnan(column[i]) else column[i]
        rows.append(row)
    logger.info(f"Scanned {len(rows)} energies, {int(pole_flag.sum())} pole-adjacent")
    return CommandOutput(render(config.output, config.params, rows, GSCAN_COLUMNS))


async def _run_sweep(config: RunConfig) -> List[SpectrumResult]:
    if config.workers <= 1:
        return sweep_coupling(
            config.params,
            config.g_range,
            config.g_steps,
            config.parities,
            config.window,
            config.trunc,
            config.grid_step,
            config.precision,
            config.oracle_n,
        )

    points = sweep_points(config.params, config.g_range, config.g_steps)
    loop = asyncio.get_running_loop()
    logger.info(f"Sweeping {len(points)} steps on {config.workers} worker processes")
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        futures = [
            loop.run_in_executor(
                pool,
                solve_sweep_step,
                point,
                config.window,
                config.parities,
                config.trunc,
                config.grid_step,
                config.precision,
                config.oracle_n,
            )
            for point in points
        ]
        return list(await asyncio.gather(*futures))


def _reference_rows(config: RunConfig) -> List[Dict[str, Any]]:
    lo, hi = config.window
    return [
        {"E": float(m), "kind": "reference", "continuous": True, "status": "ok"}
        for m in range(max(0, math.ceil(lo)), math.floor(hi) + 1)
    ]


async def cmd_sweep(config: RunConfig) -> CommandOutput:
    """
    Long-format level diagram over g = g1 + g2, plus one reference row per integer E = m.

    Failed steps are recorded in the status column; any failure or warning exits with 3.
    """
    results = await _run_sweep(config)
    rows = [
        {
            "g": row.g,
            "parity": row.parity,
            "level_index": row.level_index,
            "E": row.energy,
            "kind": row.kind,
            "continuous": row.continuous,
            "status": row.status,
        }
        for row in track_levels(results)
    ]
    rows.extend(_reference_rows(config))

    text = render(config.output, config.params, rows, SWEEP_COLUMNS)
    failed = [r for r in results if r.status != "ok"]
    if failed or any(r.has_warnings for r in results):
        logger.warning(f"Sweep finished with {len(failed)} failed steps")
        return CommandOutput(text, EXIT_WARNING)
    return CommandOutput(text)


def verify_payload(report: ComparisonReport) -> Dict[str, Any]:
    return {
        "passed": report.passed,
        "max_residual": report.max_residual,
        "mean_residual": report.mean_residual,
        "match_tol": report.match_tol,
        "worst": report.worst,
        "matched": [
            {
                "parity": m.parity,
                "energy": m.energy,
                "oracle_energy": m.oracle_energy,
                "residual": m.residual,
            }
            for m in report.matched
        ],
        "unmatched_g": [{"parity": p, "energy": e} for p, e in report.unmatched_g],
        "unmatched_oracle": [{"parity": p, "energy": e} for p, e in report.unmatched_oracle],
    }


async def cmd_verify(config: RunConfig) -> CommandOutput:
    """Compare the solved spectrum with the oracle; exit 0 iff every level matches."""
    result = _spectrum(config)
    oracle = {
        parity: oracle_levels(config.params, parity, config.window, config.oracle_n)
        for parity in config.parities
    }
    report = compare_spectra(result, oracle, config.match_tol)
    result = replace(result, oracle_residuals=tuple(report.residuals()))

    rows = [
        {
            "parity": m.parity,
            "energy": m.energy,
            "oracle_energy": m.oracle_energy,
            "residual": m.residual,
            "status": "matched",
        }
        for m in report.matched
    ]
    rows += [{"parity": p, "energy": e, "status": "unmatched_g"} for p, e in report.unmatched_g]
    rows += [
        {"parity": p, "oracle_energy": e, "status": "unmatched_oracle"}
        for p, e in report.unmatched_oracle
    ]
    payload = verify_payload(report)
    payload["spectrum"] = spectrum_payload(result)
    text = render(config.output, config.params, rows, VERIFY_COLUMNS, payload)

    if not report.passed:
        logger.error(f"Verification failed: {report.worst}")
        return CommandOutput(text, EXIT_VERIFY_FAILED)
    logger.info(f"Verification passed, max residual {report.max_residual:.3e}")
    return CommandOutput(text)


async def cmd_darkstate(config: RunConfig) -> CommandOutput:
    """Per-parity dark-state conditions, the emitted E=1 levels and the oracle gap at E=1."""
    checks = detect_dark_states(config.params)
    if not checks:
        logger.warning(
            "Dark states need equal couplings and unequal splittings; nothing to report"
        )

    rows = []
    for check in checks:
        levels = oracle_levels(config.params, check.parity, (0.5, 1.5), config.oracle_n)
        gap = min((abs(e - 1.0) for e in levels), default=None)
        rows.append(
            {
                "parity": check.parity,
                "condition_residual": check.residual,
                "holds": check.holds,
                "energy": check.level.energy if check.level else None,
                "oracle_gap": gap,
            }
        )
    return CommandOutput(render(config.output, config.params, rows, DARK_COLUMNS))


HANDLERS: Dict[str, Callable[[RunConfig], Awaitable[CommandOutput]]] = {
    "spectrum": cmd_spectrum,
    "gscan": cmd_gscan,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "darkstate": cmd_darkstate,
}
