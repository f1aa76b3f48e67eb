import math

import numpy as np
import pytest

from model.params import Parity, Regime
from oracle.diagonalization import oracle_levels
from solvers.errors import PoleAtA, PoleAtB, PoleAtInteger, RegimeError
from solvers.gfunction import (
    ContinuedFractionResidual,
    GFunction,
    cf_residual,
    g_det,
    g_entry,
    g_equal,
    pole_map,
)
from solvers.precision import context_for, digits_lost
from solvers.recurrence import TruncationConfig

SHORT = TruncationConfig(n_max=20)


def _bracket_half_width(level, poles, neighbours):
    """Half-width around an oracle level that stays clear of poles and other levels."""
    clearance = min(
        min((abs(level - p) for p in poles), default=math.inf),
        min((abs(level - e) for e in neighbours if e != level), default=math.inf),
    )
    return min(0.01, 0.4 * clearance)


def _assert_sign_change_at_levels(evaluator, levels):
    for level in levels:
        delta = _bracket_half_width(level, evaluator.poles, levels)
        left, right = evaluator.value(level - delta), evaluator.value(level + delta)
        assert left is not None and right is not None
        assert left * right < 0, f"no sign change around E={level}"


def test_pole_map_unequal_couplings(fig1_params):
    poles = pole_map(fig1_params, TruncationConfig(n_max=4))

    assert poles.a_poles == pytest.approx([m - 1.44 for m in range(5)])
    assert poles.b_poles == pytest.approx([m - 0.16 for m in range(5)])
    assert poles.integer_poles == ()
    assert len(poles.energies()) == 10


def test_pole_map_equal_couplings(fig2_params, singlet_params):
    poles = pole_map(fig2_params, TruncationConfig(n_max=4))

    assert poles.a_poles == pytest.approx([m - 0.64 for m in range(5)])
    assert poles.b_poles == ()
    assert poles.integer_poles == (0.0, 1.0, 2.0, 3.0, 4.0)
    assert pole_map(singlet_params, TruncationConfig(n_max=4), Parity.ODD).integer_poles == (
        1.0,
        3.0,
    )


def test_pole_map_window(fig2_params):
    poles = pole_map(fig2_params, TruncationConfig(n_max=4))

    assert poles.in_window((0.5, 1.5)) == pytest.approx([1.0, 1.36])


def test_g_det_is_flagged_at_a_pole(fig1_params):
    evaluation = g_det(fig1_params, Parity.EVEN, 1 - fig1_params.g_sum**2, SHORT)

    assert evaluation.pole_adjacent
    assert evaluation.value is None
    assert evaluation.n_max_used == 20


def test_g_entries_raise_at_poles(fig1_params):
    with pytest.raises(PoleAtA):
        g_entry(fig1_params, Parity.EVEN, 1 - fig1_params.g_sum**2, "11", SHORT)
    with pytest.raises(PoleAtB):
        g_entry(fig1_params, Parity.ODD, 1 - fig1_params.g_diff**2, "22", SHORT)


def test_g_det_reports_its_entries(fig1_params):
    energy = 0.3
    evaluation = g_det(fig1_params, Parity.ODD, energy, SHORT)
    g11, g12, g21, g22 = evaluation.entries

    assert not evaluation.pole_adjacent
    assert all(math.isfinite(x) for x in (evaluation.value, g11, g12, g21, g22))
    assert evaluation.tail >= 0.0
    assert g_entry(fig1_params, Parity.ODD, energy, "21", SHORT) == pytest.approx(g21)


def test_g_functions_check_their_regime(fig1_params, fig2_params):
    with pytest.raises(RegimeError):
        g_det(fig2_params, Parity.EVEN, 0.3)
    with pytest.raises(RegimeError):
        g_equal(fig1_params, Parity.EVEN, 0.3)
    with pytest.raises(RegimeError):
        cf_residual(fig1_params, Parity.EVEN, 0.3)


def test_no_g_function_without_coupling(uncoupled_params):
    with pytest.raises(RegimeError, match="oracle"):
        GFunction(uncoupled_params, Parity.EVEN)


def test_cf_residual_integer_pole(fig2_params):
    with pytest.raises(PoleAtInteger):
        cf_residual(fig2_params, Parity.EVEN, 2.0)


def test_g_equal_has_no_determinant_entries(fig2_params):
    evaluation = g_equal(fig2_params, Parity.EVEN, 0.3)

    assert evaluation.entries is None
    assert math.isfinite(evaluation.value)
    assert evaluation.tail is not None


def test_grid_values_match_scalar_values(fig2_params):
    ev = GFunction(fig2_params, Parity.ODD)
    grid = np.array([-0.8, 0.1, 0.2, 0.25, 1.7])

    values = ev.values(grid)

    for energy, value in zip(grid, values):
        assert value == pytest.approx(float(ev.value(energy)), rel=1e-12)


def test_grid_values_are_nan_at_poles(fig2_params):
    ev = GFunction(fig2_params, Parity.EVEN)
    pole = 1 - fig2_params.g_sum**2

    values = ev.values([pole - 0.1, pole, 2.0])

    assert math.isfinite(values[0])
    assert np.isnan(values[1])
    assert np.isnan(values[2])


def test_precision_policy(fig1_params, fig2_params):
    assert digits_lost(fig2_params, 120) == 0.0
    assert digits_lost(fig1_params, 80) == pytest.approx(80 * math.log10(4.5))

    assert GFunction(fig1_params, Parity.EVEN).ctx.extended
    assert not GFunction(fig2_params, Parity.EVEN).ctx.extended
    assert not GFunction(fig1_params, Parity.EVEN, precision="double").ctx.extended
    assert context_for(fig2_params, 120, Regime.EQUAL_COUPLING, "extended").dps == 30


def test_g_det_changes_sign_at_oracle_levels(fig1_params):
    for parity in Parity:
        ev = GFunction(fig1_params, parity)
        _assert_sign_change_at_levels(ev, oracle_levels(fig1_params, parity, (-1.0, 2.0)))


def test_g_equal_changes_sign_at_oracle_levels(fig2_params):
    for parity in Parity:
        ev = GFunction(fig2_params, parity)
        _assert_sign_change_at_levels(ev, oracle_levels(fig2_params, parity, (-2.0, 3.0)))


def test_cf_residual_changes_sign_at_oracle_levels(fig2_params):
    for parity in Parity:
        ev = ContinuedFractionResidual(fig2_params, parity)
        _assert_sign_change_at_levels(ev, oracle_levels(fig2_params, parity, (-2.0, 3.0)))


def test_coefficient_decay_separates_eigenvalues(fig2_params):
    ev = GFunction(fig2_params, Parity.EVEN)
    level = oracle_levels(fig2_params, Parity.EVEN, (-2.0, 3.0))[0]

    assert ev.coefficient_decay(level) < 1e-6
    assert ev.coefficient_decay(level + 0.05) > ev.coefficient_decay(level)


def test_with_truncation_keeps_sector(fig1_params):
    ev = GFunction(fig1_params, Parity.ODD, SHORT)
    stepped = ev.with_truncation(SHORT.stepped())

    assert stepped.parity is Parity.ODD
    assert stepped.trunc.n_max == 21
    assert len(stepped.poles) == len(ev.poles) + 2
