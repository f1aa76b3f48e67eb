import math
import warnings
from fractions import Fraction

import pytest
import rational_chains as exact_chains

from model.params import Parity, validate_params
from oracle.diagonalization import oracle_levels
from solvers.errors import PoleAtA, PoleAtB, PoleAtInteger, RegimeError, TruncationWarning
from solvers.precision import NumericContext
from solvers.recurrence import (
    TruncationConfig,
    a_space_coeffs,
    b_space_coeffs,
    bracket_factor,
    d_space_coeffs,
    default_init_choice,
    eq_coupling_coeffs,
    eq_initial_from_d,
    initial_from_d,
    integer_pole_indices,
    three_term_coeffs,
)

SHORT = TruncationConfig(n_max=15)
ENERGY = 0.37


def assert_same_series(computed, expected, rel=1e-10):
    """Coefficient-wise agreement, measured against the largest expected coefficient."""
    assert len(computed) == len(expected)
    peak = max(abs(float(c)) for c in expected)
    for n, (c, e) in enumerate(zip(computed, expected)):
        assert abs(float(c) - float(e)) <= rel * peak, f"coefficient {n}: {c} != {float(e)}"


def exact_params(p):
    return exact_chains.exact(p.delta1, p.delta2, p.g_sum, p.g_diff)


@pytest.mark.parametrize("parity", list(Parity))
@pytest.mark.parametrize("init", [(1.0, 0.0), (0.0, 1.0), (0.3, -1.7)])
def test_d_space_matches_exact_arithmetic(fig1_params, parity, init):
    d1, d2, g, gp = exact_params(fig1_params)
    a, b = exact_chains.d_space(d1, d2, g, gp, parity.sign, Fraction(ENERGY), *init, 15)

    series = d_space_coeffs(fig1_params, parity, ENERGY, init, SHORT)

    assert series.n_max == 15
    assert_same_series(series.a, exact_chains.scaled(a, g))
    assert_same_series(series.b, exact_chains.scaled(b, g))
    raw_a, raw_b = series.unscaled()
    assert_same_series(raw_a, a)
    assert_same_series(raw_b, b)


def test_d_space_extended_precision_matches_exact_arithmetic(fig1_params):
    d1, d2, g, gp = exact_params(fig1_params)
    a, b = exact_chains.d_space(d1, d2, g, gp, 1, Fraction(ENERGY), 1, 0, 15)

    series = d_space_coeffs(fig1_params, Parity.EVEN, ENERGY, trunc=SHORT, ctx=NumericContext(50))

    assert_same_series(series.a, exact_chains.scaled(a, g), rel=1e-14)
    assert_same_series(series.b, exact_chains.scaled(b, g), rel=1e-14)


def test_a_space_matches_exact_arithmetic(fig1_params):
    d1, d2, g, gp = exact_params(fig1_params)
    init = (0.3, -0.2, 0.5)
    expected = exact_chains.a_space(d1, d2, g, gp, Fraction(ENERGY), *init, 15)

    series = a_space_coeffs(fig1_params, ENERGY, init, SHORT)

    for computed, coeffs in zip((series.u, series.v, series.w, series.z), expected):
        assert_same_series(computed, exact_chains.scaled(coeffs, g))


def test_b_space_matches_exact_arithmetic(fig1_params):
    d1, d2, g, gp = exact_params(fig1_params)
    init = (0.3, -0.2, 0.5)
    expected = exact_chains.b_space(d1, d2, g, gp, Fraction(ENERGY), *init, 15)

    series = b_space_coeffs(fig1_params, ENERGY, init, SHORT)

    assert series.scale == fig1_params.g_diff
    for computed, coeffs in zip((series.u, series.v, series.w, series.z), expected):
        assert_same_series(computed, exact_chains.scaled(coeffs, gp))


@pytest.mark.parametrize("parity", list(Parity))
def test_three_term_chain_matches_exact_arithmetic(fig2_params, parity):
    d1, d2, g, _ = exact_params(fig2_params)
    a, b = exact_chains.three_term(d1, d2, g, parity.sign, Fraction(ENERGY), 15)

    series = three_term_coeffs(fig2_params, parity, ENERGY, "b0", SHORT)

    assert_same_series(series.a, exact_chains.scaled(a, g))
    assert_same_series(series.b, exact_chains.scaled(b, g))


def test_eq_chain_matches_exact_arithmetic(fig2_params):
    d1, d2, g, _ = exact_params(fig2_params)
    init = (1.0, 0.3, 0.2)
    expected = exact_chains.eq_chain(d1, d2, g, Fraction(ENERGY), *init, 15)

    series = eq_coupling_coeffs(fig2_params, ENERGY, init, SHORT)

    for computed, coeffs in zip((series.u, series.y, series.x, series.z), expected):
        assert_same_series(computed, exact_chains.scaled(coeffs, g))


def test_eq_chain_x_line_defaults_to_y(fig2_params):
    series = eq_coupling_coeffs(fig2_params, ENERGY, (1.0, 0.3), SHORT)

    assert series.x[0] == series.y[0] == 1.0


def test_d_space_is_linear_in_its_start(fig1_params):
    trunc = TruncationConfig(n_max=40)
    first = d_space_coeffs(fig1_params, Parity.ODD, ENERGY, (1.0, 0.0), trunc)
    second = d_space_coeffs(fig1_params, Parity.ODD, ENERGY, (0.0, 1.0), trunc)
    combined = d_space_coeffs(fig1_params, Parity.ODD, ENERGY, (0.3, -1.7), trunc)

    assert_same_series(combined.a, [0.3 * x - 1.7 * y for x, y in zip(first.a, second.a)])
    assert_same_series(combined.b, [0.3 * x - 1.7 * y for x, y in zip(first.b, second.b)])


BASIS_STARTS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
COMBINATION = (Fraction(1, 2), Fraction(-2), Fraction(1, 4))


def combine(series_list, line):
    """COMBINATION-weighted sum of one coefficient line over the basis solutions."""
    return [
        sum(weight * series[line][n] for weight, series in zip(COMBINATION, series_list))
        for n in range(len(series_list[0][line]))
    ]


@pytest.mark.parametrize(
    "exact_chain, coeffs, scale_index",
    [(exact_chains.a_space, a_space_coeffs, 2), (exact_chains.b_space, b_space_coeffs, 3)],
    ids=["A-space", "B-space"],
)
def test_displaced_chains_superpose_on_every_line(fig1_params, exact_chain, coeffs, scale_index):
    exact = exact_params(fig1_params)
    d1, d2, g, gp = exact
    basis = [exact_chain(d1, d2, g, gp, Fraction(ENERGY), *s, 15) for s in BASIS_STARTS]

    series = coeffs(fig1_params, ENERGY, tuple(float(w) for w in COMBINATION), SHORT)

    for line, computed in enumerate((series.u, series.v, series.w, series.z)):
        expected = exact_chains.scaled(combine(basis, line), exact[scale_index])
        assert_same_series(computed, expected)


def test_eq_chain_superposes_on_every_line(fig2_params):
    d1, d2, g, _ = exact_params(fig2_params)
    basis = [exact_chains.eq_chain(d1, d2, g, Fraction(ENERGY), *s, 15) for s in BASIS_STARTS]

    series = eq_coupling_coeffs(fig2_params, ENERGY, tuple(float(w) for w in COMBINATION), SHORT)

    for line, computed in enumerate((series.u, series.y, series.x, series.z)):
        assert_same_series(computed, exact_chains.scaled(combine(basis, line), g))


def test_eq_chain_x_line_starts_independently(fig2_params):
    d1, d2, g, _ = exact_params(fig2_params)
    only_x = exact_chains.eq_chain(d1, d2, g, Fraction(ENERGY), 0, 0, 1, 15)

    series = eq_coupling_coeffs(fig2_params, ENERGY, (0.0, 0.0, 1.0), SHORT)

    assert series.y[0] == 0.0 and series.x[0] == 1.0
    assert_same_series(series.x, exact_chains.scaled(only_x[2], g))
    assert_same_series(series.u, exact_chains.scaled(only_x[0], g))


@pytest.mark.parametrize("parity", list(Parity))
def test_d_space_superposes_exactly(fig1_params, parity):
    d1, d2, g, gp = exact_params(fig1_params)
    energy = Fraction(ENERGY)
    first = exact_chains.d_space(d1, d2, g, gp, parity.sign, energy, 1, 0, 15)
    second = exact_chains.d_space(d1, d2, g, gp, parity.sign, energy, 0, 1, 15)
    weights = (Fraction(3, 4), Fraction(-5, 2))

    series = d_space_coeffs(fig1_params, parity, ENERGY, (0.75, -2.5), SHORT)

    for computed, x, y in ((series.a, first[0], second[0]), (series.b, first[1], second[1])):
        expected = [weights[0] * xn + weights[1] * yn for xn, yn in zip(x, y)]
        assert_same_series(computed, exact_chains.scaled(expected, g))


@pytest.mark.parametrize("parity", list(Parity))
def test_three_term_starts_are_proportional(fig2_params, parity):
    d1, d2, g, _ = exact_params(fig2_params)
    energy = Fraction(ENERGY)
    a, b = exact_chains.three_term(d1, d2, g, parity.sign, energy, 15, start_with_b=False)
    factor = -energy / exact_chains.bracket(d1, d2, parity.sign, 0)

    from_a0 = three_term_coeffs(fig2_params, parity, ENERGY, "a0", SHORT)
    from_b0 = three_term_coeffs(fig2_params, parity, ENERGY, "b0", SHORT)

    assert_same_series(from_a0.a, exact_chains.scaled(a, g))
    assert_same_series(from_a0.b, exact_chains.scaled(b, g))
    assert_same_series(from_b0.a, exact_chains.scaled([factor * x for x in a], g))
    assert_same_series(from_b0.b, exact_chains.scaled([factor * x for x in b], g))


@pytest.mark.parametrize("parity", list(Parity))
@pytest.mark.parametrize("m", range(6))
def test_bracket_under_exchange_of_the_qubits(fig1_params, parity, m):
    p = fig1_params
    swapped = validate_params(p.delta2, p.delta1, p.g1, p.g2)
    phase = parity.sign * (-1) ** m

    expected = phase * bracket_factor(p, parity, m)

    assert bracket_factor(swapped, parity, m) == pytest.approx(expected)
    if parity is Parity.EVEN and m % 2 == 0:
        assert bracket_factor(swapped, parity, m) == pytest.approx(bracket_factor(p, parity, m))


def test_first_d_space_coefficients(fig1_params):
    p = fig1_params

    from_a = d_space_coeffs(p, Parity.EVEN, ENERGY, (1.0, 0.0), SHORT)
    from_b = d_space_coeffs(p, Parity.EVEN, ENERGY, (0.0, 1.0), SHORT)

    # scaled coefficients: a~1 = a1 * g
    assert from_a.a[1] == pytest.approx(ENERGY, rel=1e-14)
    assert from_b.a[1] == pytest.approx(p.delta2 + p.delta1, rel=1e-14)


@pytest.mark.parametrize("params_fixture", ["fig2_params", "dark_even_params"])
def test_first_three_term_coefficient_near_one(request, params_fixture):
    p = request.getfixturevalue(params_fixture)
    energy = 1.0 + 1e-5
    d0 = p.delta2 + p.delta1

    series = three_term_coeffs(p, Parity.EVEN, energy, "a0", SHORT)

    assert series.a[1] == pytest.approx(energy - d0**2 / energy, abs=1e-12)
    assert series.a[1] == pytest.approx(-(d0**2 - 1.0), abs=1e-4)


def test_u_follows_from_v_and_w(fig1_params):
    series = a_space_coeffs(fig1_params, ENERGY, (0.3, -0.2, 0.5), SHORT)
    p = fig1_params

    for m in (0, 4, 11):
        expected = (p.delta2 * series.v[m] + p.delta1 * series.w[m]) / (m - ENERGY - p.g_sum**2)
        assert series.u[m] == pytest.approx(expected)


def test_a_space_pole_is_reported(fig1_params):
    with pytest.raises(PoleAtA) as excinfo:
        a_space_coeffs(fig1_params, 3 - fig1_params.g_sum**2, (1.0, 0.0, 0.0), SHORT)

    assert excinfo.value.m == 3


def test_b_space_pole_is_reported(fig1_params):
    with pytest.raises(PoleAtB) as excinfo:
        b_space_coeffs(fig1_params, 2 - fig1_params.g_diff**2, (1.0, 0.0, 0.0), SHORT)

    assert excinfo.value.m == 2


def test_three_term_chain_integer_pole(fig2_params):
    with pytest.raises(PoleAtInteger) as excinfo:
        three_term_coeffs(fig2_params, Parity.EVEN, 2.0, trunc=SHORT)

    assert excinfo.value.m == 2


def test_three_term_chain_b0_start_is_regular_at_zero(fig2_params):
    series = three_term_coeffs(fig2_params, Parity.EVEN, 0.0, "b0", SHORT)

    assert all(math.isfinite(c) for c in series.a + series.b)


def test_b0_start_needs_nonzero_d0(singlet_params):
    with pytest.raises(ValueError, match="D_0"):
        three_term_coeffs(singlet_params, Parity.ODD, ENERGY, "b0", SHORT)


@pytest.mark.parametrize("m", range(11))
def test_eq_chain_is_finite_at_integer_energies(fig2_params, m):
    series = eq_coupling_coeffs(fig2_params, float(m), (1.0, 0.3, 0.2))

    assert all(math.isfinite(c) for c in series.u + series.y + series.x + series.z)


def test_chains_check_their_regime(fig1_params, fig2_params):
    with pytest.raises(RegimeError):
        d_space_coeffs(fig2_params, Parity.EVEN, ENERGY)
    with pytest.raises(RegimeError):
        eq_coupling_coeffs(fig1_params, ENERGY, (1.0, 0.0))
    with pytest.raises(RegimeError):
        three_term_coeffs(fig1_params, Parity.EVEN, ENERGY)


def test_integer_pole_indices_skip_vanishing_brackets(singlet_params):
    assert integer_pole_indices(singlet_params, Parity.ODD, 5) == [1, 3, 5]
    assert integer_pole_indices(singlet_params, Parity.EVEN, 5) == [0, 2, 4]
    assert integer_pole_indices(singlet_params, None, 5) == list(range(6))


def test_bracket_factor(fig1_params):
    assert bracket_factor(fig1_params, Parity.EVEN, 0) == pytest.approx(1.1)
    assert bracket_factor(fig1_params, Parity.EVEN, 1) == pytest.approx(-0.3)
    assert bracket_factor(fig1_params, Parity.ODD, 0) == pytest.approx(-0.3)
    assert bracket_factor(fig1_params, Parity.ODD, 1) == pytest.approx(1.1)


def test_default_init_choice(fig2_params, singlet_params):
    assert default_init_choice(fig2_params) == "b0"
    assert default_init_choice(singlet_params) == "a0"


def test_unconverged_projection_warns(fig1_params):
    series = d_space_coeffs(fig1_params, Parity.EVEN, ENERGY)

    with pytest.warns(TruncationWarning, match="A-space"):
        initial_from_d(series, "A", fig1_params)


def test_truncation_config_steps():
    trunc = TruncationConfig(n_max=80, n_max_step=2)

    assert trunc.stepped().n_max == 82
    assert trunc.with_n_max(10).n_max_step == 2


def test_equal_coupling_projection_converges_at_an_eigenvalue(fig2_params):
    level = oracle_levels(fig2_params, Parity.EVEN, (-2.0, 3.0))[0]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        series = [
            three_term_coeffs(fig2_params, Parity.EVEN, level, trunc=TruncationConfig(n_max=n))
            for n in (120, 121)
        ]
        initials = [eq_initial_from_d(s, fig2_params, Parity.EVEN).as_tuple() for s in series]

    assert initials[1] == pytest.approx(initials[0], rel=1e-8)
