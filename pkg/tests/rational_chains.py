"""
Exact rational re-derivations of the coefficient chains.

These are written in the unscaled form (plain c_n, divided by the displacement at every
step) so that comparing c_n * s^n with the scaled float chains checks the scaling as well
as the rounding.
"""

from fractions import Fraction
from typing import List, Sequence, Tuple


def exact(*values: float) -> Tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


def bracket(d1: Fraction, d2: Fraction, sign: int, m: int) -> Fraction:
    return d2 + sign * (-1) ** m * d1


def scaled(coeffs: Sequence[Fraction], scale: Fraction) -> List[Fraction]:
    return [c * scale**n for n, c in enumerate(coeffs)]


def d_space(d1, d2, g, gp, sign, energy, a0, b0, n_max):
    a, b = [Fraction(a0)], [Fraction(b0)]
    for m in range(n_max):
        dm = bracket(d1, d2, sign, m)
        a_prev = a[m - 1] if m else 0
        b_prev = b[m - 1] if m else 0
        a.append(((dm * b[m] - (m - energy) * a[m]) / g - a_prev) / (m + 1))
        b.append(((dm * a[m] - (m - energy) * b[m]) / gp - b_prev) / (m + 1))
    return a, b


def three_term(d1, d2, g, sign, energy, n_max, start_with_b=True):
    """b0 = 1 start with a0 = -E / D_0, or a0 = 1 start with b0 = D_0 / (0 - E)."""
    d0 = bracket(d1, d2, sign, 0)
    if start_with_b:
        a, b = [-energy / d0], [Fraction(1)]
    else:
        a, b = [Fraction(1)], [d0 / (0 - energy)]
    for m in range(n_max):
        dm = bracket(d1, d2, sign, m)
        a_prev = a[m - 1] if m else 0
        a.append(((dm * b[m] - (m - energy) * a[m]) / g - a_prev) / (m + 1))
        d_next = bracket(d1, d2, sign, m + 1)
        b.append(d_next * a[m + 1] / (m + 1 - energy) if d_next else Fraction(0))
    return a, b


def a_space(d1, d2, g, gp, energy, v0, w0, z0, n_max):
    u, v, w, z = [], [Fraction(v0)], [Fraction(w0)], [Fraction(z0)]
    for m in range(n_max + 1):
        shift = m - energy
        u.append((d2 * v[m] + d1 * w[m]) / (shift - g * g))
        if m == n_max:
            break
        prev = (v[m - 1], w[m - 1], z[m - 1]) if m else (0, 0, 0)
        v.append(
            (((shift + g * g - 2 * g * gp) * v[m] - d2 * u[m] - d1 * z[m]) / (g - gp) - prev[0])
            / (m + 1)
        )
        w.append(
            (((shift + g * g + 2 * g * gp) * w[m] - d1 * u[m] - d2 * z[m]) / (g + gp) - prev[1])
            / (m + 1)
        )
        z.append(
            (((shift + 3 * g * g) * z[m] - d1 * v[m] - d2 * w[m]) / (2 * g) - prev[2]) / (m + 1)
        )
    return u, v, w, z


def b_space(d1, d2, g, gp, energy, u0, w0, z0, n_max):
    h2 = gp * gp
    u, v, w, z = [Fraction(u0)], [], [Fraction(w0)], [Fraction(z0)]
    for m in range(n_max + 1):
        shift = m - energy
        v.append((d2 * u[m] + d1 * z[m]) / (shift - h2))
        if m == n_max:
            break
        prev = (u[m - 1], w[m - 1], z[m - 1]) if m else (0, 0, 0)
        u.append(
            ((d2 * v[m] + d1 * w[m] - (shift + h2 - 2 * g * gp) * u[m]) / (g - gp) - prev[0])
            / (m + 1)
        )
        w.append(
            (((shift + 3 * h2) * w[m] - d1 * u[m] - d2 * z[m]) / (2 * gp) - prev[1]) / (m + 1)
        )
        z.append(
            (((shift + h2 + 2 * g * gp) * z[m] - d1 * v[m] - d2 * w[m]) / (g + gp) - prev[2])
            / (m + 1)
        )
    return u, v, w, z


def eq_chain(d1, d2, g, energy, y0, z0, x0, n_max):
    same, mixed = d1 * d1 + d2 * d2, 2 * d1 * d2
    u, y, x, z = [], [Fraction(y0)], [Fraction(x0)], [Fraction(z0)]
    for m in range(n_max + 1):
        shift = m - energy
        u.append(y[m] / (shift - g * g))
        if m == n_max:
            break
        prev = (y[m - 1], x[m - 1], z[m - 1]) if m else (0, 0, 0)
        y.append((((shift + g * g) * y[m] - same * u[m] - mixed * z[m]) / g - prev[0]) / (m + 1))
        x.append((((shift + g * g) * x[m] - mixed * u[m] - same * z[m]) / g - prev[1]) / (m + 1))
        z.append((((shift + 3 * g * g) * z[m] - x[m]) / (2 * g) - prev[2]) / (m + 1))
    return u, y, x, z
