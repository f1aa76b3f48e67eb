"""Exceptions and warnings raised by the G-function solvers."""


class SolverError(ArithmeticError):
    pass


class RegimeError(SolverError, ValueError):
    """An operation was called for parameters routed to a different solving path."""


class PoleError(SolverError):
    """The trial energy sits within eps_pole of a pole of a coefficient chain."""

    kind = "pole"

    def __init__(self, m: int, energy: float):
        self.m = m
        self.energy = energy
        super().__init__(f"{self.kind} at m={m} (E={energy!r})")


class PoleAtA(PoleError):
    kind = "A-space pole m - g^2"


class PoleAtB(PoleError):
    kind = "B-space pole m - g'^2"


class PoleAtInteger(PoleError):
    kind = "three-term chain pole E = m"


class BracketError(SolverError):
    """A bracket lost its sign change during refinement."""


class TruncationWarning(UserWarning):
    """A projected initial value has not converged at the requested truncation."""
