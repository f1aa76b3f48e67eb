"""
Exact diagonalization of the two-qubit Rabi Hamiltonian in a truncated Fock basis.

The rotated Hamiltonian is assembled as a dense symmetric matrix over |q, n> with the qubit
states q0=|1,1>, q1=|1,-1>, q2=|-1,1>, q3=|-1,-1> and photon numbers n = 0..N. Row index is
4*n + q. The parity sectors are spanned by

    e_n = (|q0, n> + s (-1)^n |q3, n>) / sqrt(2)
    f_n = (|q1, n> + s (-1)^n |q2, n>) / sqrt(2)

with s = +1 (even) or -1 (odd).
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import settings, setup_logging
from model.params import ModelParams, Parity

if TYPE_CHECKING:
    from solvers.spectrum import SpectrumResult

logger = setup_logging("oracle.diagonalization")

RESIDUAL_PAIRS = 20
RESIDUAL_TOL = 1e-9
CROSS_BLOCK_TOL = 1e-14
CONVERGENCE_FACTOR = 1.3
CONVERGENCE_TOL = 1e-9


@dataclass(frozen=True)
class TruncatedHamiltonian:
    dim: int
    matrix: np.ndarray = field(repr=False)
    n_photon_max: int
    params: ModelParams


@dataclass(frozen=True)
class ParityBlocks:
    even_block: np.ndarray = field(repr=False)
    odd_block: np.ndarray = field(repr=False)

    def block(self, parity: Parity) -> np.ndarray:
        return self.even_block if parity is Parity.EVEN else self.odd_block


def _check_budget(dim: int) -> None:
    needed_mb = dim * dim * 8 / 2**20
    if needed_mb > settings.oracle_memory_mb:
        raise ValueError(
            f"Oracle matrix of dimension {dim} needs {needed_mb:.0f} MB, "
            f"over the budget of {settings.oracle_memory_mb} MB (RABI2Q_ORACLE_MEMORY_MB)"
        )


def _photon_couplings(p: ModelParams) -> Tuple[float, float, float, float]:
    """Coupling of q0..q3 to the photon: +g, +g', -g', -g."""
    g, gp = p.g1 + p.g2, p.g1 - p.g2
    return g, gp, -gp, -g


def build_hamiltonian(p: ModelParams, N: int) -> TruncatedHamiltonian:
    """
    Assemble the full 4(N+1) x 4(N+1) Hamiltonian matrix.

    Args:
        p: Model parameters (signs are kept as given)
        N: Largest retained photon number

    Returns:
        TruncatedHamiltonian with an exactly symmetric matrix

    Raises:
        ValueError: If N < 1 or the matrix exceeds the memory budget
    """
    if N < 1:
        raise ValueError(f"Photon truncation must be at least 1, got {N}")
    dim = 4 * (N + 1)
    _check_budget(dim)

    h = np.zeros((dim, dim))
    couplings = _photon_couplings(p)
    qubit_pairs = ((0, 1, -p.delta2), (2, 3, -p.delta2), (0, 2, -p.delta1), (1, 3, -p.delta1))

    for n in range(N + 1):
        base = 4 * n
        for q in range(4):
            h[base + q, base + q] = n
        for q1, q2, value in qubit_pairs:
            h[base + q1, base + q2] = h[base + q2, base + q1] = value
        if n < N:
            root = math.sqrt(n + 1)
            for q, c in enumerate(couplings):
                h[base + q, base + 4 + q] = h[base + 4 + q, base + q] = c * root

    return TruncatedHamiltonian(dim=dim, matrix=h, n_photon_max=N, params=p)


def _parity_basis(N: int) -> np.ndarray:
    """Orthogonal matrix whose columns are the even sector (e_0, f_0, e_1, ...) then the odd."""
    dim = 4 * (N + 1)
    u = np.zeros((dim, dim))
    half = 2 * (N + 1)
    inv = 1 / math.sqrt(2)
    for offset, parity in ((0, Parity.EVEN), (half, Parity.ODD)):
        for n in range(N + 1):
            phase = parity.sign * (-1) ** n
            e_col, f_col = offset + 2 * n, offset + 2 * n + 1
            u[4 * n + 0, e_col] = inv
            u[4 * n + 3, e_col] = phase * inv
            u[4 * n + 1, f_col] = inv
            u[4 * n + 2, f_col] = phase * inv
    return u


def _symmetrized(block: np.ndarray) -> np.ndarray:
    return (block + block.T) / 2


def parity_blocks(h: TruncatedHamiltonian) -> ParityBlocks:
    """
    Rotate the full matrix into the parity-adapted basis and split it into two blocks.

    Raises:
        ArithmeticError: If the cross-parity elements do not vanish
    """
    u = _parity_basis(h.n_photon_max)
    rotated = u.T @ h.matrix @ u
    half = h.dim // 2
    norm = max(np.abs(h.matrix).max(), 1.0)
    cross = np.abs(rotated[:half, half:]).max()
    if cross > CROSS_BLOCK_TOL * norm * h.dim:
        raise ArithmeticError(f"Parity blocks do not decouple: cross element {cross:.3e}")

    return ParityBlocks(
        even_block=_symmetrized(rotated[:half, :half]),
        odd_block=_symmetrized(rotated[half:, half:]),
    )


def parity_block(p: ModelParams, parity: Parity, N: int) -> np.ndarray:
    """
    Build one parity block directly over (e_0, f_0, e_1, f_1, ...).

    e-e couplings are g sqrt(n+1), f-f couplings g' sqrt(n+1) and e_n-f_n couplings
    -(D2 + s (-1)^n D1).
    """
    if N < 1:
        raise ValueError(f"Photon truncation must be at least 1, got {N}")
    dim = 2 * (N + 1)
    _check_budget(dim)

    g, gp = p.g1 + p.g2, p.g1 - p.g2
    block = np.zeros((dim, dim))
    for n in range(N + 1):
        e, f = 2 * n, 2 * n + 1
        block[e, e] = block[f, f] = n
        block[e, f] = block[f, e] = -(p.delta2 + parity.sign * (-1) ** n * p.delta1)
        if n < N:
            root = math.sqrt(n + 1)
            block[e, e + 2] = block[e + 2, e] = g * root
            block[f, f + 2] = block[f + 2, f] = gp * root
    return block


def parity_operator(N: int) -> np.ndarray:
    """P|s1, s2, n> = (-1)^n |-s1, -s2, n> in the |q, n> basis."""
    dim = 4 * (N + 1)
    op = np.zeros((dim, dim))
    for n in range(N + 1):
        phase = (-1) ** n
        for q, flipped in ((0, 3), (3, 0), (1, 2), (2, 1)):
            op[4 * n + flipped, 4 * n + q] = phase
    return op


def eigen_spectrum(block: np.ndarray) -> np.ndarray:
    """
    All eigenvalues of a real symmetric matrix, ascending.

    The lowest eigenpairs are checked for ||Hv - lambda v|| <= 1e-9 ||H||.

    Raises:
        ValueError: If the input is not exactly symmetric (contract violation)
        ArithmeticError: If the residual check fails
    """
    block = np.asarray(block, dtype=float)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError(f"Contract violation: expected a square matrix, got {block.shape}")
    if not np.array_equal(block, block.T):
        raise ValueError("Contract violation: eigen_spectrum needs an exactly symmetric matrix")

    values, vectors = scipy.linalg.eigh(block)
    k = min(RESIDUAL_PAIRS, len(values))
    norm = max(np.abs(values).max(), 1.0)
    residuals = np.linalg.norm(block @ vectors[:, :k] - vectors[:, :k] * values[:k], axis=0)
    worst = residuals.max() if k else 0.0
    if worst > RESIDUAL_TOL * norm:
        raise ArithmeticError(f"Eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL} * ||H||")
    return values


@lru_cache(maxsize=64)
def _block_spectrum(p: ModelParams, parity: Parity, N: int) -> Tuple[float, ...]:
    logger.debug(f"Diagonalizing {parity.value} block, N={N}, dim={2 * (N + 1)}")
    return tuple(eigen_spectrum(parity_block(p, parity, N)))


def oracle_levels(
    p: ModelParams,
    parity: Parity,
    window: Optional[Tuple[float, float]] = None,
    N: Optional[int] = None,
) -> List[float]:
    """
    Oracle eigenvalues of one parity sector.

    The block is diagonalized at N and at ceil(1.3 N); a warning is logged when the
    returned levels move by more than 1e-9 between the two.

    Args:
        p: Model parameters
        parity: Parity sector
        window: Energy window (lowest 20 levels when omitted)
        N: Photon truncation (defaults to the configured oracle_n)

    Returns:
        Ascending list of eigenvalues at truncation N
    """
    N = N or settings.oracle_n
    levels = np.array(_block_spectrum(p, parity, N))
    larger = np.array(_block_spectrum(p, parity, math.ceil(CONVERGENCE_FACTOR * N)))

    if window is None:
        selected = np.arange(min(RESIDUAL_PAIRS, len(levels)))
    else:
        selected = np.flatnonzero((levels >= window[0]) & (levels <= window[1]))

    if selected.size:
        drift = np.abs(levels[selected] - larger[selected]).max()
        if drift > CONVERGENCE_TOL:
            logger.warning(
                f"Oracle not converged at N={N} ({parity.value}): levels move by {drift:.3e} "
                f"at N={math.ceil(CONVERGENCE_FACTOR * N)}"
            )
    return [float(e) for e in levels[selected]]


@dataclass(frozen=True)
class MatchedLevel:
    parity: Parity
    energy: float
    oracle_energy: float

    @property
    def residual(self) -> float:
        return abs(self.energy - self.oracle_energy)


@dataclass(frozen=True)
class ComparisonReport:
    matched: Tuple[MatchedLevel, ...]
    unmatched_g: Tuple[Tuple[Parity, float], ...]
    unmatched_oracle: Tuple[Tuple[Parity, float], ...]
    max_residual: float
    mean_residual: float
    match_tol: float
    worst: Optional[str] = None

    @property
    def passed(self) -> bool:
        if self.unmatched_g or self.unmatched_oracle:
            return False
        return self.max_residual < self.match_tol

    def residuals(self) -> List[float]:
        return [m.residual for m in self.matched]


def _greedy_match(
    found: Sequence[float], reference: Sequence[float], capture: float
) -> Tuple[List[Tuple[int, int]], List[int], List[int]]:
    pairs = sorted(
        (abs(e - r), i, j)
        for i, e in enumerate(found)
        for j, r in enumerate(reference)
        if abs(e - r) <= capture
    )
    used_i, used_j, matched = set(), set(), []
    for _, i, j in pairs:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        matched.append((i, j))
    left_i = [i for i in range(len(found)) if i not in used_i]
    left_j = [j for j in range(len(reference)) if j not in used_j]
    return matched, left_i, left_j


def compare_spectra(
    levels: "SpectrumResult",
    oracle: Dict[Parity, Sequence[float]],
    match_tol: Optional[float] = None,
    capture: float = 0.05,
) -> ComparisonReport:
    """
    Greedy nearest matching of G-derived levels against oracle levels, per parity.

    Args:
        levels: Spectrum to check
        oracle: Oracle eigenvalues per parity (same parameters and window)
        match_tol: Residual threshold for ``passed`` (defaults to the configured match_tol)
        capture: Largest distance at which two levels are paired at all

    Returns:
        ComparisonReport with max/mean residuals and the unmatched levels of either side
    """
    tol = settings.match_tol if match_tol is None else match_tol
    matched: List[MatchedLevel] = []
    unmatched_g: List[Tuple[Parity, float]] = []
    unmatched_oracle: List[Tuple[Parity, float]] = []

    for parity, reference in oracle.items():
        found = [lvl.energy for lvl in levels.levels if lvl.parity is parity]
        pairs, left_g, left_o = _greedy_match(found, list(reference), capture)
        matched.extend(MatchedLevel(parity, found[i], reference[j]) for i, j in pairs)
        unmatched_g.extend((parity, found[i]) for i in left_g)
        unmatched_oracle.extend((parity, reference[j]) for j in left_o)

    matched.sort(key=lambda m: (m.oracle_energy, m.parity.value))
    residuals = [m.residual for m in matched]
    max_residual = max(residuals, default=0.0)
    mean_residual = float(np.mean(residuals)) if residuals else 0.0

    worst = None
    if matched and max_residual >= tol:
        offender = max(matched, key=lambda m: m.residual)
        worst = (
            f"{offender.parity.value} level E={offender.energy:.12g} is {offender.residual:.3e} "
            f"from oracle E={offender.oracle_energy:.12g}"
        )
    elif unmatched_g:
        parity, energy = min(unmatched_g, key=lambda x: x[1])
        worst = f"{parity.value} level E={energy:.12g} has no oracle partner"
    elif unmatched_oracle:
        parity, energy = min(unmatched_oracle, key=lambda x: x[1])
        worst = f"oracle {parity.value} level E={energy:.12g} is missing from the spectrum"

    report = ComparisonReport(
        matched=tuple(matched),
        unmatched_g=tuple(unmatched_g),
        unmatched_oracle=tuple(unmatched_oracle),
        max_residual=max_residual,
        mean_residual=mean_residual,
        match_tol=tol,
        worst=worst,
    )
    logger.info(
        f"Compared {len(matched)} levels: max residual {max_residual:.3e}, "
        f"{len(unmatched_g)} unmatched G levels, {len(unmatched_oracle)} unmatched oracle levels"
    )
    return report
