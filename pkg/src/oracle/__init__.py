from .diagonalization import (
    ComparisonReport,
    MatchedLevel,
    ParityBlocks,
    TruncatedHamiltonian,
    build_hamiltonian,
    compare_spectra,
    eigen_spectrum,
    oracle_levels,
    parity_block,
    parity_blocks,
    parity_operator,
)

__all__ = [
    "ComparisonReport",
    "MatchedLevel",
    "ParityBlocks",
    "TruncatedHamiltonian",
    "build_hamiltonian",
    "compare_spectra",
    "eigen_spectrum",
    "oracle_levels",
    "parity_block",
    "parity_blocks",
    "parity_operator",
]
