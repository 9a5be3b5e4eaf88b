"""Classical first-order Markov melody generator over a named transition table."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..qcsim import sample_index

ROW_SUM_TOL = 0.02


@dataclass(frozen=True)
class ClassicalTransitionTable:
    symbols: tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        n = len(self.symbols)
        if p.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {p.shape}")
        if len(set(self.symbols)) != n:
            raise ValueError("symbols must be unique")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        bad = np.flatnonzero(np.abs(p.sum(axis=1) - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise ValueError(f"row {self.symbols[bad[0]]} sums to {p[bad[0]].sum():.3f}")
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "probabilities", p)

    def row(self, symbol: str) -> np.ndarray:
        try:
            i = self.symbols.index(symbol)
        except ValueError:
            raise KeyError(f"unknown symbol {symbol!r}") from None
        r = self.probabilities[i]
        return r / r.sum()


_C_MAJOR = ("C3", "D3", "E3", "F3", "G3", "A3", "B3", "C4")

# rows as printed, including their rounding (0.33 * 3 = 0.99)
_RULES = [
    [0.2, 0.2, 0.2, 0.0, 0.2, 0.0, 0.0, 0.2],
    [0.33, 0.0, 0.33, 0.0, 0.33, 0.0, 0.0, 0.0],
    [0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0],
    [0.33, 0.0, 0.33, 0.0, 0.33, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.25, 0.25, 0.25, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0],
]


def c_major_rules() -> ClassicalTransitionTable:
    """Eight-rule table over the C3 major scale."""
    return ClassicalTransitionTable(_C_MAJOR, np.array(_RULES))


def classical_generate(table: ClassicalTransitionTable, start: str, n: int,
                       rng: np.random.Generator) -> list[str]:
    """``n`` successors of ``start`` (the start symbol itself is not included)."""
    if start not in table.symbols:
        raise KeyError(f"unknown start symbol {start!r}")
    out = []
    current = start
    for _ in range(n):
        current = table.symbols[sample_index(table.row(current), rng)]
        out.append(current)
    return out
