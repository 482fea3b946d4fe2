"""Complementary pattern ensembles drawn from a partial Hadamard matrix.

Each measurement frame pair displays a binary pattern and its bitwise
complement.  The 0/1 pattern rows come from randomly selected rows of a
Sylvester Hadamard matrix (excluding the all-ones row 0, whose complement
carries no light) under one shared random column permutation, so the
difference matrix keeps exact row orthogonality:
pos - neg rows are distinct Hadamard rows and (pos-neg)(pos-neg)^T = N*I.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import ParameterError

SERIAL_VERSION = 1


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def hadamard(order: int) -> np.ndarray:
    """Sylvester Hadamard matrix of the given order (power of two), entries +-1."""
    if not _is_pow2(order):
        raise ParameterError(f"Hadamard order must be a power of 2, got {order}")
    return scipy.linalg.hadamard(order, dtype=np.int64)


@dataclass(eq=False)
class PatternPair:
    """A binary pattern and its complement, flattened row-major to length N."""

    pos: np.ndarray
    neg: np.ndarray

    def __post_init__(self):
        self.pos = np.asarray(self.pos, dtype=np.int64)
        self.neg = np.asarray(self.neg, dtype=np.int64)
        if self.pos.shape != self.neg.shape or self.pos.ndim != 1:
            raise ParameterError("pattern pair must be two 1-D grids of equal length")
        for arr in (self.pos, self.neg):
            if not np.isin(arr, (0, 1)).all():
                raise ParameterError("pattern entries must be 0 or 1")
        if not (self.pos + self.neg == 1).all():
            raise ParameterError("patterns are not complementary")


@dataclass(eq=False)
class SensingEnsemble:
    """M complementary pattern pairs over N pixels.

    source_rows are the selected Hadamard row indices (never 0, all distinct)
    in display order; column_permutation is the single permutation shared by
    every row.  The ensemble is fully reproducible from (n_pixels, m_pairs,
    seed) alone.
    """

    pairs: list[PatternPair]
    n_pixels: int
    source_rows: np.ndarray
    column_permutation: np.ndarray
    seed: int

    def __post_init__(self):
        self.source_rows = np.asarray(self.source_rows, dtype=np.int64)
        self.column_permutation = np.asarray(self.column_permutation, dtype=np.int64)
        if len(self.pairs) != len(self.source_rows):
            raise ParameterError("one source row per pattern pair required")
        if len(set(self.source_rows.tolist())) != len(self.source_rows):
            raise ParameterError("source rows must be distinct")
        if (self.source_rows == 0).any():
            raise ParameterError("the all-ones Hadamard row 0 is excluded")
        if sorted(self.column_permutation.tolist()) != list(range(self.n_pixels)):
            raise ParameterError("column_permutation must permute 0..N-1")

    @property
    def m_pairs(self) -> int:
        return len(self.pairs)

    def pattern_matrix(self, kind: str) -> np.ndarray:
        """Stack pattern rows into an M x N 0/1 matrix; kind is 'pos' or 'neg'."""
        if kind not in ("pos", "neg"):
            raise ParameterError(f"pattern kind must be 'pos' or 'neg', got {kind!r}")
        return np.stack([getattr(p, kind) for p in self.pairs])


def build_ensemble(n_pixels: int, m_pairs: int, seed: int) -> SensingEnsemble:
    """Draw m_pairs complementary pattern pairs over n_pixels pixels.

    Row selection is uniform without replacement over Hadamard rows 1..N-1;
    one column permutation is drawn afterwards and applied to every row.
    The +-1 rows map to patterns via pos = (1+h)/2, neg = (1-h)/2.
    Deterministic given the seed (rows drawn first, then the permutation).
    """
    if not _is_pow2(n_pixels) or n_pixels < 2:
        raise ParameterError(f"n_pixels must be a power of 2 >= 2, got {n_pixels}")
    if not 1 <= m_pairs <= n_pixels - 1:
        raise ParameterError(
            f"m_pairs must be in [1, {n_pixels - 1}] for N={n_pixels}, got {m_pairs}"
        )
    rng = np.random.default_rng(seed)
    rows = rng.permutation(np.arange(1, n_pixels))[:m_pairs]
    perm = rng.permutation(n_pixels)
    h = hadamard(n_pixels)[rows][:, perm]
    pairs = [PatternPair(pos=(1 + hr) // 2, neg=(1 - hr) // 2) for hr in h]
    return SensingEnsemble(pairs=pairs, n_pixels=n_pixels, source_rows=rows,
                           column_permutation=perm, seed=seed)


def differential_matrix(ensemble: SensingEnsemble) -> np.ndarray:
    """M x N difference matrix pos - neg; entries +-1, rows mutually orthogonal."""
    return ensemble.pattern_matrix("pos") - ensemble.pattern_matrix("neg")


def save_ensemble(ensemble: SensingEnsemble, path) -> None:
    """Serialize the ensemble header (JSON).  Patterns are not stored: they
    are reconstructed exactly from the row indices and column permutation."""
    doc = {
        "version": SERIAL_VERSION,
        "n_pixels": ensemble.n_pixels,
        "m_pairs": ensemble.m_pairs,
        "seed": ensemble.seed,
        "source_rows": ensemble.source_rows.tolist(),
        "column_permutation": ensemble.column_permutation.tolist(),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_ensemble(path) -> SensingEnsemble:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != SERIAL_VERSION:
        raise ParameterError(f"unsupported ensemble file version {doc.get('version')!r}")
    n = int(doc["n_pixels"])
    rows = np.asarray(doc["source_rows"], dtype=np.int64)
    perm = np.asarray(doc["column_permutation"], dtype=np.int64)
    h = hadamard(n)[rows][:, perm]
    pairs = [PatternPair(pos=(1 + hr) // 2, neg=(1 - hr) // 2) for hr in h]
    return SensingEnsemble(pairs=pairs, n_pixels=n, source_rows=rows,
                           column_permutation=perm, seed=int(doc["seed"]))
