"""Pair-sum normalization of measurement vectors.

Because complementary patterns sum to the all-ones pattern, each pair sum
S_m sees the full object flux regardless of the displayed pattern: S_m is a
measurement-independent probe of the instantaneous efficiency.  Dividing a
pair's counts by S_m and rescaling by the campaign mean C-bar = mean(S)
cancels any per-pair multiplicative drift exactly, leaving a single global
factor (the mean drift), to which all solvers are equivariant.

The difference vector is formed after normalization; that is the only
order in which the cancellation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMeasurementError
from .photonsim import MeasurementRecord


@dataclass(eq=False)
class MeasurementVectors:
    """The three solver inputs derived from one record.

    delta = c_pos - c_neg elementwise; c_bar is the mean pair sum of the
    source data (after normalization every pair sum equals c_bar).
    """

    c_pos: np.ndarray
    c_neg: np.ndarray
    delta: np.ndarray
    c_bar: float
    normalized: bool

    def __post_init__(self):
        self.c_pos = np.asarray(self.c_pos, dtype=float)
        self.c_neg = np.asarray(self.c_neg, dtype=float)
        self.delta = np.asarray(self.delta, dtype=float)

    @property
    def m_pairs(self) -> int:
        return self.c_pos.shape[0]


def _pair_counts(measurements) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(measurements, (MeasurementRecord, MeasurementVectors)):
        return (np.asarray(measurements.c_pos, dtype=float),
                np.asarray(measurements.c_neg, dtype=float))
    raise TypeError(f"expected a MeasurementRecord or MeasurementVectors, got {type(measurements)!r}")


def raw_vectors(measurements) -> MeasurementVectors:
    """Pass counts through unchanged and form the difference vector."""
    c_pos, c_neg = _pair_counts(measurements)
    s = c_pos + c_neg
    return MeasurementVectors(c_pos=c_pos.copy(), c_neg=c_neg.copy(),
                              delta=c_pos - c_neg, c_bar=float(s.mean()),
                              normalized=False)


def normalize(measurements) -> MeasurementVectors:
    """Normalize each pair by its sum, rescaled by the mean pair sum.

    c_pos_m -> (c_pos_m / S_m) * C-bar (likewise c_neg), with
    C-bar = mean(S); delta is recomputed from the normalized counts.
    Idempotent: after one pass all pair sums equal C-bar exactly.
    """
    c_pos, c_neg = _pair_counts(measurements)
    s = c_pos + c_neg
    zero = np.flatnonzero(s == 0.0)
    if zero.size:
        raise DegenerateMeasurementError(
            f"pair sum S_m is zero at pair index {zero[0]}; cannot normalize"
        )
    c_bar = float(s.mean())
    factor = c_bar / s
    pos = c_pos * factor
    neg = c_neg * factor
    return MeasurementVectors(c_pos=pos, c_neg=neg, delta=pos - neg,
                              c_bar=c_bar, normalized=True)
