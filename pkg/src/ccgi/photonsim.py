"""Forward model: coincidence counts for each displayed pattern.

The expected coincidence count for a pattern A and object transmission T is
proportional to sum_n A_n * T_n.  Calibration is object-referenced: the
all-ones pattern yields exactly fullwhite_rate * integration_s expected
counts (the full-white rate is what a counter measures with the object in
the beam), so

    lambda = rate * t * (sum_n A_n T_n) / (sum_n T_n) + background * t.

Detector efficiency drifts slowly (temperature); the drift model multiplies
expected counts by a positive factor g combining a sinusoid, a geometric
random walk and a constant gain, clamped below at 0.05.  Shot noise makes
the recorded counts Poisson draws around g * lambda.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .ioutil import write_csv
from .scene import Phantom
from .sensing import SensingEnsemble

G_FLOOR = 0.05

RECORD_CSV_HEADER = ["pair_index", "c_pos", "c_neg", "s", "g_true_pos", "g_true_neg"]


@dataclass(eq=False)
class NoiseConfig:
    """Counting statistics of one measurement campaign.

    fullwhite_rate: coincidence counts per second with the all-ones pattern
    displayed and the object in place.  background_rate adds accidental
    coincidences per second to every frame.
    """

    fullwhite_rate: float = 400.0
    integration_s: float = 10.0
    shot_noise: bool = True
    background_rate: float = 0.0

    def __post_init__(self):
        if self.fullwhite_rate <= 0:
            raise ParameterError(f"fullwhite_rate must be positive, got {self.fullwhite_rate}")
        if self.integration_s <= 0:
            raise ParameterError(f"integration_s must be positive, got {self.integration_s}")
        if self.background_rate < 0:
            raise ParameterError(f"background_rate must be >= 0, got {self.background_rate}")


@dataclass(eq=False)
class DriftModel:
    """Multiplicative efficiency drift over the measurement sequence.

    g(m) = max(gain * (1 + sine_amplitude * sin(2*pi*m/sine_period)) * walk(m), 0.05)

    where walk is a geometric random walk with per-step log-std walk_sigma.
    Indices are in measurement-pair units; with per_frame set, the two
    frames of a pair get distinct factors (frame index advances by half a
    pair) instead of sharing one.
    """

    sine_amplitude: float = 0.10
    sine_period: float = 200.0
    walk_sigma: float = 0.002
    seed: int = 0
    per_frame: bool = False
    gain: float = 1.0

    def __post_init__(self):
        if self.sine_period <= 0:
            raise ParameterError(f"sine_period must be positive, got {self.sine_period}")
        if self.walk_sigma < 0:
            raise ParameterError(f"walk_sigma must be >= 0, got {self.walk_sigma}")
        if self.gain <= 0:
            raise ParameterError(f"gain must be positive, got {self.gain}")


def drift_factors(model: DriftModel | None, m_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    """Realize drift factors for m_pairs pattern pairs.

    Returns (g_pos, g_neg); the two are identical unless per_frame is set.
    Deterministic given model.seed; factors are always >= 0.05.
    """
    if model is None:
        g = np.ones(m_pairs)
        return g, g.copy()
    rng = np.random.default_rng(model.seed)
    if model.per_frame:
        steps = rng.normal(0.0, model.walk_sigma, size=2 * m_pairs)
        walk = np.exp(np.cumsum(steps))
        idx = np.arange(2 * m_pairs) / 2.0
    else:
        steps = rng.normal(0.0, model.walk_sigma, size=m_pairs)
        walk = np.exp(np.cumsum(steps))
        idx = np.arange(m_pairs, dtype=float)
    sine = 1.0 + model.sine_amplitude * np.sin(2.0 * np.pi * idx / model.sine_period)
    g = np.maximum(model.gain * sine * walk, G_FLOOR)
    if model.per_frame:
        return g[0::2].copy(), g[1::2].copy()
    return g, g.copy()


@dataclass(eq=False)
class MeasurementRecord:
    """Per-pair coincidence counts and their provenance.

    c_pos/c_neg are integer-valued when shot noise was on, exact reals
    otherwise; s is always c_pos + c_neg.  g_pos/g_neg are the realized
    drift factors (oracle data, only available because this is a
    simulation).
    """

    c_pos: np.ndarray
    c_neg: np.ndarray
    s: np.ndarray
    g_pos: np.ndarray
    g_neg: np.ndarray
    noise: NoiseConfig
    drift: DriftModel | None
    seed: int

    def __post_init__(self):
        for name in ("c_pos", "c_neg", "s", "g_pos", "g_neg"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        m = self.c_pos.shape[0]
        if not all(getattr(self, n).shape == (m,) for n in ("c_neg", "s", "g_pos", "g_neg")):
            raise ParameterError("record vectors must share one length")
        if (self.c_pos < 0).any() or (self.c_neg < 0).any():
            raise ParameterError("counts must be non-negative")
        if not np.array_equal(self.s, self.c_pos + self.c_neg):
            raise ParameterError("pair sums must equal c_pos + c_neg")

    @property
    def m_pairs(self) -> int:
        return self.c_pos.shape[0]


def expected_counts(pattern: np.ndarray, phantom: Phantom, cfg: NoiseConfig) -> float:
    """Expected coincidence counts for one displayed pattern (drift-free)."""
    pattern = np.asarray(pattern, dtype=float).ravel()
    if pattern.shape[0] != phantom.n_pixels:
        raise ParameterError(
            f"pattern has {pattern.shape[0]} pixels, phantom has {phantom.n_pixels}"
        )
    total = phantom.ravel().sum()
    if total == 0.0:
        raise ParameterError("phantom is fully opaque; full-white calibration undefined")
    signal = cfg.fullwhite_rate * cfg.integration_s * float(pattern @ phantom.ravel()) / total
    return signal + cfg.background_rate * cfg.integration_s


def simulate_record(
    ensemble: SensingEnsemble,
    phantom: Phantom,
    cfg: NoiseConfig,
    drift: DriftModel | None,
    seed: int,
) -> MeasurementRecord:
    """Simulate the coincidence counts of one full measurement campaign.

    For each pair the positive and complementary patterns produce expected
    counts lambda+- which are scaled by the pair's drift factors; with shot
    noise on, counts are Poisson draws (all positive frames drawn first,
    then all complementary frames).  Deterministic given (seed, drift.seed).
    """
    if ensemble.n_pixels != phantom.n_pixels:
        raise ParameterError(
            f"ensemble covers {ensemble.n_pixels} pixels but phantom has {phantom.n_pixels}"
        )
    t = phantom.ravel()
    total = t.sum()
    if total == 0.0:
        raise ParameterError("phantom is fully opaque; full-white calibration undefined")
    scale = cfg.fullwhite_rate * cfg.integration_s / total
    offset = cfg.background_rate * cfg.integration_s
    lam_pos = scale * (ensemble.pattern_matrix("pos") @ t) + offset
    lam_neg = scale * (ensemble.pattern_matrix("neg") @ t) + offset
    g_pos, g_neg = drift_factors(drift, ensemble.m_pairs)
    if cfg.shot_noise:
        rng = np.random.default_rng(seed)
        c_pos = rng.poisson(g_pos * lam_pos).astype(float)
        c_neg = rng.poisson(g_neg * lam_neg).astype(float)
    else:
        c_pos = g_pos * lam_pos
        c_neg = g_neg * lam_neg
    return MeasurementRecord(c_pos=c_pos, c_neg=c_neg, s=c_pos + c_neg,
                             g_pos=g_pos, g_neg=g_neg,
                             noise=cfg, drift=drift, seed=seed)


def save_record_csv(record: MeasurementRecord, path) -> None:
    """Export a record as CSV.  The g_true_* columns are simulation oracle
    data (the realized drift factors); they have no measured counterpart."""
    rows = [
        (m, record.c_pos[m], record.c_neg[m], record.s[m], record.g_pos[m], record.g_neg[m])
        for m in range(record.m_pairs)
    ]
    write_csv(Path(path), RECORD_CSV_HEADER, rows)
