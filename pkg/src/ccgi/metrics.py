"""Image-quality metrics.

cnr implements the threshold-partition contrast-to-noise ratio: the
absolute value of the image minimum is the threshold T_t, pixels at or
below T_t form the background, pixels above it the signal, and
CNR = (mean(signal) - mean(background)) / std(background) with the
population (divide-by-n) standard deviation.  The metric is reported as
defined: it is scale-invariant but deliberately not translation-invariant,
and it refuses images it cannot partition instead of redefining them.

rel_error is a scale-invariant reconstruction error: the reconstruction is
optimally rescaled onto the ground truth before the relative L2 distance
is taken, because the measurement calibration leaves an arbitrary global
scale on every reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePartitionError, ParameterError, UndefinedCnrError
from .scene import Phantom
from .solvers import ReconImage

CNR_CSV_HEADER = ["threshold", "n_signal", "n_background",
                  "mean_signal", "mean_background", "std_background", "cnr"]


@dataclass(eq=False)
class CnrReport:
    threshold: float
    n_signal: int
    n_background: int
    mean_signal: float
    mean_background: float
    std_background: float
    cnr: float

    def csv_row(self) -> tuple:
        """Field order matches CNR_CSV_HEADER."""
        return (self.threshold, self.n_signal, self.n_background,
                self.mean_signal, self.mean_background, self.std_background, self.cnr)


def _values(image) -> np.ndarray:
    if isinstance(image, ReconImage):
        return image.ravel()
    return np.asarray(image, dtype=float).ravel()


def cnr(image) -> CnrReport:
    """Contrast-to-noise ratio with the |min|-threshold partition.

    Raises DegeneratePartitionError when no pixel exceeds the threshold
    (e.g. constant images) and UndefinedCnrError when the background has
    zero spread.
    """
    v = _values(image)
    if v.size < 2:
        raise DegeneratePartitionError("image must contain at least two pixels")
    threshold = abs(float(v.min()))
    background = v[v <= threshold]
    signal = v[v > threshold]
    if signal.size == 0:
        raise DegeneratePartitionError(
            "no pixel exceeds the threshold; cannot split signal from background"
        )
    std_b = float(background.std(ddof=0))
    if std_b == 0.0:
        raise UndefinedCnrError("background has zero standard deviation")
    return CnrReport(
        threshold=threshold,
        n_signal=int(signal.size),
        n_background=int(background.size),
        mean_signal=float(signal.mean()),
        mean_background=float(background.mean()),
        std_background=std_b,
        cnr=(float(signal.mean()) - float(background.mean())) / std_b,
    )


def rel_error(image, phantom: Phantom) -> float:
    """Relative L2 error after the optimal scaling of the reconstruction.

    Returns min over c of ||c*x - T|| / ||T|| with c = <x,T>/<x,x>
    (1.0 when x = 0).  Invariant under x -> c*x for any c != 0; equals 1
    for reconstructions orthogonal to the truth.
    """
    x = _values(image)
    t = phantom.ravel()
    if x.shape != t.shape:
        raise ParameterError(f"image has {x.size} pixels, phantom has {t.size}")
    t_norm = float(np.linalg.norm(t))
    if t_norm == 0.0:
        raise ParameterError("phantom is identically zero; relative error undefined")
    x_sq = float(x @ x)
    if x_sq == 0.0:
        return 1.0
    c = float(x @ t) / x_sq
    return float(np.linalg.norm(c * x - t)) / t_norm
