"""Object phantoms and imaging geometry.

The imaging arm obeys a thin-lens condition between the combined
crystal-to-modulator path (d1+d2) and the lens-to-object distance d3, with
transverse magnification beta = (d1+d2)/d3.  Object-plane dimensions are
mapped to the reconstruction grid through beta and the per-axis pixel
pitch; slit edges that fall inside a pixel are rendered by area weighting
so sub-pixel geometry (e.g. a 12.5-pixel slit separation) is representable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .pgm import DEFAULT_MAXVAL, read_pgm, write_pgm

LENS_RESIDUAL_TOL = 1e-9  # 1/mm


@dataclass(eq=False)
class OpticsGeometry:
    """Thin-lens geometry of the unfolded two-arm system (all lengths in mm).

    d12 is the combined source-to-modulator distance d1+d2; the split into
    d1 and d2 never enters the forward model and is not tracked.
    """

    f: float
    d3: float
    d12: float

    def __post_init__(self):
        if self.f <= 0 or self.d3 <= 0 or self.d12 <= 0:
            raise ParameterError("geometry distances must be positive")
        if abs(self.lens_residual) >= LENS_RESIDUAL_TOL:
            raise ParameterError(
                f"thin-lens equation violated: residual {self.lens_residual:.3e} 1/mm"
            )

    @property
    def magnification(self) -> float:
        return self.d12 / self.d3

    @property
    def lens_residual(self) -> float:
        """1/(d1+d2) + 1/d3 - 1/f, in 1/mm."""
        return 1.0 / self.d12 + 1.0 / self.d3 - 1.0 / self.f


def solve_geometry(f: float, beta: float) -> OpticsGeometry:
    """Solve the thin-lens system for focal length ``f`` (mm) and magnification ``beta``.

    Closed form: d3 = f*(1+beta)/beta and d12 = beta*d3, which satisfies
    1/d12 + 1/d3 = 1/f exactly.
    """
    if f <= 0:
        raise ParameterError(f"focal length must be positive, got {f}")
    if beta <= 0:
        raise ParameterError(f"magnification must be positive, got {beta}")
    d3 = f * (1.0 + beta) / beta
    return OpticsGeometry(f=f, d3=d3, d12=beta * d3)


@dataclass(eq=False)
class Phantom:
    """Discretized object transmission image on the reconstruction grid.

    values is a rows x cols grid of transmissions in [0, 1]; the pixel
    pitches are image-plane sizes in micrometres.  Flattening is row-major
    everywhere in the toolkit.
    """

    rows: int
    cols: int
    values: np.ndarray
    pixel_pitch_x: float
    pixel_pitch_y: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.rows, self.cols):
            raise ParameterError(
                f"phantom grid shape {self.values.shape} != ({self.rows}, {self.cols})"
            )
        if self.pixel_pitch_x <= 0 or self.pixel_pitch_y <= 0:
            raise ParameterError("pixel pitches must be positive")
        if self.values.min() < 0.0 or self.values.max() > 1.0:
            raise ParameterError("phantom transmissions must lie in [0, 1]")

    @property
    def n_pixels(self) -> int:
        return self.rows * self.cols

    def ravel(self) -> np.ndarray:
        return self.values.ravel()


def _merge_intervals(intervals):
    """Union of closed intervals, as a sorted list of disjoint (lo, hi)."""
    merged = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def make_double_slit(
    rows: int,
    cols: int,
    pitch_x: float,
    pitch_y: float,
    slit_width_obj: float,
    separation_obj: float,
    beta: float,
) -> Phantom:
    """Build a double-slit transmission phantom.

    slit_width_obj and separation_obj are object-plane sizes in micrometres
    (width of each slit, centre-to-centre separation); both are magnified by
    ``beta`` onto the image plane.  The slits are vertical full-height bands
    centred on the grid, separated along the pitch_x axis; columns cut by a
    slit edge get the covered area fraction, so the total transmission is
    exact for this axis-aligned geometry.
    """
    if rows < 1 or cols < 1:
        raise ParameterError("grid must have at least one row and column")
    if pitch_x <= 0 or pitch_y <= 0:
        raise ParameterError("pixel pitches must be positive")
    if beta <= 0:
        raise ParameterError(f"magnification must be positive, got {beta}")
    if slit_width_obj <= 0:
        raise ParameterError(f"slit width must be positive, got {slit_width_obj}")
    if separation_obj < 0:
        raise ParameterError(f"slit separation must be non-negative, got {separation_obj}")

    width = slit_width_obj * beta
    separation = separation_obj * beta
    grid_width = cols * pitch_x
    centre = grid_width / 2.0
    slit_centres = (centre - separation / 2.0, centre + separation / 2.0)
    intervals = [(c - width / 2.0, c + width / 2.0) for c in slit_centres]

    tol = 1e-9 * pitch_x
    lo = min(i[0] for i in intervals)
    hi = max(i[1] for i in intervals)
    if lo < -tol or hi > grid_width + tol:
        raise ParameterError(
            f"slit geometry [{lo:.3f}, {hi:.3f}] um exceeds grid width {grid_width:.3f} um"
        )

    coverage = np.zeros(cols)
    for lo, hi in _merge_intervals(intervals):
        for j in range(cols):
            left, right = j * pitch_x, (j + 1) * pitch_x
            overlap = min(right, hi) - max(left, lo)
            if overlap > 0:
                coverage[j] += overlap / pitch_x
    coverage = np.clip(coverage, 0.0, 1.0)

    values = np.tile(coverage, (rows, 1))
    return Phantom(rows=rows, cols=cols, values=values,
                   pixel_pitch_x=pitch_x, pixel_pitch_y=pitch_y)


def save_phantom_pgm(phantom: Phantom, path) -> None:
    """Export a phantom as plain PGM; transmissions map linearly onto [0, maxval]."""
    ints = np.rint(phantom.values * DEFAULT_MAXVAL).astype(np.int64)
    write_pgm(path, ints, DEFAULT_MAXVAL)


def load_phantom_pgm(path, pitch_x: float, pitch_y: float) -> Phantom:
    """Import a phantom written by save_phantom_pgm (quantized to 1/maxval)."""
    ints, maxval = read_pgm(path)
    rows, cols = ints.shape
    return Phantom(rows=rows, cols=cols, values=ints / maxval,
                   pixel_pitch_x=pitch_x, pixel_pitch_y=pitch_y)
