"""Centerline extraction, length normalization, and smooth polynomial fitting.

The centerline is the per-row midpoint of the mask's longest foreground run.
It is rescaled (both axes, same factor, so angles are preserved) to a fixed
cranio-caudal length and smoothed with a least-squares polynomial x = f(t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import CenterlineTooShort, FitFailed
from .mask_io import SpineMask

MIN_CENTERLINE_ROWS = 20
DEFAULT_NORMALIZED_LENGTH = 572.0
DEFAULT_MAX_DEGREE = 10


@dataclass(frozen=True)
class CenterlinePolyline:
    """Raw per-row centerline: t = row index (cranial -> caudal), x = lateral
    midpoint of the longest foreground run in that row (subpixel)."""

    t: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if self.t.shape != self.x.shape or self.t.ndim != 1:
            raise ValueError("t and x must be 1-D arrays of equal length")
        if len(self.t) >= 2 and not np.all(np.diff(self.t) > 0):
            raise ValueError("t must be strictly increasing")

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class NormalizedCenterline:
    """Centerline after affine remapping of t onto [0, length] and scaling of
    x by the same factor about its mean (aspect preserved).

    scale_factor, t_origin and x_center describe the forward transform
        t' = (t - t_origin) * scale_factor
        x' = x_center + (x - x_center) * scale_factor
    and are kept so overlay geometry can be mapped back to the source frame.
    """

    t: np.ndarray
    x: np.ndarray
    scale_factor: float
    t_origin: float
    x_center: float
    length: float

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class SpineCurve:
    """Polynomial x = f(t) = sum c_j t^j on [0, length], with exact analytic
    derivatives. coefficients[j] is c_j."""

    coefficients: np.ndarray
    length: float
    rms_residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        )
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("non-finite coefficients")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t):
        return npoly.polyval(t, self.coefficients)

    def derivative(self, order: int = 1) -> "SpineCurve":
        return curve_derivative(self, order)


def extract_centerline(mask: SpineMask) -> CenterlinePolyline:
    """Midpoint of the longest contiguous foreground run, per row.

    Rows without foreground are skipped. Among equal-length longest runs the
    leftmost wins. Fewer than MIN_CENTERLINE_ROWS usable rows is an error.
    """
    arr = mask.pixels
    h, w = arr.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = arr
    d = np.diff(padded, axis=1)
    srows, scols = np.nonzero(d == 1)  # run starts (inclusive)
    _, ecols = np.nonzero(d == -1)  # run ends (exclusive), paired in order
    if len(srows) == 0:
        raise CenterlineTooShort(f"{mask.source_id}: no foreground rows")
    lengths = ecols - scols
    # leftmost-longest run per row: order by (row, -length, start), keep first
    order = np.lexsort((scols, -lengths, srows))
    rows_sorted = srows[order]
    _, first_of_row = np.unique(rows_sorted, return_index=True)
    pick = order[first_of_row]
    t = srows[pick].astype(float)
    x = (scols[pick] + ecols[pick] - 1) / 2.0
    if len(t) < MIN_CENTERLINE_ROWS:
        raise CenterlineTooShort(
            f"{mask.source_id}: only {len(t)} usable rows "
            f"(minimum {MIN_CENTERLINE_ROWS})"
        )
    return CenterlinePolyline(t=t, x=x)


def normalize_centerline(
    line: CenterlinePolyline, normalized_length: float = DEFAULT_NORMALIZED_LENGTH
) -> NormalizedCenterline:
    """Remap t affinely so the span is exactly normalized_length; scale x by
    the same factor about the mean x.

    Already-normalized input maps through an exact identity (no rounding), so
    the operation is bitwise idempotent.
    """
    if len(line) < MIN_CENTERLINE_ROWS:
        raise CenterlineTooShort(
            f"need at least {MIN_CENTERLINE_ROWS} points, got {len(line)}"
        )
    t0 = float(line.t[0])
    span = float(line.t[-1]) - t0
    scale = normalized_length / span
    x_mean = float(line.x.mean())
    if scale == 1.0:
        t = line.t - t0
        x = line.x.copy()
    else:
        # (t - t0)/span * L pins the last point to exactly L
        t = ((line.t - t0) / span) * normalized_length
        x = x_mean + (line.x - x_mean) * scale
    return NormalizedCenterline(
        t=t,
        x=x,
        scale_factor=scale,
        t_origin=t0,
        x_center=x_mean,
        length=float(normalized_length),
    )


def fit_curve(
    line: NormalizedCenterline, max_degree: int = DEFAULT_MAX_DEGREE
) -> SpineCurve:
    """Least-squares polynomial of degree min(max_degree, n - 1).

    The solve runs on t/length in [0, 1] (SVD-based lstsq) to stay
    well-conditioned at degree 10; coefficients are reported in the
    [0, length] frame.
    """
    n = len(line)
    if n < 2:
        raise FitFailed(f"need at least 2 points to fit, got {n}")
    degree = min(max_degree, n - 1)
    length = line.length
    u = line.t / length
    vand = np.vander(u, degree + 1, increasing=True)
    coef_u, _, rank, _ = np.linalg.lstsq(vand, line.x, rcond=None)
    if rank < degree + 1 or not np.all(np.isfinite(coef_u)):
        raise FitFailed(f"rank-deficient solve (rank {rank} of {degree + 1})")
    fitted = vand @ coef_u
    rms = float(np.sqrt(np.mean((fitted - line.x) ** 2)))
    coefficients = coef_u / length ** np.arange(degree + 1)
    return SpineCurve(coefficients=coefficients, length=length, rms_residual=rms)


def curve_derivative(curve: SpineCurve, order: int = 1) -> SpineCurve:
    """Exact analytic polynomial derivative; degree drops by `order`."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    coeffs = npoly.polyder(curve.coefficients, m=order)
    if len(coeffs) == 0:
        coeffs = np.zeros(1)
    return SpineCurve(coefficients=coeffs, length=curve.length, rms_residual=0.0)
