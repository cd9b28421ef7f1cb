"""Synthetic spine masks with analytically known Cobb angles.

Each shape is a parametric lateral-offset function x = g(row). The mask is the
band of pixels within a horizontal half-width of g, which matches the
pipeline's per-row midpoint rule exactly and isolates fitting error from
rasterization error. The oracle applies the same breakpoint / tolerance-window
definitions as the pipeline but evaluates them on the exact generating
function with independent numerics (dense-grid bisection for roots, bounded
Brent for the |g'| extremum). It never touches the centerline or tilt code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import OutOfFrame
from .mask_io import SpineMask

LINE = "line"
ARC = "arc"
SINUSOID = "sinusoid"
DOUBLE_SINUSOID = "double_sinusoid"

ORACLE_GRID_POINTS = 10_000
ORACLE_ROOT_TOL = 1e-9

# acceptance grid: spans severity grades ~1-3
GRID_AMPLITUDES = (10.0, 20.0, 30.0, 45.0)
GRID_PERIODS = (400.0, 572.0, 800.0)
GRID_HALF_WIDTHS = (8.0, 12.0, 20.0)


@dataclass(frozen=True)
class SyntheticSpine:
    """Parametric spine shape. amplitude is the peak lateral deviation in
    pixels (for arcs, the sagitta); period is the sinusoid period in rows;
    slope and phase apply to the line and sinusoid families."""

    family: str = SINUSOID
    amplitude: float = 30.0
    period: float = 572.0
    slope: float = 0.0
    phase: float = 0.0
    amplitude2: float = 0.0
    period2: float = 300.0
    phase2: float = 0.0
    half_width: float = 12.0
    height: int = 0  # 0 -> family default (one period for sinusoids)
    width: int = 0  # 0 -> fits the band with a margin
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.family not in (LINE, ARC, SINUSOID, DOUBLE_SINUSOID):
            raise ValueError(f"unknown family {self.family!r}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def label(self) -> str:
        parts = [self.family, f"a{self.amplitude:g}"]
        if self.family in (SINUSOID, DOUBLE_SINUSOID):
            parts.append(f"p{self.period:g}")
        if self.family == DOUBLE_SINUSOID:
            parts.append(f"a{self.amplitude2:g}p{self.period2:g}")
        if self.family == LINE:
            parts.append(f"s{self.slope:g}")
        parts.append(f"w{self.half_width:g}")
        return "_".join(parts)


@dataclass(frozen=True)
class OracleTilt:
    t: float  # normalized position
    slope: float
    theta_deg: float


@dataclass(frozen=True)
class OracleRecord:
    """Ground truth computed from the generating function."""

    shape: SyntheticSpine
    breakpoints: tuple[tuple[float, str], ...]  # normalized (t, kind)
    tilt_points: tuple[OracleTilt, ...]
    cobb_angles_deg: tuple[float, ...]
    main_angle_deg: float

    def to_dict(self) -> dict:
        return {
            "params": {
                "family": self.shape.family,
                "amplitude": self.shape.amplitude,
                "period": self.shape.period,
                "slope": self.shape.slope,
                "phase": self.shape.phase,
                "amplitude2": self.shape.amplitude2,
                "period2": self.shape.period2,
                "phase2": self.shape.phase2,
                "half_width": self.shape.half_width,
                "height": self.shape.height,
                "width": self.shape.width,
            },
            "breakpoints": [{"t": t, "kind": kind} for t, kind in self.breakpoints],
            "tilt_points": [
                {"t": tp.t, "theta_deg": tp.theta_deg} for tp in self.tilt_points
            ],
            "cobb_angles_deg": list(self.cobb_angles_deg),
            "main_angle_deg": self.main_angle_deg,
        }


def _auto_height(shape: SyntheticSpine) -> int:
    if shape.height > 0:
        return shape.height
    if shape.family == SINUSOID:
        return int(round(shape.period))
    if shape.family == DOUBLE_SINUSOID:
        return int(round(max(shape.period, shape.period2)))
    return 572


def _deviation_funcs(shape: SyntheticSpine, height: int):
    """Lateral deviation d(row) about the band center and its derivative."""
    if shape.family == LINE:
        mid = (height - 1) / 2.0
        return (
            lambda t: shape.slope * (np.asarray(t, dtype=float) - mid),
            lambda t: shape.slope * np.ones_like(np.asarray(t, dtype=float)),
        )
    if shape.family == SINUSOID:
        w = 2.0 * math.pi / shape.period

        def dev(t):
            return shape.amplitude * np.sin(w * np.asarray(t, dtype=float) + shape.phase)

        def ddev(t):
            return shape.amplitude * w * np.cos(w * np.asarray(t, dtype=float) + shape.phase)

        return dev, ddev
    if shape.family == DOUBLE_SINUSOID:
        w1 = 2.0 * math.pi / shape.period
        w2 = 2.0 * math.pi / shape.period2

        def dev(t):
            t = np.asarray(t, dtype=float)
            return shape.amplitude * np.sin(w1 * t + shape.phase) + shape.amplitude2 * np.sin(
                w2 * t + shape.phase2
            )

        def ddev(t):
            t = np.asarray(t, dtype=float)
            return shape.amplitude * w1 * np.cos(w1 * t + shape.phase) + shape.amplitude2 * w2 * np.cos(
                w2 * t + shape.phase2
            )

        return dev, ddev
    # arc: circle through both band ends with sagitta = amplitude
    c = (height - 1) / 2.0
    radius = (shape.amplitude**2 + c**2) / (2.0 * shape.amplitude)
    base = math.sqrt(radius**2 - c**2)

    def dev(t):
        t = np.asarray(t, dtype=float)
        return np.sqrt(radius**2 - (t - c) ** 2) - base

    def ddev(t):
        t = np.asarray(t, dtype=float)
        return (c - t) / np.sqrt(radius**2 - (t - c) ** 2)

    return dev, ddev


def generating_function(shape: SyntheticSpine):
    """(g, g', height, width): the band center x = g(row) in raster
    coordinates, its derivative, and the raster dimensions."""
    height = _auto_height(shape)
    dev, ddev = _deviation_funcs(shape, height)
    rows = np.arange(height, dtype=float)
    d = dev(rows)
    extent = float(np.max(np.abs(d)))
    if shape.width > 0:
        width = shape.width
    else:
        width = int(math.ceil(2.0 * (extent + shape.half_width))) + 7
    cx = (width - 1) / 2.0

    def g(t):
        return cx + dev(t)

    return g, ddev, height, width


def generate(shape: SyntheticSpine, seed: int = 0) -> tuple[SpineMask, OracleRecord]:
    """Rasterize the band and compute its oracle.

    Per row, foreground is every column within half_width (horizontal
    distance) of g(row). An out-of-frame band is an error. noise_sigma > 0
    jitters the band center per row (the oracle stays noiseless).
    """
    g, _, height, width = generating_function(shape)
    rows = np.arange(height, dtype=float)
    centers = np.asarray(g(rows), dtype=float)
    if shape.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        centers = centers + rng.normal(0.0, shape.noise_sigma, size=height)
    if np.any(centers - shape.half_width < 0) or np.any(
        centers + shape.half_width > width - 1
    ):
        raise OutOfFrame(
            f"{shape.label}: band leaves the {width}x{height} frame"
        )
    cols = np.arange(width, dtype=float)
    pixels = np.abs(cols[None, :] - centers[:, None]) <= shape.half_width
    mask = SpineMask(pixels=pixels, source_id=shape.label)
    return mask, oracle_cobb(shape)


def _oracle_refine_root(f, lo: float, hi: float, tol: float = ORACLE_ROOT_TOL) -> float:
    f_lo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _oracle_split(lo: float, hi: float, max_interval: float) -> list[float]:
    if hi - lo <= max_interval:
        return []
    mid = 0.5 * (lo + hi)
    return (
        _oracle_split(lo, mid, max_interval)
        + [mid]
        + _oracle_split(mid, hi, max_interval)
    )


def oracle_cobb(
    shape: SyntheticSpine,
    normalized_length: float = 572.0,
    max_interval: float = 250.0,
    tolerance_fraction: float = 0.15,
) -> OracleRecord:
    """Exact measurement of the generating curve.

    Works in the normalized frame u = row * L / (height - 1). Uniform
    two-axis rescaling leaves slopes unchanged, so slope(u) = g'(u / k) and
    the window mean of the slope is (g(t_hi) - g(t_lo)) / (t_hi - t_lo).
    """
    g, gp, height, _ = generating_function(shape)
    k = normalized_length / (height - 1)

    def slope(u):
        return float(gp(u / k))

    # interior roots of the slope: dense sign scan + bisection to 1e-9
    grid = np.linspace(0.0, normalized_length, ORACLE_GRID_POINTS + 1)
    vals = np.asarray(gp(grid / k), dtype=float)
    roots: list[float] = []
    for i in range(len(grid) - 1):
        a, b = float(grid[i]), float(grid[i + 1])
        if vals[i] == 0.0:
            if 0.0 < a < normalized_length:
                roots.append(a)
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(_oracle_refine_root(slope, a, b))
    roots = [r for r in roots if 1.0 < r < normalized_length - 1.0]

    points = (
        [(0.0, "endpoint")]
        + [(r, "apex") for r in roots]
        + [(normalized_length, "endpoint")]
    )
    splits: list[tuple[float, str]] = []
    for (lo, _), (hi, _) in zip(points[:-1], points[1:]):
        splits.extend(
            (m, "midpoint_split") for m in _oracle_split(lo, hi, max_interval)
        )
    points = sorted(points + splits, key=lambda p: p[0])

    tilt_points: list[OracleTilt] = []
    for (lo, _), (hi, _) in zip(points[:-1], points[1:]):
        dense = np.linspace(lo, hi, 2001)
        mags = np.abs(np.asarray(gp(dense / k), dtype=float))
        i_best = int(np.argmax(mags))
        bracket_lo = dense[max(0, i_best - 1)]
        bracket_hi = dense[min(len(dense) - 1, i_best + 1)]
        if bracket_hi > bracket_lo:
            res = minimize_scalar(
                lambda u: -abs(slope(u)),
                bounds=(bracket_lo, bracket_hi),
                method="bounded",
                options={"xatol": 1e-10},
            )
            u_star = float(res.x) if -res.fun > mags[i_best] else float(dense[i_best])
        else:
            u_star = float(dense[i_best])

        half = 0.5 * tolerance_fraction * (hi - lo)
        w_lo = max(lo, u_star - half)
        w_hi = min(hi, u_star + half)
        if w_hi == w_lo:
            mean_slope = slope(u_star)
        else:
            mean_slope = (float(g(w_hi / k)) - float(g(w_lo / k))) / ((w_hi - w_lo) / k)
        tilt_points.append(
            OracleTilt(
                t=u_star,
                slope=slope(u_star),
                theta_deg=math.degrees(math.atan(mean_slope)),
            )
        )

    angles = tuple(
        abs(a.theta_deg - b.theta_deg)
        for a, b in zip(tilt_points[:-1], tilt_points[1:])
    )
    return OracleRecord(
        shape=shape,
        breakpoints=tuple(points),
        tilt_points=tuple(tilt_points),
        cobb_angles_deg=angles,
        main_angle_deg=max(angles) if angles else 0.0,
    )


def acceptance_grid() -> list[SyntheticSpine]:
    """The 36-configuration sinusoid grid used by the acceptance suite."""
    return [
        SyntheticSpine(
            family=SINUSOID, amplitude=a, period=p, half_width=w
        )
        for a in GRID_AMPLITUDES
        for p in GRID_PERIODS
        for w in GRID_HALF_WIDTHS
    ]
