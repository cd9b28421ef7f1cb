"""Breakpoint partitioning of the spine curve and most-tilted-point search.

Breakpoints are the apexes of the curve (interior roots of f', the points of
maximal lateral deviation) plus the domain endpoints; intervals that stay too
long without an apex are bisected recursively. Within each interval the most
tilted point is the argmax of |f'|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .centerline import SpineCurve

ENDPOINT = "endpoint"
APEX = "apex"
MIDPOINT_SPLIT = "midpoint_split"

DEFAULT_MAX_INTERVAL = 250.0
DEFAULT_SLOPE_EPS = 1e-6
DEFAULT_GRID_STEP = 0.5

ROOT_T_TOL = 1e-6  # bisection stop for apex roots
ROOT_MERGE_DIST = 1.0  # near-duplicate roots within 1 px merge
REFINE_T_TOL = 1e-4  # golden-section stop for the |f'| argmax

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Breakpoint:
    t: float
    kind: str  # ENDPOINT | APEX | MIDPOINT_SPLIT


@dataclass(frozen=True)
class BreakpointSet:
    breakpoints: tuple[Breakpoint, ...]

    def positions(self) -> list[float]:
        return [b.t for b in self.breakpoints]

    def intervals(self) -> list[tuple[float, float]]:
        pos = self.positions()
        return list(zip(pos[:-1], pos[1:]))

    def __len__(self):
        return len(self.breakpoints)


@dataclass(frozen=True)
class TiltPoint:
    """Location of maximal |f'| within one breakpoint interval."""

    t_star: float
    slope: float
    interval: tuple[float, float]


def _bisect_root(f, lo: float, hi: float, tol: float = ROOT_T_TOL) -> float:
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


def _merge_close(values: list[float], min_dist: float) -> list[float]:
    """Collapse runs of values closer than min_dist to their mean."""
    if not values:
        return []
    merged = []
    cluster = [values[0]]
    for v in values[1:]:
        if v - cluster[-1] < min_dist:
            cluster.append(v)
        else:
            merged.append(sum(cluster) / len(cluster))
            cluster = [v]
    merged.append(sum(cluster) / len(cluster))
    return merged


def _split_long(lo: float, hi: float, max_interval: float) -> list[float]:
    if hi - lo <= max_interval:
        return []
    mid = 0.5 * (lo + hi)
    return _split_long(lo, mid, max_interval) + [mid] + _split_long(mid, hi, max_interval)


def find_breakpoints(
    curve: SpineCurve,
    max_interval: float = DEFAULT_MAX_INTERVAL,
    slope_eps: float = DEFAULT_SLOPE_EPS,
) -> BreakpointSet:
    """Partition [0, length] at the apexes of the curve.

    Interior roots of f' are located by a sign-change scan on a 1-px grid,
    refined by bisection to |dt| < 1e-6; roots within 1 px of each other (or
    of an endpoint) are merged. Any remaining interval longer than
    max_interval is bisected recursively at its midpoint.
    """
    fp = curve.derivative(1)
    length = curve.length
    grid = np.arange(0.0, length, 1.0)
    grid = np.append(grid, length)
    vals = np.asarray(fp(grid), dtype=float)
    # slopes inside the dead zone carry no sign: a numerically flat fit
    # (straight spine) must not sprout noise apexes
    signs = np.where(np.abs(vals) < slope_eps, 0.0, np.sign(vals))

    roots: list[float] = []
    for k in range(len(grid) - 1):
        s_a, s_b = signs[k], signs[k + 1]
        if s_a == 0.0:
            # grid point already at an apex; counts when the sign flips across it
            if 0 < k and signs[k - 1] * s_b < 0.0:
                roots.append(float(grid[k]))
            continue
        if s_a * s_b < 0.0:
            roots.append(_bisect_root(fp, float(grid[k]), float(grid[k + 1])))

    roots = _merge_close(sorted(roots), ROOT_MERGE_DIST)
    # roots hugging an endpoint merge into it (avoids sliver intervals)
    roots = [r for r in roots if ROOT_MERGE_DIST < r < length - ROOT_MERGE_DIST]

    points = [(0.0, ENDPOINT)] + [(r, APEX) for r in roots] + [(length, ENDPOINT)]
    splits: list[tuple[float, str]] = []
    for (lo, _), (hi, _) in zip(points[:-1], points[1:]):
        splits.extend((m, MIDPOINT_SPLIT) for m in _split_long(lo, hi, max_interval))
    points = sorted(points + splits, key=lambda p: p[0])
    return BreakpointSet(tuple(Breakpoint(t=t, kind=kind) for t, kind in points))


def _golden_max(f, lo: float, hi: float, tol: float = REFINE_T_TOL) -> float:
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    f_c, f_d = f(c), f(d)
    while hi - lo > tol:
        if f_c > f_d:
            hi, d, f_d = d, c, f_c
            c = hi - _INV_PHI * (hi - lo)
            f_c = f(c)
        else:
            lo, c, f_c = c, d, f_d
            d = lo + _INV_PHI * (hi - lo)
            f_d = f(d)
    return 0.5 * (lo + hi)


def find_most_tilted(
    curve: SpineCurve,
    interval: tuple[float, float],
    grid_step: float = DEFAULT_GRID_STEP,
) -> TiltPoint:
    """Argmax of |f'| over the closed interval.

    Grid scan at grid_step, then golden-section refinement to |dt| < 1e-4.
    The refined point only replaces the grid winner when strictly better, so
    ties resolve toward smaller t exactly.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"empty interval {interval}")
    fp = curve.derivative(1)
    grid = np.arange(lo, hi, grid_step)
    grid = np.append(grid, hi)
    vals = np.abs(np.asarray(fp(grid), dtype=float))
    best = int(np.argmax(vals))  # first max -> smallest t
    t_best, v_best = float(grid[best]), float(vals[best])

    a = max(lo, t_best - grid_step)
    b = min(hi, t_best + grid_step)
    if b > a:
        t_ref = _golden_max(lambda t: abs(float(fp(t))), a, b)
        if abs(float(fp(t_ref))) > v_best:
            t_best = t_ref
    return TiltPoint(t_star=t_best, slope=float(fp(t_best)), interval=(lo, hi))
