"""Vertebral directions, Cobb angles, severity grading, and the end-to-end
measurement pipeline.

A vertebral direction is the arctangent of the mean slope of the fitted curve
over a tolerance window around the most tilted point (window length = a fixed
fraction of the interval). The Cobb angle between two such directions equals
the classical endplate construction, because the angle between two lines is
the angle between their perpendiculars.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass

from .centerline import (
    NormalizedCenterline,
    SpineCurve,
    extract_centerline,
    fit_curve,
    normalize_centerline,
)
from .config import PipelineConfig
from .errors import CobbmeterError, InvalidAngle, NoAngleMeasurable, PipelineError
from .mask_io import RoiBox, SpineMask, crop_to_roi, validate_mask
from .tilt import BreakpointSet, TiltPoint, find_breakpoints, find_most_tilted

DEFAULT_TOLERANCE_FRACTION = 0.15

SEVERITY_THRESHOLDS = (10.0, 25.0, 45.0, 60.0)


@dataclass(frozen=True)
class DirectionAngle:
    """Deviation of the spine axis from the image vertical, in degrees,
    strictly inside (-90, 90). window is the (t_lo, t_hi) averaging range."""

    theta: float
    window: tuple[float, float]


@dataclass(frozen=True)
class EndVertebra:
    """End vertebra of a Cobb measurement: the most tilted point of an
    interval together with its direction."""

    tilt: TiltPoint
    direction: DirectionAngle


@dataclass
class CobbMeasurement:
    angle: float  # degrees, |upper.theta - lower.theta|
    upper: EndVertebra  # more cranial
    lower: EndVertebra
    is_main: bool = False


@dataclass(frozen=True)
class SeverityGrade:
    level: int
    thresholds: tuple[float, float, float, float] = SEVERITY_THRESHOLDS


@dataclass(frozen=True)
class CenterlineSummary:
    """Fit summary plus the frame transform needed to map normalized
    coordinates back onto the source raster."""

    n_points: int
    rms_residual: float
    scale_factor: float
    t_origin: float
    x_center: float
    curve: SpineCurve


@dataclass
class CaseResult:
    source_id: str
    source_width: int
    source_height: int
    roi: RoiBox
    centerline: CenterlineSummary
    breakpoints: BreakpointSet
    vertebrae: list[EndVertebra]
    measurements: list[CobbMeasurement]
    main_angle: float
    grade: SeverityGrade
    config: PipelineConfig

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "main_angle_deg": self.main_angle,
            "grade": self.grade.level,
            "measurements": [
                {
                    "angle_deg": m.angle,
                    "upper": {"t": m.upper.tilt.t_star, "theta_deg": m.upper.direction.theta},
                    "lower": {"t": m.lower.tilt.t_star, "theta_deg": m.lower.direction.theta},
                    "is_main": m.is_main,
                }
                for m in self.measurements
            ],
            "breakpoints": [
                {"t": b.t, "kind": b.kind} for b in self.breakpoints.breakpoints
            ],
            "config": self.config.to_dict(),
            "centerline": {
                "n_points": self.centerline.n_points,
                "degree": self.centerline.curve.degree,
                "rms_residual": self.centerline.rms_residual,
                "scale_factor": self.centerline.scale_factor,
            },
        }


def vertebra_direction(
    curve: SpineCurve,
    tp: TiltPoint,
    tolerance_fraction: float = DEFAULT_TOLERANCE_FRACTION,
) -> DirectionAngle:
    """Direction from the mean slope over the tolerance window.

    The window is tolerance_fraction of the interval length, centered on the
    tilt point and clipped to the interval. The mean of f' over [lo, hi] is
    exactly (f(hi) - f(lo)) / (hi - lo); a degenerate window falls back to the
    pointwise slope.
    """
    t_lo, t_hi = tp.interval
    half = 0.5 * tolerance_fraction * (t_hi - t_lo)
    w_lo = max(t_lo, tp.t_star - half)
    w_hi = min(t_hi, tp.t_star + half)
    if w_hi == w_lo:
        mean_slope = tp.slope
    else:
        mean_slope = (float(curve(w_hi)) - float(curve(w_lo))) / (w_hi - w_lo)
    return DirectionAngle(theta=math.degrees(math.atan(mean_slope)), window=(w_lo, w_hi))


def measure_cobb_angles(
    curve: SpineCurve,
    tilt_points: list[TiltPoint],
    tolerance_fraction: float = DEFAULT_TOLERANCE_FRACTION,
) -> list[CobbMeasurement]:
    """One Cobb angle per adjacent pair of tilt points, cranial to caudal."""
    if len(tilt_points) < 2:
        raise NoAngleMeasurable(
            f"need at least 2 tilt points, got {len(tilt_points)}"
        )
    vertebrae = [
        EndVertebra(tilt=tp, direction=vertebra_direction(curve, tp, tolerance_fraction))
        for tp in tilt_points
    ]
    return [
        CobbMeasurement(
            angle=abs(upper.direction.theta - lower.direction.theta),
            upper=upper,
            lower=lower,
        )
        for upper, lower in zip(vertebrae[:-1], vertebrae[1:])
    ]


def main_cobb(measurements: list[CobbMeasurement]) -> CobbMeasurement:
    """Flag and return the largest Cobb angle; ties go to the more cranial
    pair. Exactly one measurement ends up with is_main set."""
    if not measurements:
        raise NoAngleMeasurable("no measurements")
    best = max(measurements, key=lambda m: m.angle)  # max keeps the first tie
    for m in measurements:
        m.is_main = m is best
    return best


def grade_severity(angle: float) -> SeverityGrade:
    """Severity level 0-4 from thresholds 10/25/45/60 degrees, boundaries
    lower-inclusive (an angle of exactly 10 already counts as scoliosis)."""
    if not math.isfinite(angle) or angle < 0:
        raise InvalidAngle(f"angle must be finite and >= 0, got {angle!r}")
    level = 0
    for threshold in SEVERITY_THRESHOLDS:
        if angle >= threshold:
            level += 1
    return SeverityGrade(level=level)


@contextmanager
def _stage(stage_name: str):
    """Re-raise unexpected exceptions tagged with the failing stage."""
    try:
        yield
    except CobbmeterError:
        raise
    except Exception as exc:
        raise PipelineError(stage_name, f"{stage_name}: {exc}") from exc


def measure_image(mask: SpineMask, config: PipelineConfig | None = None) -> CaseResult:
    """Run the full geometric pipeline on a loaded mask.

    validate -> crop -> extract -> normalize -> fit -> breakpoints ->
    tilt points -> directions -> Cobb angles -> main angle -> grade.
    Deterministic: the same mask and config give a bit-identical result.
    """
    cfg = config if config is not None else PipelineConfig()
    source_height, source_width = mask.pixels.shape

    with _stage("mask_io"):
        valid = validate_mask(mask, min_area=cfg.min_component_area)
        cropped, roi = crop_to_roi(valid)
    with _stage("centerline"):
        raw_line = extract_centerline(cropped)
        line: NormalizedCenterline = normalize_centerline(
            raw_line, normalized_length=cfg.normalized_length
        )
        curve = fit_curve(line, max_degree=cfg.max_degree)
    with _stage("tilt_finder"):
        breakpoints = find_breakpoints(
            curve, max_interval=cfg.max_interval, slope_eps=cfg.slope_eps
        )
        tilt_points = [
            find_most_tilted(curve, interval, grid_step=cfg.grid_step)
            for interval in breakpoints.intervals()
        ]
    with _stage("cobb"):
        measurements = measure_cobb_angles(
            curve, tilt_points, tolerance_fraction=cfg.tolerance_fraction
        )
        main = main_cobb(measurements)
        grade = grade_severity(main.angle)

    vertebrae = [m.upper for m in measurements] + [measurements[-1].lower]
    return CaseResult(
        source_id=mask.source_id,
        source_width=source_width,
        source_height=source_height,
        roi=roi,
        centerline=CenterlineSummary(
            n_points=len(line),
            rms_residual=curve.rms_residual,
            scale_factor=line.scale_factor,
            t_origin=line.t_origin,
            x_center=line.x_center,
            curve=curve,
        ),
        breakpoints=breakpoints,
        vertebrae=vertebrae,
        measurements=measurements,
        main_angle=main.angle,
        grade=grade,
        config=cfg,
    )
