"""Exception hierarchy. Every error carries a stable code and the pipeline
stage it belongs to, so batch tooling can report failures per case."""


class CobbmeterError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"
    stage = "pipeline"


# ---------------------------------------------------------------------------
# mask_io
# ---------------------------------------------------------------------------

class MaskReadError(CobbmeterError):
    code = "unreadable_file"
    stage = "mask_io"


class MultiChannelImage(CobbmeterError):
    code = "multi_channel_image"
    stage = "mask_io"


class EmptyMask(CobbmeterError):
    code = "empty_mask"
    stage = "mask_io"


class TooSmall(CobbmeterError):
    code = "component_too_small"
    stage = "mask_io"


# ---------------------------------------------------------------------------
# centerline
# ---------------------------------------------------------------------------

class CenterlineTooShort(CobbmeterError):
    code = "centerline_too_short"
    stage = "centerline"


class FitFailed(CobbmeterError):
    code = "fit_failed"
    stage = "centerline"


# ---------------------------------------------------------------------------
# cobb
# ---------------------------------------------------------------------------

class NoAngleMeasurable(CobbmeterError):
    code = "no_angle_measurable"
    stage = "cobb"


class InvalidAngle(CobbmeterError):
    code = "invalid_angle"
    stage = "cobb"


class PipelineError(CobbmeterError):
    """Unexpected failure inside measure_image, tagged with the stage."""

    code = "pipeline_failure"

    def __init__(self, stage, message):
        super().__init__(message)
        self.stage = stage


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------

class ReaderTableError(CobbmeterError):
    code = "reader_table_parse"
    stage = "stats"


class MissingAlgorithmColumn(CobbmeterError):
    code = "missing_algorithm_column"
    stage = "stats"


class UndefinedCorrelation(CobbmeterError):
    code = "undefined_correlation"
    stage = "stats"


class UndefinedICC(CobbmeterError):
    code = "undefined_icc"
    stage = "stats"


class UndefinedKappa(CobbmeterError):
    code = "undefined_kappa"
    stage = "stats"


class UndefinedDice(CobbmeterError):
    code = "undefined_dice"
    stage = "stats"


# ---------------------------------------------------------------------------
# render / synth
# ---------------------------------------------------------------------------

class GeometryMismatch(CobbmeterError):
    code = "geometry_mismatch"
    stage = "render"


class OutOfFrame(CobbmeterError):
    code = "band_out_of_frame"
    stage = "synth"
