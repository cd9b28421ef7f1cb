"""Binary spine-mask I/O, validation, and ROI cropping.

The mask is the input contract of the whole pipeline: any upstream segmenter
that emits an 8-bit single-channel raster (PNG or PGM, value > 0 = foreground)
plugs in here. Row 0 is the cranial end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import EmptyMask, MaskReadError, MultiChannelImage, TooSmall

# 8-connectivity structuring element for component labelling
_CONNECT_8 = np.ones((3, 3), dtype=bool)

DEFAULT_MIN_AREA = 100


@dataclass(eq=False)
class SpineMask:
    """Binary foreground of the spine region.

    pixels is a bool array of shape (height, width); True = foreground.
    Equality compares geometry only (dimensions + pixels), not source_id.
    """

    pixels: np.ndarray
    source_id: str = ""
    discarded_components: int = 0

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=bool)
        if self.pixels.ndim != 2 or self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise ValueError("mask must be a non-empty 2-D array")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def foreground_count(self) -> int:
        return int(self.pixels.sum())

    def __eq__(self, other):
        if not isinstance(other, SpineMask):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class RoiBox:
    """Tight bounding box of the foreground. bottom/right are exclusive
    (half-open, Python-slice convention), so height = bottom - top."""

    top: int
    left: int
    bottom: int
    right: int

    def __post_init__(self):
        if not (self.top < self.bottom and self.left < self.right):
            raise ValueError(f"degenerate box {self}")

    @property
    def height(self) -> int:
        return self.bottom - self.top

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def area(self) -> int:
        return self.height * self.width


def load_mask(path) -> SpineMask:
    """Read an 8-bit single-channel PNG or PGM into a SpineMask.

    Pixels strictly greater than 0 become foreground.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            arr = np.asarray(img)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise MaskReadError(f"cannot read {path}: {exc}") from exc
    if mode != "L":
        raise MultiChannelImage(
            f"{path}: expected 8-bit single-channel image, got mode {mode!r}"
        )
    fg = arr > 0
    if not fg.any():
        raise EmptyMask(f"{path}: no foreground pixels")
    return SpineMask(pixels=fg, source_id=path.stem)


def save_mask(mask: SpineMask, path) -> None:
    """Write foreground as 255 / background as 0. Suffix picks the format
    (.png or .pgm, the binary P5 flavor)."""
    path = Path(path)
    img = Image.fromarray(mask.pixels.astype(np.uint8) * 255, mode="L")
    img.save(path)


def validate_mask(mask: SpineMask, min_area: int = DEFAULT_MIN_AREA) -> SpineMask:
    """Keep the largest 8-connected component, dropping everything else.

    Ties on area go to the component containing the lexicographically
    smallest (row, col) pixel. Raises TooSmall if the winner is under
    min_area pixels.
    """
    if not mask.pixels.any():
        raise EmptyMask(f"{mask.source_id}: no foreground pixels")
    labels, n_components = ndimage.label(mask.pixels, structure=_CONNECT_8)
    counts = np.bincount(labels.ravel())
    counts[0] = 0
    best_area = int(counts.max())
    if best_area < min_area:
        raise TooSmall(
            f"{mask.source_id}: largest component has {best_area} px "
            f"(minimum {min_area})"
        )
    tied = np.flatnonzero(counts == best_area)
    if len(tied) == 1:
        keep = int(tied[0])
    else:
        # labels.ravel() is row-major, so the first flat index of a label is
        # its lexicographic (row, col) minimum
        flat = labels.ravel()
        keep = int(min(tied, key=lambda lb: int(np.flatnonzero(flat == lb)[0])))
    return SpineMask(
        pixels=labels == keep,
        source_id=mask.source_id,
        discarded_components=n_components - 1,
    )


def crop_to_roi(mask: SpineMask) -> tuple[SpineMask, RoiBox]:
    """Crop to the tight bounding box of the foreground."""
    rows = np.flatnonzero(mask.pixels.any(axis=1))
    cols = np.flatnonzero(mask.pixels.any(axis=0))
    if len(rows) == 0:
        raise EmptyMask(f"{mask.source_id}: no foreground pixels")
    box = RoiBox(
        top=int(rows[0]),
        left=int(cols[0]),
        bottom=int(rows[-1]) + 1,
        right=int(cols[-1]) + 1,
    )
    cropped = SpineMask(
        pixels=mask.pixels[box.top : box.bottom, box.left : box.right].copy(),
        source_id=mask.source_id,
        discarded_components=mask.discarded_components,
    )
    return cropped, box
