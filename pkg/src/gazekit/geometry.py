"""Eye-region geometry: band extraction from face boxes, soft mask rasters,
edit-locality verification between a photo and its edited twin, and the
16-multiple resize arithmetic used by the inpainting stage.

Rasters are numpy uint8 arrays shaped (h, w) or (h, w, channels).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.ndimage import convolve1d

# Inpainting prompt carried as sidecar metadata only; generation happens
# outside this package.
INPAINT_PROMPT = (
    "eyes looking to the side, avoiding eye contact, natural eye movement, "
    "same person, photorealistic"
)


class DegenerateBBox(ValueError):
    pass


class EmptyBand(ValueError):
    pass


class ZeroDimension(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def round_half_up(value: float) -> int:
    # Exact halves round up; banker's rounding would send .5 to even.
    return math.floor(value + 0.5)


@dataclass(frozen=True)
class FaceBBox:
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    def validate(self) -> "FaceBBox":
        if self.width <= 0 or self.height <= 0:
            raise DegenerateBBox(f"non-positive extent: {self}")
        return self


@dataclass(frozen=True)
class MaskRect:
    """Inclusive pixel rectangle: rows row_lo..row_hi, cols col_lo..col_hi."""

    row_lo: int
    row_hi: int
    col_lo: int
    col_hi: int

    @property
    def n_rows(self) -> int:
        return self.row_hi - self.row_lo + 1

    @property
    def n_cols(self) -> int:
        return self.col_hi - self.col_lo + 1


def eye_region_band(bbox: FaceBBox, image_w: int, image_h: int) -> MaskRect:
    """Band covering rows 25%..55% of the face height, with columns inset 5%
    of the face width from each side; bounds rounded half-up, inclusive,
    clamped to the image."""
    bbox.validate()
    if image_w < 1 or image_h < 1:
        raise ZeroDimension(f"image {image_w}x{image_h}")
    h, w = bbox.height, bbox.width
    row_lo = round_half_up(bbox.y_min + 0.25 * h)
    row_hi = round_half_up(bbox.y_min + 0.55 * h)
    col_lo = round_half_up(bbox.x_min + 0.05 * w)
    col_hi = round_half_up(bbox.x_max - 0.05 * w)
    row_lo, row_hi = max(row_lo, 0), min(row_hi, image_h - 1)
    col_lo, col_hi = max(col_lo, 0), min(col_hi, image_w - 1)
    if row_lo > row_hi or col_lo > col_hi:
        raise EmptyBand(f"band for {bbox} falls outside the {image_w}x{image_h} image")
    return MaskRect(row_lo, row_hi, col_lo, col_hi)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    half = math.ceil(3 * sigma)
    xs = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(xs**2) / (2 * sigma**2))
    return k / k.sum()


def rasterize_soft_mask(
    rect: MaskRect, image_w: int, image_h: int, blur_radius: int = 3
) -> np.ndarray:
    """255-inside/0-outside rect, Gaussian-softened with sigma = blur_radius.

    The kernel is renormalized against the image border (divide by the blurred
    all-ones raster), so a rect far from the border keeps its mass exactly.
    """
    if image_w < 1 or image_h < 1:
        raise ZeroDimension(f"image {image_w}x{image_h}")
    hard = np.zeros((image_h, image_w), dtype=np.float64)
    hard[rect.row_lo : rect.row_hi + 1, rect.col_lo : rect.col_hi + 1] = 255.0
    if blur_radius == 0:
        return hard.astype(np.uint8)
    kernel = _gaussian_kernel(float(blur_radius))
    blurred = convolve1d(hard, kernel, axis=0, mode="constant", cval=0.0)
    blurred = convolve1d(blurred, kernel, axis=1, mode="constant", cval=0.0)
    ones = np.ones_like(hard)
    norm = convolve1d(ones, kernel, axis=0, mode="constant", cval=0.0)
    norm = convolve1d(norm, kernel, axis=1, mode="constant", cval=0.0)
    soft = blurred / norm
    return np.clip(np.rint(soft), 0, 255).astype(np.uint8)


def flux_resize_dims(width: int, height: int, max_size: int = 1024) -> tuple[int, int]:
    """Scale the long side to max_size, then floor both sides to multiples
    of 16 (truncating int cast, as the generation stack does)."""
    if width <= 0 or height <= 0:
        raise ZeroDimension(f"input {width}x{height}")
    ratio = max_size / max(width, height)
    new_w = (int(width * ratio) // 16) * 16
    new_h = (int(height * ratio) // 16) * 16
    if new_w == 0 or new_h == 0:
        raise ZeroDimension(f"{width}x{height} collapses to {new_w}x{new_h}")
    return new_w, new_h


@dataclass(frozen=True)
class IntegrityReport:
    passed: bool
    max_outside_diff: int
    violating_pixel_count: int


def pair_integrity(
    real: np.ndarray,
    fake: np.ndarray,
    rect: MaskRect,
    dilation: int = 9,
    tolerance: int = 2,
) -> IntegrityReport:
    """Check that an edit stayed local: outside rect dilated by `dilation`
    pixels, per-channel differences must not exceed `tolerance`."""
    if real.shape != fake.shape:
        raise DimensionMismatch(f"{real.shape} vs {fake.shape}")
    h, w = real.shape[:2]
    allowed = np.zeros((h, w), dtype=bool)
    allowed[
        max(rect.row_lo - dilation, 0) : rect.row_hi + dilation + 1,
        max(rect.col_lo - dilation, 0) : rect.col_hi + dilation + 1,
    ] = True
    diff = np.abs(real.astype(np.int64) - fake.astype(np.int64))
    if diff.ndim == 3:
        diff = diff.max(axis=2)
    outside = diff[~allowed]
    max_outside = int(outside.max()) if outside.size else 0
    violating = int((outside > tolerance).sum())
    return IntegrityReport(
        passed=max_outside <= tolerance,
        max_outside_diff=max_outside,
        violating_pixel_count=violating,
    )


def load_raster(path: str) -> np.ndarray:
    return np.asarray(Image.open(path)).astype(np.uint8)


def save_mask_png(mask: np.ndarray, path: str) -> None:
    if mask.ndim != 2 or mask.dtype != np.uint8:
        raise DimensionMismatch("masks are single-channel uint8")
    Image.fromarray(mask, mode="L").save(path, format="PNG")
