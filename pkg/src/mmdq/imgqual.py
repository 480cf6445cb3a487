"""Per-image quality factors and their comprehensive average.

Six bounded factors are scored on decoded pixels: resolution, brightness,
contrast, sharpness, color constancy, and embedded-text amount (from OCR
sidecar lengths). Each factor maps to [0, 1]; the per-image quality score is
the arithmetic mean over the enabled factors. All functions are pure: the
same PNG bytes always produce bit-identical scores.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import InconsistentLMax, UndecodableImage, ZeroPixelImage

FACTORS = ("resolution", "brightness", "contrast", "sharpness", "color_constancy", "ocr_text")

# BT.601 luma weights
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


@dataclass(frozen=True)
class LumaPlane:
    """Grayscale view of a decoded image; values row-major in [0, 255]."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ZeroPixelImage(f"{self.width}x{self.height} image")
        if self.values.shape != (self.height, self.width):
            raise ZeroPixelImage(
                f"luma shape {self.values.shape} != {(self.height, self.width)}"
            )


@dataclass(frozen=True)
class ImageQualityConfig:
    """Thresholds and factor selection for image-quality scoring.

    t_r:        short-side pixel count below which resolution is penalized
    t_text:     OCR character count above which embedded text is penalized
    t_contrast: luma standard deviation that earns a full contrast score
    t_sharp:    Laplacian-response variance that earns a full sharpness score
    t_cc:       relative channel-mean deviation that zeroes color constancy
    """

    t_r: int = 200
    t_text: int = 200
    t_contrast: float = 40.0
    t_sharp: float = 100.0
    t_cc: float = 0.6
    enabled_factors: frozenset[str] = field(default_factory=lambda: frozenset(FACTORS))

    def __post_init__(self):
        object.__setattr__(self, "enabled_factors", frozenset(self.enabled_factors))
        unknown = self.enabled_factors - set(FACTORS)
        if unknown:
            raise ValueError(f"unknown factors: {sorted(unknown)}")
        if not self.enabled_factors:
            raise ValueError("enabled_factors must be nonempty")
        if self.t_r <= 0 or self.t_contrast <= 0 or self.t_sharp <= 0 or self.t_cc <= 0:
            raise ValueError("thresholds must be strictly positive")
        if self.t_text < 0:
            raise ValueError("t_text must be nonnegative")


@dataclass(frozen=True)
class ImageQualityReport:
    """Scores per enabled factor plus their arithmetic mean ``w_image``."""

    per_factor: dict[str, float]
    w_image: float


def decode_luma(data: bytes) -> tuple[LumaPlane, tuple[float, float, float]]:
    """Decode PNG or JPEG bytes to a BT.601 luma plane and RGB channel means."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise UndecodableImage(str(exc)) from None
    if rgb.size == 0:
        raise ZeroPixelImage("decoded image has no pixels")
    height, width = rgb.shape[0], rgb.shape[1]
    luma = _LUMA_R * rgb[:, :, 0] + _LUMA_G * rgb[:, :, 1] + _LUMA_B * rgb[:, :, 2]
    means = tuple(float(m) for m in rgb.reshape(-1, 3).mean(axis=0))
    return LumaPlane(width=width, height=height, values=luma), means


def resolution_score(width: int, height: int, t_r: int) -> float:
    """Full score above the short-side threshold, proportional below it."""
    if width < 1 or height < 1:
        raise ZeroPixelImage(f"{width}x{height} image")
    q = min(width, height)
    return 1.0 if q > t_r else q / t_r


def ocr_text_score(length: int, t_text: int, l_max: int) -> float:
    """Penalize images whose OCR text exceeds ``t_text`` characters.

    Short (or absent) embedded text scores 1; beyond the threshold the score
    falls with the text length relative to the corpus maximum ``l_max``.
    """
    if length < 0:
        raise InconsistentLMax(f"negative OCR length {length}")
    if length <= t_text:
        return 1.0
    if length > l_max:
        raise InconsistentLMax(f"OCR length {length} exceeds corpus maximum {l_max}")
    return 1.0 - length / l_max


def brightness_score(luma: LumaPlane) -> float:
    """1 at mid-gray mean luma, falling linearly toward 0 at either extreme."""
    m = float(luma.values.mean())
    return 1.0 - abs(m - 127.5) / 127.5


def contrast_score(luma: LumaPlane, t_contrast: float) -> float:
    """Population standard deviation of luma, saturating at ``t_contrast``."""
    sigma = float(luma.values.std())
    return min(1.0, sigma / t_contrast)


def laplacian_response(luma: LumaPlane) -> np.ndarray:
    """3x3 Laplacian of the luma plane with replicate border handling."""
    p = np.pad(luma.values, 1, mode="edge")
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * p[1:-1, 1:-1]


def sharpness_score(luma: LumaPlane, t_sharp: float) -> float:
    """Variance of the Laplacian response, saturating at ``t_sharp``."""
    var = float(laplacian_response(luma).var())
    return min(1.0, var / t_sharp)


def color_constancy_score(channel_means: tuple[float, float, float], t_cc: float) -> float:
    """Gray-world deviation: spread of channel means relative to the largest."""
    mu_max = max(channel_means)
    mu_min = min(channel_means)
    d = (mu_max - mu_min) / max(mu_max, 1e-9)
    return 1.0 - min(1.0, d / t_cc)


def image_quality(
    data: bytes, ocr_length: int, l_max: int, config: ImageQualityConfig | None = None
) -> ImageQualityReport:
    """Score one image on every enabled factor and average the results."""
    cfg = config or ImageQualityConfig()
    luma, means = decode_luma(data)
    scores: dict[str, float] = {}
    for factor in FACTORS:  # canonical order keeps the mean bit-stable
        if factor not in cfg.enabled_factors:
            continue
        if factor == "resolution":
            scores[factor] = resolution_score(luma.width, luma.height, cfg.t_r)
        elif factor == "brightness":
            scores[factor] = brightness_score(luma)
        elif factor == "contrast":
            scores[factor] = contrast_score(luma, cfg.t_contrast)
        elif factor == "sharpness":
            scores[factor] = sharpness_score(luma, cfg.t_sharp)
        elif factor == "color_constancy":
            scores[factor] = color_constancy_score(means, cfg.t_cc)
        else:
            scores[factor] = ocr_text_score(ocr_length, cfg.t_text, l_max)
    w_image = float(sum(scores.values()) / len(scores))
    return ImageQualityReport(per_factor=scores, w_image=w_image)
