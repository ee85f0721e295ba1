"""Histogram equalization, CLAHE and their compositions."""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .raster import LEVELS, as_gray, histogram


def equalization_map(hist) -> np.ndarray:
    """Cumulative-distribution lookup table for a 256-bin histogram.

    ``mapping[k] = round_half_up(255 * cdf[k] / total)``, computed with
    integers so the rounding is exact.
    """
    h = np.asarray(hist, dtype=np.int64)
    if h.shape != (LEVELS,):
        raise ValueError(f"histogram must have {LEVELS} bins")
    total = int(h.sum())
    if total <= 0:
        raise ValueError("empty histogram")
    cdf = np.cumsum(h)
    # round(a / b) half up == (2a + b) // 2b for non-negative integers
    mapping = (2 * (LEVELS - 1) * cdf + total) // (2 * total)
    return mapping.astype(np.uint8)


def equalize(img) -> np.ndarray:
    gray = as_gray(img)
    return equalization_map(histogram(gray))[gray]


@dataclass(frozen=True)
class ClaheParams:
    """Tiling and clip-limit parameters for :func:`clahe`.

    ``clip_factor`` is the percentage ``a`` in [0, 100]; ``s_max`` caps the
    slope of the tile mapping. Defaults: 8x8 tiles, a = 10, s_max = 4.
    """

    tiles_x: int = 8
    tiles_y: int = 8
    clip_factor: float = 10.0
    s_max: float = 4.0

    def __post_init__(self):
        for name in ("tiles_x", "tiles_y"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
        if not 0 <= self.clip_factor <= 100:
            raise ValueError(f"clip_factor must lie in [0, 100], got {self.clip_factor}")
        if not self.s_max >= 1:
            raise ValueError(f"s_max must be >= 1, got {self.s_max}")


def clip_limit(params: ClaheParams, tile_pixels: int, levels: int = LEVELS) -> float:
    """Per-bin ceiling ``M/N * (1 + a/100 * (s_max - 1))``."""
    if tile_pixels < 1:
        raise ValueError("tile must contain at least one pixel")
    return tile_pixels / levels * (1 + params.clip_factor / 100 * (params.s_max - 1))


def effective_clip(params: ClaheParams, tile_pixels: int) -> int:
    return max(1, math.floor(clip_limit(params, tile_pixels)))


def clip_histogram(hist, clip: int) -> np.ndarray:
    """Clip every bin at ``clip`` and spread the excess over all bins once.

    The excess is split evenly; the ``excess % 256`` leftover counts go one
    each to evenly strided bins, so the total is preserved and no bin grows
    by more than ``ceil(excess / 256)``.
    """
    h = np.asarray(hist, dtype=np.int64)
    excess = int(np.maximum(h - clip, 0).sum())
    out = np.minimum(h, clip)
    base, rem = divmod(excess, LEVELS)
    out += base
    if rem:
        step = LEVELS // rem
        out[np.arange(rem) * step] += 1
    return out


def _tile_bounds(n, tiles):
    return np.array([(i * n) // tiles for i in range(tiles + 1)], dtype=np.int64)


def _axis_weights(n, bounds):
    """Neighbouring tile indices and interpolation weight along one axis."""
    tiles = len(bounds) - 1
    centers = (bounds[:-1] + bounds[1:] - 1) / 2.0
    pos = np.arange(n, dtype=np.float64)
    hi = np.searchsorted(centers, pos, side="right")
    lo = np.clip(hi - 1, 0, tiles - 1)
    hi = np.clip(hi, 0, tiles - 1)
    span = centers[hi] - centers[lo]
    w = np.zeros(n)
    inner = hi != lo
    w[inner] = (pos[inner] - centers[lo[inner]]) / span[inner]
    return lo, hi, w


def clahe_maps(img, params: ClaheParams) -> np.ndarray:
    """Per-tile clipped equalization maps, shape ``(tiles_y, tiles_x, 256)``."""
    gray = as_gray(img)
    h, w = gray.shape
    if params.tiles_x > w or params.tiles_y > h:
        raise ValueError("degenerate tiling")
    ys = _tile_bounds(h, params.tiles_y)
    xs = _tile_bounds(w, params.tiles_x)
    maps = np.empty((params.tiles_y, params.tiles_x, LEVELS), dtype=np.uint8)
    for ty in range(params.tiles_y):
        for tx in range(params.tiles_x):
            tile = gray[ys[ty]:ys[ty + 1], xs[tx]:xs[tx + 1]]
            hist = histogram(tile)
            clipped = clip_histogram(hist, effective_clip(params, tile.size))
            maps[ty, tx] = equalization_map(clipped)
    return maps


def clahe(img, params: ClaheParams = ClaheParams()) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization.

    Each pixel is bilinearly interpolated between the maps of the four
    nearest tile centers; beyond the outermost centers the nearest map is
    extended, so borders interpolate along one axis and corners use a
    single map.
    """
    gray = as_gray(img)
    h, w = gray.shape
    maps = clahe_maps(gray, params).astype(np.float64)
    y0, y1, wy = _axis_weights(h, _tile_bounds(h, params.tiles_y))
    x0, x1, wx = _axis_weights(w, _tile_bounds(w, params.tiles_x))

    v = gray.astype(np.intp)
    Y0, Y1, WY = y0[:, None], y1[:, None], wy[:, None]
    X0, X1, WX = x0[None, :], x1[None, :], wx[None, :]
    top = (1 - WX) * maps[Y0, X0, v] + WX * maps[Y0, X1, v]
    bottom = (1 - WX) * maps[Y1, X0, v] + WX * maps[Y1, X1, v]
    out = np.floor((1 - WY) * top + WY * bottom + 0.5)
    return np.clip(out, 0, 255).astype(np.uint8)


class Order(str, enum.Enum):
    CLAHE_HE = "clahe-he"
    HE_CLAHE = "he-clahe"
    HE_ONLY = "he"
    CLAHE_ONLY = "clahe"


def enhance_pipeline(img, order=Order.CLAHE_HE, params: ClaheParams = ClaheParams()) -> np.ndarray:
    """Apply HE and/or CLAHE in the requested order."""
    order = Order(order)
    gray = as_gray(img)
    if order is Order.CLAHE_HE:
        return equalize(clahe(gray, params))
    if order is Order.HE_CLAHE:
        return clahe(equalize(gray), params)
    if order is Order.HE_ONLY:
        return equalize(gray)
    return clahe(gray, params)
