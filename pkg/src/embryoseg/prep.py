"""Noise removal, binarization and bounding-box region filtering."""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .raster import LEVELS, as_binary, as_gray


@dataclass(frozen=True)
class Region:
    label: int
    area: int
    bbox: tuple  # (min_x, min_y, max_x, max_y), inclusive

    @property
    def bbox_area(self) -> int:
        x0, y0, x1, y1 = self.bbox
        return (x1 - x0 + 1) * (y1 - y0 + 1)


def median_filter(img, radius: int = 1) -> np.ndarray:
    """Median over the ``(2r+1)^2`` window with edge replication."""
    gray = as_gray(img)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return gray.copy()
    k = 2 * radius + 1
    padded = np.pad(gray, radius, mode="edge")
    windows = sliding_window_view(padded, (k, k)).reshape(gray.shape + (k * k,))
    # k*k is odd, so the middle order statistic is the exact median
    mid = (k * k) // 2
    return np.partition(windows, mid, axis=-1)[..., mid].astype(np.uint8)


def otsu_threshold(hist) -> int:
    """Smallest level maximizing the between-class variance of ``{<= t}`` vs ``{> t}``.

    Candidates are compared exactly with integer arithmetic: the variance is
    proportional to ``(S0*w1 - S1*w0)^2 / (w0*w1)``. A histogram with a
    single occupied level returns that level.
    """
    h = [int(v) for v in np.asarray(hist).ravel()]
    if len(h) != LEVELS:
        raise ValueError(f"histogram must have {LEVELS} bins")
    n = sum(h)
    if n <= 0:
        raise ValueError("empty histogram")
    s_total = sum(i * c for i, c in enumerate(h))
    w0 = s0 = 0
    best_t, best_num, best_den = None, 0, 1
    for t in range(LEVELS):
        w0 += h[t]
        s0 += t * h[t]
        w1 = n - w0
        if w0 == 0 or w1 == 0:
            continue
        num = (s0 * w1 - (s_total - s0) * w0) ** 2
        den = w0 * w1
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    if best_t is None:
        return next(i for i, c in enumerate(h) if c)
    return best_t


def class_means(hist, t: int):
    """Mean level of the ``<= t`` and ``> t`` classes (``None`` for an empty class)."""
    h = np.asarray(hist, dtype=np.int64)
    levels = np.arange(LEVELS)
    lo, hi = h[:t + 1], h[t + 1:]
    mean_lo = float((lo * levels[:t + 1]).sum() / lo.sum()) if lo.sum() else None
    mean_hi = float((hi * levels[t + 1:]).sum() / hi.sum()) if hi.sum() else None
    return mean_lo, mean_hi


def binarize(img, t: int) -> np.ndarray:
    if not 0 <= t <= 255:
        raise ValueError(f"threshold must lie in [0, 255], got {t}")
    return as_gray(img) > t


_EIGHT = np.ones((3, 3), dtype=bool)


def connected_components(img):
    """8-connected foreground labeling.

    Returns ``(labels, regions)``; labels run 1..K in the order components
    are first met by a row-major scan, background is 0.
    """
    bw = as_binary(img)
    raw, k = ndimage.label(bw, structure=_EIGHT)
    labels = np.zeros(bw.shape, dtype=np.int32)
    if k == 0:
        return labels, []
    flat = raw.ravel()
    ids, first = np.unique(flat, return_index=True)
    keep = ids != 0
    ids, first = ids[keep], first[keep]
    order = ids[np.argsort(first)]
    remap = np.zeros(k + 1, dtype=np.int32)
    remap[order] = np.arange(1, k + 1, dtype=np.int32)
    labels = remap[raw]

    areas = np.bincount(labels.ravel(), minlength=k + 1)
    regions = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        ys, xs = sl
        regions.append(Region(lab, int(areas[lab]), (xs.start, ys.start, xs.stop - 1, ys.stop - 1)))
    return labels, regions


def bbox_filter(img, min_area_fraction: float = 0.05) -> np.ndarray:
    """Erase components whose bbox area is below a fraction of the largest bbox area."""
    if not 0 <= min_area_fraction <= 1:
        raise ValueError("min_area_fraction must lie in [0, 1]")
    bw = as_binary(img)
    labels, regions = connected_components(bw)
    if not regions:
        return np.zeros_like(bw)
    largest = max(r.bbox_area for r in regions)
    keep = np.zeros(len(regions) + 1, dtype=bool)
    for r in regions:
        keep[r.label] = r.bbox_area >= min_area_fraction * largest
    return keep[labels]
