"""Exact Euclidean distance transform and flooding watershed.

Label maps are ``int32`` arrays: 0 is background, 1..K are catchment
basins and :data:`WS` marks watershed-line pixels.
"""

import colorsys
from dataclasses import dataclass

import numpy as np

from .raster import as_binary

WS = -1

# 8-neighbourhood offsets as (dy, dx)
_NEIGHBOURS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True)
class DistanceMap:
    """Squared Euclidean distances to the nearest background pixel.

    ``squared`` holds exact integers; :attr:`values` applies the root.
    """

    squared: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.sqrt(self.squared.astype(np.float64))

    @property
    def shape(self):
        return self.squared.shape

    @property
    def foreground(self) -> np.ndarray:
        return self.squared > 0


def _column_distances(bw):
    """Vertical distance from every pixel to the nearest background in its column."""
    h, w = bw.shape
    inf = h + w + 1
    g = np.empty((h, w), dtype=np.int64)
    g[0] = np.where(bw[0], inf, 0)
    for y in range(1, h):
        g[y] = np.where(bw[y], g[y - 1] + 1, 0)
    for y in range(h - 2, -1, -1):
        g[y] = np.minimum(g[y], g[y + 1] + 1)
    return np.minimum(g, inf)


def distance_transform(img, max_chunk=1 << 22) -> DistanceMap:
    """Exact Euclidean distance transform of a binary image.

    Two separable passes: a column scan gives the vertical offset to the
    nearest background in each column, then every row takes
    ``min_i (x - i)^2 + g(i)^2``. All arithmetic is on integers.
    """
    bw = as_binary(img)
    if bw.all():
        raise ValueError("no background reference")
    h, w = bw.shape
    g2 = _column_distances(bw) ** 2
    dx2 = (np.arange(w)[:, None] - np.arange(w)[None, :]) ** 2  # [x, i]
    out = np.empty((h, w), dtype=np.int64)
    rows = max(1, max_chunk // (w * w))
    for y0 in range(0, h, rows):
        block = g2[y0:y0 + rows]  # [r, i]
        out[y0:y0 + rows] = (block[:, None, :] + dx2[None, :, :]).min(axis=2)
    out[~bw] = 0
    return DistanceMap(out)


def topography(dist: DistanceMap) -> np.ndarray:
    """Elevation ``max(D) - D`` over the foreground, 0 elsewhere."""
    d = dist.values
    fg = dist.foreground
    out = np.zeros_like(d)
    if fg.any():
        out[fg] = d.max() - d[fg]
    return out


def flood_levels(dist: DistanceMap) -> np.ndarray:
    """Distinct squared distances in flooding order (ascending elevation)."""
    sq = dist.squared
    return np.unique(sq[sq > 0])[::-1]


def flood(dist: DistanceMap) -> np.ndarray:
    """Flood the distance topography level by level from the blob interiors.

    Foreground pixels are visited in ascending elevation (descending
    distance), row-major within a level. A pixel touching no basin seeds a
    new one, touching exactly one joins it, touching two or more becomes a
    watershed-line pixel. Line pixels never propagate a label.
    """
    sq = dist.squared
    h, w = sq.shape
    # one-pixel border of zeros keeps neighbour lookups in bounds
    lab = np.zeros((h + 2, w + 2), dtype=np.int32)
    stride = w + 2
    offsets = [dy * stride + dx for dy, dx in _NEIGHBOURS]

    flat = sq.ravel()
    fg = np.flatnonzero(flat > 0)
    # primary key: descending distance; ties keep row-major order
    order = fg[np.lexsort((fg, -flat[fg]))]
    padded_idx = (order // w + 1) * stride + (order % w + 1)

    out = lab.ravel().tolist()
    next_label = 1
    for p in padded_idx.tolist():
        seen = 0
        merged = False
        for off in offsets:
            v = out[p + off]
            if v > 0:
                if seen == 0:
                    seen = v
                elif v != seen:
                    merged = True
                    break
        if merged:
            out[p] = WS
        elif seen:
            out[p] = seen
        else:
            out[p] = next_label
            next_label += 1
    lab = np.array(out, dtype=np.int32).reshape(h + 2, w + 2)
    return lab[1:-1, 1:-1].copy()


def basin_count(labels) -> int:
    labels = np.asarray(labels)
    return int(labels.max()) if labels.size and labels.max() > 0 else 0


def label_summary(labels) -> dict:
    labels = np.asarray(labels)
    k = basin_count(labels)
    areas = np.bincount(labels[labels > 0].ravel(), minlength=k + 1)[1:]
    return {
        "num_basins": k,
        "ws_pixel_count": int((labels == WS).sum()),
        "basin_areas": [int(a) for a in areas],
    }


_GOLDEN = 0.6180339887498949


def label_color(k: int):
    """Fixed RGB colour for basin ``k`` (golden-ratio hue sequence)."""
    hue = (k * _GOLDEN) % 1.0
    sat = (0.55, 0.8, 1.0)[k % 3]
    val = (0.95, 0.75)[(k // 3) % 2]
    r, g, b = colorsys.hsv_to_rgb(hue, sat, val)
    return int(round(r * 255)), int(round(g * 255)), int(round(b * 255))


def colorize_labels(labels) -> np.ndarray:
    """Render a label map: background black, watershed lines white."""
    labels = np.asarray(labels)
    k = basin_count(labels)
    palette = np.zeros((k + 1, 3), dtype=np.uint8)
    for i in range(1, k + 1):
        palette[i] = label_color(i)
    rgb = palette[np.clip(labels, 0, None)]
    rgb[labels == WS] = 255
    return rgb


def labels_to_pgm16(labels) -> np.ndarray:
    """16-bit encoding for PGM export; watershed lines become 65535."""
    labels = np.asarray(labels)
    if basin_count(labels) >= 65535:
        raise ValueError("too many basins for a 16-bit label image")
    out = labels.astype(np.int64)
    out[labels == WS] = 65535
    return out.astype(np.uint16)


def labels_from_pgm16(arr) -> np.ndarray:
    arr = np.asarray(arr).astype(np.int64)
    out = arr.astype(np.int32)
    out[arr == 65535] = WS
    return out


class InvariantError(RuntimeError):
    pass


def check_label_map(labels, foreground):
    """Raise :class:`InvariantError` unless ``labels`` is a valid flooding of ``foreground``.

    Checks conservation (labelled pixels are exactly the foreground) and
    that every watershed pixel touches at least two distinct basins.
    """
    labels = np.asarray(labels)
    fg = as_binary(foreground)
    if not np.array_equal(labels != 0, fg):
        raise InvariantError("labelled pixels differ from the foreground")
    padded = np.pad(labels, 1)
    for y, x in zip(*np.nonzero(labels == WS)):
        window = padded[y:y + 3, x:x + 3]
        if np.unique(window[window > 0]).size < 2:
            raise InvariantError(f"watershed pixel ({x}, {y}) touches fewer than 2 basins")
