"""End-to-end detection pipeline and corpus evaluation."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
from scipy import ndimage

from .detection import Detection, accuracy, detect, tally
from .enhancement import ClaheParams, Order, enhance_pipeline
from .prep import (bbox_filter, binarize, class_means, connected_components,
                   median_filter, otsu_threshold)
from .raster import as_gray, histogram, invert_binary, to_grayscale
from .synthetic import SyntheticEggSpec, generate_synthetic_egg
from .watershed import distance_transform, flood

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    order: Order = Order.CLAHE_HE
    tiles_x: int = 8
    tiles_y: int = 8
    clip_factor: float = 10.0
    s_max: float = 4.0
    median_radius: int = 1
    threshold: Optional[int] = None
    # gray-level gap the Otsu classes of the egg interior must show
    min_contrast: float = 40.0
    bbox_min_area_fraction: float = 0.05
    filter_before_negation: bool = True
    min_fraction: float = 0.05
    dump_stages: bool = False
    out_dir: str = "out"

    def __post_init__(self):
        try:
            self.order = Order(self.order)
        except ValueError:
            raise ConfigError(f"unknown enhancement order {self.order!r}") from None
        self.validate()

    @property
    def clahe(self) -> ClaheParams:
        return ClaheParams(self.tiles_x, self.tiles_y, self.clip_factor, self.s_max)

    def validate(self):
        def number(name, lo=None, hi=None, integer=False):
            v = getattr(self, name)
            ok_type = (int,) if integer else (int, float)
            if isinstance(v, bool) or not isinstance(v, ok_type):
                raise ConfigError(f"{name} must be {'an integer' if integer else 'a number'}, got {v!r}")
            if (lo is not None and v < lo) or (hi is not None and v > hi):
                raise ConfigError(f"{name}={v} outside [{lo}, {hi}]")

        number("tiles_x", 1, integer=True)
        number("tiles_y", 1, integer=True)
        number("clip_factor", 0, 100)
        number("s_max", 1)
        number("median_radius", 0, integer=True)
        if self.threshold is not None:
            number("threshold", 0, 255, integer=True)
        number("min_contrast", 0, 255)
        number("bbox_min_area_fraction", 0, 1)
        number("min_fraction", 0, 1)
        for name in ("filter_before_negation", "dump_stages"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be a boolean")
        if not isinstance(self.out_dir, str) or not self.out_dir:
            raise ConfigError("out_dir must be a non-empty string")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["order"] = self.order.value
        return d


def egg_mask(gray) -> np.ndarray:
    """Largest Otsu-foreground component of the raw grayscale, holes filled."""
    gray = as_gray(gray)
    fg = binarize(gray, otsu_threshold(histogram(gray)))
    labels, regions = connected_components(fg)
    if not regions:
        return np.zeros_like(fg)
    biggest = max(regions, key=lambda r: (r.area, -r.label))
    return ndimage.binary_fill_holes(labels == biggest.label)


def embryo_threshold(gray, enhanced, egg, min_contrast: float) -> int:
    """Binarization level for the enhanced image.

    Otsu on the grayscale egg interior decides whether the egg holds a
    distinctly brighter population at all (its class means must differ by
    ``min_contrast`` gray levels) and how many pixels that population has.
    The returned level keeps at most that many egg pixels of ``enhanced``
    above it; 255 means no embryo candidate.
    """
    gh = histogram(gray, egg)
    if gh.sum() == 0:
        return 255
    t_gray = otsu_threshold(gh)
    lo, hi = class_means(gh, t_gray)
    if hi is None or hi - lo < min_contrast:
        return 255
    n_upper = int(gh[t_gray + 1:].sum())
    eh = histogram(enhanced, egg)
    above = int(eh.sum()) - np.cumsum(eh)
    return int(np.flatnonzero(above <= n_upper)[0])


@dataclass
class PipelineResult:
    detection: Detection
    threshold: int
    egg_mask: np.ndarray
    stages: dict = field(default_factory=dict)


def run(img, config: PipelineConfig = None) -> PipelineResult:
    """Run grayscale → enhancement → BW → filtering → watershed → decision.

    ``img`` is RGB ``(H, W, 3)`` or already gray ``(H, W)``. The watershed
    floods the filtered BW foreground; its negation (the background the
    distances are measured to) is kept as a stage.
    """
    config = config or PipelineConfig()
    arr = np.asarray(img)
    gray = to_grayscale(arr) if arr.ndim == 3 else as_gray(arr)
    egg = egg_mask(gray)
    if not egg.any():
        raise ValueError("no egg region")
    enhanced = enhance_pipeline(gray, config.order, config.clahe)
    denoised = median_filter(enhanced, config.median_radius)
    if config.threshold is not None:
        t = config.threshold
    else:
        t = embryo_threshold(gray, denoised, egg, config.min_contrast)
    bw = binarize(denoised, t) & egg
    if config.filter_before_negation:
        filtered = bbox_filter(bw, config.bbox_min_area_fraction)
        negated = invert_binary(filtered)
    else:
        negated = bbox_filter(invert_binary(bw), config.bbox_min_area_fraction)
        filtered = invert_binary(negated)
    dist = distance_transform(filtered)
    labels = flood(dist)
    det = detect(labels, egg, config.min_fraction)
    stages = {
        "gray": gray,
        "enhanced": enhanced,
        "denoised": denoised,
        "bw": bw,
        "filtered": filtered,
        "negated": negated,
        "distance": dist,
        "labels": labels,
    }
    return PipelineResult(det, t, egg, stages)


def _evaluate_one(args):
    index, spec, config = args
    record = {"index": index, "seed": spec.seed, "truth": spec.fertile}
    try:
        rgb, _, _ = generate_synthetic_egg(spec)
        res = run(rgb, config)
        record.update(predicted=res.detection.fertile, threshold=res.threshold,
                      num_regions=res.detection.num_regions,
                      embryo_area_fraction=round(res.detection.embryo_area_fraction, 6),
                      error=None)
    except Exception as exc:  # noqa: BLE001 - a failed image is a misclassification
        log.warning("image %d (seed %d) failed: %s", index, spec.seed, exc)
        record.update(predicted=not spec.fertile, threshold=None, num_regions=0,
                      embryo_area_fraction=0.0, error=str(exc))
    return record


def evaluate_corpus(specs, config: PipelineConfig = None, jobs: int = 1):
    """Run the pipeline on every spec; returns ``(matrix, accuracy, records)``.

    Images that raise are recorded with their error and counted as
    misclassified. Accumulation is order-independent, so ``jobs > 1`` gives
    the same result as a serial run.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("empty corpus")
    config = config or PipelineConfig()
    work = [(i, s, config) for i, s in enumerate(specs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_evaluate_one, work))
    else:
        records = [_evaluate_one(w) for w in work]
    cm = tally((r["truth"], r["predicted"]) for r in records)
    return cm, accuracy(cm), records

