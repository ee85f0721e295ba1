"""Fertility decision from a label map and accuracy scoring."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .raster import as_binary


@dataclass(frozen=True)
class Detection:
    fertile: bool
    num_regions: int
    embryo_area_fraction: float
    label_map: np.ndarray

    def as_dict(self) -> dict:
        return {
            "fertile": self.fertile,
            "num_regions": self.num_regions,
            "embryo_area_fraction": round(self.embryo_area_fraction, 6),
        }


def detect(labels, egg_mask, min_fraction: float = 0.05) -> Detection:
    """Call an egg fertile when segmented pixels cover enough of it.

    Segmented pixels are basins plus watershed lines inside ``egg_mask``;
    ``num_regions`` counts the distinct basins present there. The ratio is
    compared exactly against the decimal value of ``min_fraction``.
    """
    labels = np.asarray(labels)
    egg = as_binary(egg_mask)
    if labels.shape != egg.shape:
        raise ValueError("label map and egg mask differ in shape")
    if not 0 <= min_fraction <= 1:
        raise ValueError("min_fraction must lie in [0, 1]")
    area = int(egg.sum())
    if area == 0:
        raise ValueError("no egg region")
    inside = labels[egg]
    covered = int((inside != 0).sum())
    num_regions = int(np.unique(inside[inside > 0]).size)
    fertile = num_regions >= 1 and Fraction(covered, area) >= Fraction(str(min_fraction))
    return Detection(fertile, num_regions, covered / area, labels)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other):
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)

    def as_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def tally(pairs) -> ConfusionMatrix:
    """Confusion matrix from ``(truth, predicted)`` boolean pairs."""
    tp = tn = fp = fn = 0
    for truth, pred in pairs:
        if pred:
            if truth:
                tp += 1
            else:
                fp += 1
        elif truth:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, tn, fp, fn)


def accuracy(cm: ConfusionMatrix) -> Fraction:
    """``(TP + TN) / (TP + TN + FP + FN)`` as an exact fraction."""
    if cm.total == 0:
        raise ValueError("empty evaluation")
    return Fraction(cm.tp + cm.tn, cm.total)
