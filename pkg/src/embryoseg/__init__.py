"""Egg-embryo segmentation: CLAHE/HE enhancement and distance-transform watershed."""

from .detection import ConfusionMatrix, Detection, accuracy, detect, tally
from .enhancement import (ClaheParams, Order, clahe, clip_limit, enhance_pipeline,
                          equalization_map, equalize)
from .pipeline import ConfigError, PipelineConfig, evaluate_corpus, run
from .prep import (Region, bbox_filter, binarize, connected_components, median_filter,
                   otsu_threshold)
from .raster import histogram, invert_binary, to_grayscale
from .synthetic import SyntheticEggSpec, generate_synthetic_egg, synthetic_corpus
from .watershed import WS, DistanceMap, colorize_labels, distance_transform, flood

__version__ = "0.1.0"
