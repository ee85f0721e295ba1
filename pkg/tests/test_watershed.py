import math

import numpy as np
import pytest

from embryoseg.watershed import (WS, DistanceMap, InvariantError, check_label_map,
                                 colorize_labels, distance_transform, flood, flood_levels,
                                 label_color, label_summary, labels_from_pgm16, labels_to_pgm16,
                                 topography)
from oracles import check_structure, edt_squared_brute, flood_brute, random_grid


def dumbbell():
    """16x9: two 5x5 squares joined by a one-pixel-high bridge on row 4."""
    bw = np.zeros((9, 16), bool)
    bw[2:7, 1:6] = True
    bw[2:7, 10:15] = True
    bw[4, 6:10] = True
    return bw


def test_distance_three_four_five():
    bw = np.ones((5, 4), bool)
    bw[0, 0] = False
    d = distance_transform(bw)
    assert d.values[4, 3] == 5.0


def test_distance_row():
    bw = np.array([[0, 1, 1, 1, 0]], bool)
    assert distance_transform(bw).values.tolist() == [[0, 1, 2, 1, 0]]
    assert edt_squared_brute(bw) == [[0, 1, 4, 1, 0]]


def test_distance_all_background_and_all_foreground():
    assert not distance_transform(np.zeros((4, 5), bool)).squared.any()
    with pytest.raises(ValueError, match="no background reference"):
        distance_transform(np.ones((3, 3), bool))


def test_distance_lipschitz_and_zero_set():
    rs = np.random.default_rng(4)
    for _ in range(30):
        bw = random_grid(rs, 24)
        d = distance_transform(bw).values
        assert ((d == 0) == ~bw).all()
        assert (np.abs(np.diff(d, axis=0)) <= 1 + 1e-12).all()
        assert (np.abs(np.diff(d, axis=1)) <= 1 + 1e-12).all()


def test_distance_chunking_is_invisible():
    bw = random_grid(np.random.default_rng(5), 40, 30)
    a = distance_transform(bw).squared
    b = distance_transform(bw, max_chunk=1).squared
    assert np.array_equal(a, b)


def test_flood_single_blob():
    yy, xx = np.mgrid[0:15, 0:15]
    for bw in ((yy - 7) ** 2 + (xx - 7) ** 2 <= 30, np.pad(np.ones((5, 5), bool), 2)):
        labels = flood(distance_transform(bw))
        assert labels.max() == 1 and not (labels == WS).any()
        assert np.array_equal(labels != 0, bw)


def test_flood_empty():
    labels = flood(distance_transform(np.zeros((5, 5), bool)))
    assert labels.shape == (5, 5) and not labels.any()


def test_flood_dumbbell():
    bw = dumbbell()
    labels = flood(distance_transform(bw))
    assert labels.max() == 2
    ws = np.argwhere(labels == WS)
    assert len(ws) >= 1
    assert all(y == 4 and 6 <= x <= 9 for y, x in ws)
    assert np.array_equal(labels, flood_brute(bw))
    assert check_structure(labels, bw) == []
    # each square lies wholly inside one basin
    assert len(np.unique(labels[2:7, 1:6])) == 1 and len(np.unique(labels[2:7, 10:15])) == 1
    assert labels[4, 3] != labels[4, 12]


def test_flood_matches_oracle_small():
    rs = np.random.default_rng(6)
    for _ in range(40):
        bw = random_grid(rs, 12)
        labels = flood(distance_transform(bw))
        assert np.array_equal(labels, flood_brute(bw))
        assert check_structure(labels, bw) == []


def test_flood_levels_and_topography():
    bw = np.array([[0, 1, 1, 1, 0]], bool)
    d = distance_transform(bw)
    assert flood_levels(d).tolist() == [4, 1]
    assert topography(d).tolist() == [[0, 1, 0, 1, 0]]


def test_flood_accepts_handmade_distance_map():
    sq = np.array([[0, 1, 0], [1, 4, 1], [0, 1, 0]])
    labels = flood(DistanceMap(sq))
    assert labels.tolist() == [[0, 1, 0], [1, 1, 1], [0, 1, 0]]


def test_colorize():
    assert not colorize_labels(np.zeros((3, 3), np.int32)).any()
    lm = np.array([[1, WS, 2], [0, 3, 3]], np.int32)
    a, b = colorize_labels(lm), colorize_labels(lm)
    assert np.array_equal(a, b) and a.dtype == np.uint8 and a.shape == (2, 3, 3)
    assert a[0, 1].tolist() == [255, 255, 255]
    assert a[1, 0].tolist() == [0, 0, 0]
    colors = {tuple(a[0, 0]), tuple(a[0, 2]), tuple(a[1, 1])}
    assert len(colors) == 3
    assert (255, 255, 255) not in colors and (0, 0, 0) not in colors


def test_palette_distinct_for_64_labels():
    colors = [label_color(k) for k in range(1, 65)]
    assert len(set(colors)) == 64
    assert (0, 0, 0) not in colors and (255, 255, 255) not in colors


def test_pgm16_roundtrip_and_summary():
    lm = np.array([[0, 1, 1], [WS, 2, 0]], np.int32)
    enc = labels_to_pgm16(lm)
    assert enc.dtype == np.uint16 and enc[1, 0] == 65535
    assert np.array_equal(labels_from_pgm16(enc), lm)
    assert label_summary(lm) == {"num_basins": 2, "ws_pixel_count": 1, "basin_areas": [2, 1]}


def test_check_label_map():
    bw = dumbbell()
    labels = flood(distance_transform(bw))
    check_label_map(labels, bw)
    broken = labels.copy()
    broken[2, 1] = WS
    with pytest.raises(InvariantError):
        check_label_map(broken, bw)
    with pytest.raises(InvariantError):
        check_label_map(labels, ~bw)


def test_distance_values_are_roots_of_integers():
    bw = random_grid(np.random.default_rng(7), 15)
    d = distance_transform(bw)
    assert d.squared.dtype.kind == "i"
    for v, s in zip(d.values.ravel(), d.squared.ravel()):
        assert v == math.sqrt(s)
