"""Synthetic candled-egg images with ground truth.

A candled egg is rendered as a bright ellipse on a dark ground whose glow
falls off towards the shell. Fertile eggs get a bright embryo disc with
root-like filaments branching off it. Everything is drawn from a
``numpy.random.Generator`` seeded by the spec, so equal specs give
bit-identical outputs.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

# luminance levels before the candling tint is applied
BACKGROUND = 14.0
EGG_BASE = 120.0
VIGNETTE = 0.2
DISC = 215.0
FILAMENT = 185.0
TINT = (1.0, 0.78, 0.52)

MIN_SIZE = 24


@dataclass(frozen=True)
class SyntheticEggSpec:
    seed: int
    fertile: bool
    width: int = 128
    height: int = 160
    noise: float = 0.0
    branches: int = 5
    branch_length: float = 0.7  # relative to the egg's minor semi-axis

    def __post_init__(self):
        if self.width < MIN_SIZE or self.height < MIN_SIZE:
            raise ValueError(f"image too small for the egg ellipse (min {MIN_SIZE}x{MIN_SIZE})")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.branches < 0 or self.branch_length < 0:
            raise ValueError("branch parameters must be >= 0")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticEggSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown spec fields: {sorted(unknown)}")
        d = dict(d)
        if not isinstance(d.get("seed"), int) or isinstance(d.get("seed"), bool):
            raise ValueError("spec seed must be an integer")
        if not isinstance(d.get("fertile"), bool):
            raise ValueError("spec fertile must be a boolean")
        return cls(**d)


def tint(luminance) -> np.ndarray:
    """Render a luminance field with the warm candling tint, as uint8 RGB."""
    lum = np.asarray(luminance, dtype=np.float64)[..., None]
    rgb = np.floor(np.clip(lum * np.asarray(TINT), 0, 255) + 0.5)
    return rgb.astype(np.uint8)


def _draw_branch(canvas, inside, x, y, heading, length, rng, depth=0):
    """Random-walk a filament from (x, y); may fork once per level."""
    h, w = canvas.shape
    steps = int(length)
    fork_at = steps // 2 if depth < 1 and rng.random() < 0.6 else -1
    for i in range(steps):
        heading += rng.normal(0.0, 0.22)
        x += math.cos(heading)
        y += math.sin(heading)
        xi, yi = int(round(x)), int(round(y))
        if not (0 <= xi < w - 1 and 0 <= yi < h - 1) or not inside[yi, xi]:
            return
        # two pixels wide so the filament survives a 3x3 median
        canvas[yi, xi] = canvas[yi, xi + 1] = True
        canvas[yi + 1, xi] = True
        if i == fork_at:
            side = 1.0 if rng.random() < 0.5 else -1.0
            _draw_branch(canvas, inside, x, y, heading + side * 0.7,
                         (steps - i) * 0.6, rng, depth + 1)


def generate_synthetic_egg(spec: SyntheticEggSpec):
    """Return ``(rgb, ground_truth, egg_mask)`` for a spec."""
    rng = np.random.default_rng(spec.seed)
    w, h = spec.width, spec.height
    cx = w / 2 + rng.uniform(-0.04, 0.04) * w
    cy = h / 2 + rng.uniform(-0.03, 0.03) * h
    ax = rng.uniform(0.30, 0.34) * w
    ay = rng.uniform(0.34, 0.38) * h
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    r2 = ((xx - cx) / ax) ** 2 + ((yy - cy) / ay) ** 2
    egg = r2 <= 1.0

    lum = np.full((h, w), BACKGROUND)
    lum[egg] = EGG_BASE * (1.0 - VIGNETTE * r2[egg])

    truth = np.zeros((h, w), dtype=bool)
    if spec.fertile:
        minor = min(ax, ay)
        theta = rng.uniform(0, 2 * math.pi)
        rho = rng.uniform(0.0, 0.3)
        ex = cx + rho * ax * math.cos(theta)
        ey = cy + rho * ay * math.sin(theta)
        rd = rng.uniform(0.28, 0.34) * minor
        d2 = ((xx - ex) ** 2 + (yy - ey) ** 2) / rd ** 2
        disc = (d2 <= 1.0) & egg

        filaments = np.zeros((h, w), dtype=bool)
        inner = r2 <= 0.8
        phase = rng.uniform(0, 2 * math.pi)
        for i in range(spec.branches):
            phi = phase + 2 * math.pi * i / max(spec.branches, 1) + rng.normal(0, 0.2)
            length = spec.branch_length * minor * rng.uniform(0.7, 1.0)
            _draw_branch(filaments, inner, ex + rd * math.cos(phi), ey + rd * math.sin(phi),
                         phi, length, rng)
        filaments &= egg & ~disc

        lum[filaments] = FILAMENT
        # gentle shading keeps the disc well above the body level
        lum[disc] = DISC - 15.0 * d2[disc]
        truth = disc | filaments

    if spec.noise > 0:
        lum = lum + rng.normal(0.0, spec.noise, size=lum.shape)
    return tint(lum), truth, egg


def synthetic_corpus(n: int, seed: int, noise: float = 0.0, **kwargs):
    """``n`` specs alternating fertile / infertile with seeds derived from ``seed``."""
    if n < 1:
        raise ValueError("corpus size must be >= 1")
    ss = np.random.SeedSequence(seed)
    seeds = ss.generate_state(n, dtype=np.uint32)
    return [SyntheticEggSpec(seed=int(s), fertile=(i % 2 == 0), noise=noise, **kwargs)
            for i, s in enumerate(seeds)]
