"""Deterministic synthetic sequences with exact ground truth.

A blocky textured target moves over a smooth textured background. Frames
can carry a linear illumination gain ramp, additive Gaussian noise and
occlusion patches that move with the target.
"""

from dataclasses import dataclass, fields
import math

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ConfigError
from .geometry import BoundingBox, Frame


@dataclass(frozen=True)
class OcclusionEvent:
    """Fill a target-relative rectangle on frames ``start <= t < end``."""

    start: int
    end: int
    x: int
    y: int
    w: int
    h: int
    fill: int = 0


@dataclass(frozen=True)
class SyntheticSpec:
    width: int = 320
    height: int = 240
    target_w: int = 40
    target_h: int = 40
    n_frames: int = 100
    max_step: float = 6.0
    start: tuple = None
    path: tuple = None
    seed: int = 0
    gain_start: float = 1.0
    gain_end: float = 1.0
    noise_sigma: float = 0.0
    occlusions: tuple = ()
    block: int = 5

    def __post_init__(self):
        occl = tuple(o if isinstance(o, OcclusionEvent) else OcclusionEvent(**o)
                     for o in self.occlusions)
        object.__setattr__(self, "occlusions", occl)
        if self.path is not None:
            object.__setattr__(self, "path", tuple(tuple(int(v) for v in p) for p in self.path))
        if self.start is not None:
            object.__setattr__(self, "start", tuple(int(v) for v in self.start))
        self.validate()

    def validate(self):
        def need(ok, name, what):
            if not ok:
                raise ConfigError(f"invalid synthetic spec field '{name}': {what}", field=name)

        need(self.width >= 1 and self.height >= 1, "width", "frame size must be positive")
        need(1 <= self.target_w <= self.width, "target_w", "target must fit the frame")
        need(1 <= self.target_h <= self.height, "target_h", "target must fit the frame")
        need(self.n_frames >= 1, "n_frames", "must be >= 1")
        need(self.max_step >= 0, "max_step", "must be >= 0")
        need(self.noise_sigma >= 0, "noise_sigma", "must be >= 0")
        need(self.gain_start > 0 and self.gain_end > 0, "gain_start", "gains must be positive")
        need(self.block >= 1, "block", "must be >= 1")
        if self.start is not None:
            need(self._fits(self.start), "start", "target leaves the frame")
        if self.path is not None:
            need(len(self.path) == self.n_frames, "path", "needs one anchor per frame")
            for t, p in enumerate(self.path):
                need(self._fits(p), "path", f"target leaves the frame at frame {t}")
                if t:
                    q = self.path[t - 1]
                    need(math.hypot(p[0] - q[0], p[1] - q[1]) <= self.max_step + 1e-9,
                         "path", f"displacement above max_step at frame {t}")
        for o in self.occlusions:
            need(0 <= o.x and 0 <= o.y and o.w >= 1 and o.h >= 1
                 and o.x + o.w <= self.target_w and o.y + o.h <= self.target_h,
                 "occlusions", "occluder must lie inside the target box")
            need(0 <= o.fill <= 255, "occlusions", "fill must be in [0, 255]")
            need(o.start <= o.end, "occlusions", "start must not exceed end")

    def _fits(self, p):
        return (0 <= p[0] <= self.width - self.target_w
                and 0 <= p[1] <= self.height - self.target_h)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown synthetic spec field '{key}'", field=key)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"malformed synthetic spec: {exc}", field="occlusions") from exc

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "occlusions":
                v = [o.__dict__.copy() for o in v]
            elif isinstance(v, tuple):
                v = [list(p) if isinstance(p, tuple) else p for p in v]
            out[f.name] = v
        return out


def _random_walk(spec, rng):
    lo = np.array([0, 0])
    hi = np.array([spec.width - spec.target_w, spec.height - spec.target_h])
    p = np.array(spec.start if spec.start is not None else (hi // 2))
    angle = rng.uniform(0, 2 * math.pi)
    path = [tuple(int(v) for v in p)]
    for _ in range(spec.n_frames - 1):
        angle += rng.normal(0, 0.35)
        speed = spec.max_step * rng.uniform(0.3, 1.0)
        # truncation keeps |step| <= speed <= max_step
        d = np.trunc(speed * np.array([math.cos(angle), math.sin(angle)])).astype(int)
        q = p + d
        for k in range(2):
            if q[k] < lo[k] or q[k] > hi[k]:
                d[k] = -d[k]
                q[k] = p[k] + d[k]
                angle = math.pi - angle if k == 0 else -angle
        p = np.clip(q, lo, hi)
        path.append(tuple(int(v) for v in p))
    return path


def _textures(spec, rng):
    bw = -(-spec.target_w // spec.block)
    bh = -(-spec.target_h // spec.block)
    blocks = rng.uniform(10, 195, size=(bh, bw))
    target = np.kron(blocks, np.ones((spec.block, spec.block)))[:spec.target_h, :spec.target_w]
    target = gaussian_filter(target, 0.7)
    bg = gaussian_filter(rng.uniform(0, 1, size=(spec.height, spec.width)), 4.0)
    bg = (bg - bg.min()) / max(bg.max() - bg.min(), 1e-12)
    background = 20 + 70 * bg
    return target, background


def generate_synthetic(spec):
    """Render ``spec`` into ``(frames, ground_truth_boxes)`` (0-indexed)."""
    motion_seq, texture_seq, noise_seq = np.random.SeedSequence(spec.seed).spawn(3)
    path = list(spec.path) if spec.path is not None else _random_walk(
        spec, np.random.default_rng(motion_seq))
    target, background = _textures(spec, np.random.default_rng(texture_seq))
    noise_rng = np.random.default_rng(noise_seq)

    frames, truth = [], []
    n = spec.n_frames
    for t, (x, y) in enumerate(path):
        canvas = background.copy()
        canvas[y:y + spec.target_h, x:x + spec.target_w] = target
        gain = spec.gain_start + (spec.gain_end - spec.gain_start) * (t / (n - 1) if n > 1 else 0.0)
        canvas *= gain
        if spec.noise_sigma > 0:
            canvas += noise_rng.normal(0.0, spec.noise_sigma, size=canvas.shape)
        for o in spec.occlusions:
            if o.start <= t < o.end:
                canvas[y + o.y:y + o.y + o.h, x + o.x:x + o.x + o.w] = o.fill
        pixels = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
        frames.append(Frame(pixels, index=t))
        truth.append(BoundingBox(x, y, spec.target_w, spec.target_h))
    return frames, truth
