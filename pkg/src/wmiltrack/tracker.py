"""Per-frame tracking loop.

Each frame runs a coarse search (radius ``r_c``, stride ``omega_c``)
around the previous anchor, refines it with a dense search (``r_f``,
``omega_f``), then crops a positive bag within ``alpha`` and negatives
from the ``[delta, beta)`` annulus, updates the Gaussian classifiers and
re-selects the K strongest features.
"""

from dataclasses import dataclass, field, fields, asdict
import copy
import math

import numpy as np

from .classifier import ClassifierPool
from .errors import ConfigError, InvalidInputError, TrackingLostError
from .features import extract_features, generate_layout, generate_pool
from .geometry import (BoundingBox, LatticeDisk, enumerate_positions, integral_image,
                       subsample_positions)
from .wmil import SampleBag, select_features


@dataclass(frozen=True)
class TrackerConfig:
    alpha: float = 4
    delta: float = 8
    beta: float = 22
    n_negatives: int = 50
    n_s: int = 4
    lam: float = 0.9
    m_features: int = 100
    k_selected: int = 20
    r_c: float = 25
    omega_c: int = 4
    r_f: float = 10
    omega_f: int = 1
    subregion_fraction: float = 0.5
    beta_min: float = 0.3
    beta_max: float = 0.7
    w_min: int = 3
    h_min: int = 3
    sigma_floor: float = 1e-2
    occlusion_threshold: float = 0.0
    occlusion_gating: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        checks = [
            (self.alpha > 0, "alpha", "alpha > 0"),
            (self.alpha < self.delta, "alpha", "alpha < delta"),
            (self.delta < self.beta, "delta", "delta < beta"),
            (self.n_negatives >= 1, "n_negatives", "n_negatives >= 1"),
            (self.n_s >= 1, "n_s", "n_s >= 1"),
            (0.0 <= self.lam <= 1.0, "lam", "0 <= lam <= 1"),
            (self.m_features >= 1, "m_features", "m_features >= 1"),
            (1 <= self.k_selected <= self.m_features, "k_selected", "1 <= k_selected <= m_features"),
            (self.omega_f >= 1, "omega_f", "omega_f >= 1"),
            (self.omega_c > self.omega_f, "omega_c", "omega_c > omega_f"),
            (self.r_f > 0, "r_f", "r_f > 0"),
            (self.r_f <= self.r_c, "r_f", "r_f <= r_c"),
            (0.0 < self.subregion_fraction <= 1.0, "subregion_fraction",
             "0 < subregion_fraction <= 1"),
            (0.0 <= self.beta_min <= self.beta_max <= 1.0, "beta_min",
             "0 <= beta_min <= beta_max <= 1"),
            (self.w_min >= 1 and self.h_min >= 1, "w_min", "w_min, h_min >= 1"),
            (self.sigma_floor > 0, "sigma_floor", "sigma_floor > 0"),
        ]
        for ok, name, constraint in checks:
            if not ok:
                raise ConfigError(f"invalid config: requires {constraint}", field=name)

    def replace(self, **changes):
        values = asdict(self)
        values.update(changes)
        return TrackerConfig(**values)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    def subregion_size(self, sample_size):
        W, H = sample_size
        return (max(1, math.ceil(W * self.subregion_fraction)),
                max(1, math.ceil(H * self.subregion_fraction)))


@dataclass(frozen=True)
class FrameDiagnostics:
    frame_index: int
    position: BoundingBox
    coarse_score: float
    fine_score: float
    coarse_candidates: int
    fine_candidates: int
    occluded: tuple
    gating_applied: bool

    def as_record(self):
        b = self.position
        return {
            "frame": self.frame_index,
            "x": b.x, "y": b.y, "w": b.w, "h": b.h,
            "coarse_score": self.coarse_score,
            "fine_score": self.fine_score,
            "coarse_candidates": self.coarse_candidates,
            "fine_candidates": self.fine_candidates,
            "occluded": "".join("1" if f else "0" for f in self.occluded),
            "gating_applied": int(self.gating_applied),
        }


@dataclass
class TrackerState:
    config: TrackerConfig
    pool: object
    classifier: ClassifierPool
    selected: tuple
    position: BoundingBox
    frame_size: tuple
    frame_index: int = 0
    rng: np.random.Generator = field(default=None, repr=False)
    occluded: tuple = ()


def _positive_positions(anchor, box, frame_size, config):
    return enumerate_positions(LatticeDisk(anchor, 0, config.alpha, 1), box.size, frame_size)


def _negative_positions(anchor, box, frame_size, config, rng):
    ring = enumerate_positions(LatticeDisk(anchor, config.delta, config.beta, 1),
                               box.size, frame_size)
    if len(ring) == 0:
        raise InvalidInputError("frame leaves no room for negative samples")
    return subsample_positions(ring, config.n_negatives, rng)


def initialize(frame, init_box, config=None):
    """Build the feature pool and first classifier from the first frame."""
    config = config or TrackerConfig()
    frame_size = (frame.width, frame.height)
    if not init_box.inside(*frame_size):
        raise InvalidInputError(f"initial box {init_box.as_tuple()} is outside the frame")
    rng = np.random.default_rng(config.rng_seed)
    sample_size = init_box.size
    layout = generate_layout(sample_size, config.subregion_size(sample_size), config.n_s, rng)
    pool = generate_pool(layout, config.m_features, rng, beta_min=config.beta_min,
                         beta_max=config.beta_max, w_min=config.w_min, h_min=config.h_min)

    ii = integral_image(frame)
    anchor = init_box.anchor
    pos = _positive_positions(anchor, init_box, frame_size, config)
    neg = _negative_positions(anchor, init_box, frame_size, config, rng)
    pos_bag = SampleBag.positive(pos, extract_features(ii, pos, pool), anchor)
    neg_bag = SampleBag.negative(neg, extract_features(ii, neg, pool))
    classifier = ClassifierPool.from_batches(pos_bag.features, neg_bag.features,
                                             pos_bag.weights, lam=config.lam,
                                             sigma_floor=config.sigma_floor)
    selection = select_features(classifier, pos_bag, neg_bag, config.k_selected)
    return TrackerState(config, pool, classifier, selection.selected, init_box, frame_size,
                        frame_index=frame.index, rng=rng,
                        occluded=(False,) * layout.n_regions)


def candidate_positions(state, center, radius, step):
    disk = LatticeDisk(center, 0, radius, step)
    return enumerate_positions(disk, state.position.size, state.frame_size)


def score_positions(state, ii, positions):
    """Strong-classifier response of every anchor in ``positions``."""
    sel = list(state.selected)
    feats = extract_features(ii, positions, state.pool, indices=sel)
    return state.classifier.log_ratios(feats, sel).sum(axis=1)


def detect(state, ii, center, radius, step):
    """Exhaustive argmax of the strong classifier over a lattice disk.

    Returns ``((x, y), score)``; ties resolve to the first anchor in scan
    order.
    """
    positions = candidate_positions(state, center, radius, step)
    if len(positions) == 0:
        raise TrackingLostError(f"no candidate windows around {center}")
    scores = score_positions(state, ii, positions)
    best = int(np.argmax(scores))
    return (int(positions[best, 0]), int(positions[best, 1])), float(scores[best])


def gate_occluded_subregions(state, tracked_features):
    """Flag sub-regions whose selected features vote against the target.

    ``tracked_features`` is the full feature vector at the tracked anchor.
    A sub-region is flagged when the mean weak response of the selected
    features rooted in it falls below ``occlusion_threshold``; regions
    without selected features are never flagged.
    """
    sel = np.asarray(state.selected)
    regions = state.pool.regions[sel]
    tracked_features = np.asarray(tracked_features, dtype=np.float64)
    responses = state.classifier.log_ratios(tracked_features[sel], sel)
    flags = []
    for r in range(state.pool.layout.n_regions):
        mine = responses[regions == r]
        flags.append(bool(len(mine) and mine.mean() < state.config.occlusion_threshold))
    return tuple(flags)


def track_frame(state, frame):
    """Locate the target in ``frame`` and update ``state`` in place.

    Returns ``(box, diagnostics)``. On any error ``state`` is untouched.
    """
    cfg = state.config
    if (frame.width, frame.height) != state.frame_size:
        raise InvalidInputError(
            f"frame is {frame.width}x{frame.height}, tracker expects "
            f"{state.frame_size[0]}x{state.frame_size[1]}")
    ii = integral_image(frame)
    prev = state.position.anchor

    coarse, coarse_score = detect(state, ii, prev, cfg.r_c, cfg.omega_c)
    fine, fine_score = detect(state, ii, coarse, cfg.r_f, cfg.omega_f)
    n_coarse = len(candidate_positions(state, prev, cfg.r_c, cfg.omega_c))
    n_fine = len(candidate_positions(state, coarse, cfg.r_f, cfg.omega_f))
    box = state.position.moved_to(*fine)

    rng = copy.deepcopy(state.rng)
    pos = _positive_positions(fine, box, state.frame_size, cfg)
    neg = _negative_positions(fine, box, state.frame_size, cfg, rng)
    pos_bag = SampleBag.positive(pos, extract_features(ii, pos, state.pool), fine)
    neg_bag = SampleBag.negative(neg, extract_features(ii, neg, state.pool))

    n_regions = state.pool.layout.n_regions
    occluded = (False,) * n_regions
    mask = np.ones(len(state.pool), dtype=bool)
    gating_applied = False
    if cfg.occlusion_gating:
        occluded = gate_occluded_subregions(state, extract_features(ii, fine, state.pool))
        keep = ~np.asarray(occluded)[state.pool.regions]
        # fail-safe: never starve the update or the selection
        if any(occluded) and not all(occluded) and keep.sum() >= cfg.k_selected:
            mask = keep
            gating_applied = True

    classifier = state.classifier.copy()
    classifier.update(pos_bag.features, neg_bag.features, pos_bag.weights, mask=mask)
    selection = select_features(classifier, pos_bag, neg_bag, cfg.k_selected, allowed=mask)

    state.classifier = classifier
    state.selected = selection.selected
    state.position = box
    state.frame_index = frame.index
    state.rng = rng
    state.occluded = occluded
    diag = FrameDiagnostics(frame.index, box, coarse_score, fine_score, n_coarse, n_fine,
                            occluded, gating_applied)
    return box, diag


class Tracker:
    """Stateful convenience wrapper: ``init`` once, then ``update`` per frame."""

    def __init__(self, config=None):
        self.config = config or TrackerConfig()
        self.state = None
        self.last_diagnostics = None

    def init(self, frame, box):
        self.state = initialize(frame, box, self.config)
        return box

    def update(self, frame):
        if self.state is None:
            raise InvalidInputError("tracker used before init()")
        box, self.last_diagnostics = track_frame(self.state, frame)
        return box
