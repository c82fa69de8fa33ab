"""Real-time single-object tracking with sub-region sparse features,
online naive-Bayes classifiers, weighted multiple-instance feature
selection and coarse-to-fine search."""

from .errors import (BoundsError, ConfigError, ImageReadError, InvalidInputError,
                     TrackerError, TrackingLostError)
from .evaluation import cle, overlap, precision_curve, run_ope, success_curve
from .geometry import BoundingBox, Frame, integral_image, rect_sum
from .synthetic import OcclusionEvent, SyntheticSpec, generate_synthetic
from .tracker import Tracker, TrackerConfig, initialize, track_frame

__version__ = "0.1.0"

__all__ = [
    "BoundingBox", "BoundsError", "ConfigError", "Frame", "ImageReadError",
    "InvalidInputError", "OcclusionEvent", "SyntheticSpec", "Tracker", "TrackerConfig",
    "TrackerError", "TrackingLostError", "cle", "generate_synthetic", "initialize",
    "integral_image", "overlap", "precision_curve", "rect_sum", "run_ope",
    "success_curve", "track_frame",
]
