"""Detector-agnostic multi-object tracking with littering-event detection.

Per-frame detections and appearance embeddings go in; identity-stable tracks,
littering/cleaning events with offender attribution, and MOT metrics come out.
"""

__version__ = "0.1.0"

from .geometry import BoundingBox, Measurement  # noqa: F401
from .tracker import Detection, Tracker, TrackerConfig, Tracklet  # noqa: F401
from .events import EventConfig, EventRecord  # noqa: F401
from .identity import IdentityGallery, MatchResult  # noqa: F401
from .metrics import LabeledFrameSet, MetricReport  # noqa: F401
from .simulate import ScenarioSpec, generate, standard_suite  # noqa: F401
