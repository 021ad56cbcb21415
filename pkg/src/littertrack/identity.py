"""Identity enrollment and cosine-similarity matching.

The gallery is a flat label -> unit-embedding map scanned exhaustively at
match time; matching is plain cosine similarity against a threshold, with an
additive-angular-margin logit reported alongside for score sharpening.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = [
    "DEFAULT_EMBEDDING_DIM",
    "IdentityGallery",
    "MatchResult",
    "arcface_logit",
    "enroll",
    "match_identity",
]

logger = logging.getLogger(__name__)

DEFAULT_EMBEDDING_DIM = 512

# Top-2 similarity margin below which a match is flagged ambiguous.
AMBIGUITY_MARGIN = 0.05


@dataclass
class IdentityGallery:
    """Enrolled identities: unique labels mapped to unit embeddings."""

    entries: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict[str, dict] = field(default_factory=dict)

    @property
    def dim(self) -> int | None:
        for vec in self.entries.values():
            return vec.shape[0]
        return None

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class MatchResult:
    label: str | None
    similarity: float
    margin_logit: float
    ambiguous: bool = False


def arcface_logit(cos_theta: float, margin: float = 0.5, scale: float = 64.0) -> float:
    """Additive angular margin logit: scale * cos(theta + margin).

    The shifted angle is clamped to [0, pi], so the logit is monotonically
    non-increasing in the margin.
    """
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    if scale <= 0:
        raise ValueError("scale must be positive")
    theta = math.acos(min(1.0, max(-1.0, cos_theta)))
    shifted = min(math.pi, max(0.0, theta + margin))
    return scale * math.cos(shifted)


def _unit(embedding: np.ndarray, what: str) -> np.ndarray:
    vec = np.asarray(embedding, dtype=float).reshape(-1)
    norm = np.linalg.norm(vec)
    if norm == 0.0 or not np.isfinite(norm):
        raise DataError(f"{what} embedding must be nonzero and finite")
    return vec / norm


def enroll(
    gallery: IdentityGallery,
    label: str,
    embedding: np.ndarray,
    metadata: dict | None = None,
) -> IdentityGallery:
    """Store a normalized embedding under a label; replacing logs a notice."""
    vec = _unit(embedding, f"identity {label!r}")
    if gallery.dim is not None and vec.shape[0] != gallery.dim:
        raise DataError(
            f"embedding dimension {vec.shape[0]} does not match gallery dimension {gallery.dim}"
        )
    if label in gallery.entries:
        logger.info("replacing existing gallery entry for %r", label)
    gallery.entries[label] = vec
    if metadata is not None:
        gallery.metadata[label] = dict(metadata)
    return gallery


def match_identity(
    gallery: IdentityGallery,
    query: np.ndarray,
    threshold: float = 0.5,
    margin: float = 0.5,
    scale: float = 64.0,
) -> MatchResult:
    """Best cosine match; the label is returned only at or above the threshold.

    Ties between equal similarities break to the lexicographically smallest
    label. A best match closer than 0.05 to the runner-up is flagged
    ambiguous. An empty gallery yields a label-less result, not an error.
    """
    if not gallery.entries:
        return MatchResult(None, -1.0, arcface_logit(-1.0, margin, scale))
    vec = _unit(query, "query")
    if gallery.dim != vec.shape[0]:
        raise DataError(
            f"query dimension {vec.shape[0]} does not match gallery dimension {gallery.dim}"
        )
    labels = sorted(gallery.entries)
    sims = np.array([float(gallery.entries[label] @ vec) for label in labels])
    best_idx = int(np.argmax(sims))  # first (lexicographically smallest) on ties
    best_sim = float(sims[best_idx])
    ambiguous = False
    if len(labels) > 1:
        runner_up = float(np.partition(sims, -2)[-2])
        ambiguous = best_sim - runner_up < AMBIGUITY_MARGIN
    label = labels[best_idx] if best_sim >= threshold else None
    return MatchResult(label, best_sim, arcface_logit(best_sim, margin, scale), ambiguous)
