"""Tile coding of joint observations into sparse binary features.

Each joint (shoulder, elbow) is observed as a normalized position and a
normalized velocity, both in [0, 1].  Position 0 is the left/bottom limit,
1 the right/top limit.  Velocity 0 is full-speed negative, 0.5 is rest,
1 is full-speed positive.

A joint's observation activates exactly one tile on a conjunctive
position x velocity grid (default 32 x 32).  The shoulder occupies the
first block of tiles, the elbow the second, so a full observation is a
two-hot feature vector of length 2 * bins^2 (2048 by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def clamp01(value: float) -> float:
    """Clamp a scalar to the closed unit interval."""
    if value < 0.0:
        return 0.0
    if value > 1.0:
        return 1.0
    return value


@dataclass(frozen=True)
class JointObservation:
    """Normalized (position, velocity) reading for one joint."""

    position: float
    velocity: float

    def clamped(self) -> "JointObservation":
        return JointObservation(clamp01(self.position), clamp01(self.velocity))


@dataclass(frozen=True)
class TileLayout:
    """Grid geometry shared by every learner in a run."""

    bins_per_axis: int = 32
    joints: tuple[str, ...] = ("shoulder", "elbow")

    def __post_init__(self) -> None:
        if self.bins_per_axis < 2:
            raise ValueError("bins_per_axis must be >= 2")

    @property
    def tiles_per_joint(self) -> int:
        return self.bins_per_axis * self.bins_per_axis

    @property
    def total_features(self) -> int:
        return len(self.joints) * self.tiles_per_joint

    def bin_center(self, b: int) -> float:
        """Position value at the center of bin ``b``."""
        return (b + 0.5) / self.bins_per_axis


@dataclass(frozen=True)
class FeatureVector:
    """Sparse binary feature vector: the indices that are 1."""

    active_indices: tuple[int, ...]
    length: int

    def __post_init__(self) -> None:
        for i in self.active_indices:
            if not 0 <= i < self.length:
                raise ValueError(f"feature index {i} out of range [0, {self.length})")


def bin_index(value: float, bins: int) -> int:
    """Map a normalized scalar onto one of ``bins`` evenly spaced bins.

    Out-of-range values clamp to the boundary bins, and value 1.0 falls in
    the top bin rather than one past it.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    b = math.floor(clamp01(value) * bins)
    return min(b, bins - 1)


def encode(
    shoulder: JointObservation,
    elbow: JointObservation,
    layout: TileLayout = TileLayout(),
) -> FeatureVector:
    """Encode a shoulder/elbow observation pair as a two-hot feature vector."""
    bins = layout.bins_per_axis
    indices = []
    for block, obs in enumerate((shoulder, elbow)):
        obs = obs.clamped()
        pos_bin = bin_index(obs.position, bins)
        vel_bin = bin_index(obs.velocity, bins)
        indices.append(block * layout.tiles_per_joint + pos_bin * bins + vel_bin)
    return FeatureVector(tuple(indices), layout.total_features)


def shift_bin(pos_bin: int, direction: int, k: int, bins: int) -> int:
    """Position bin ``k`` bins away in ``direction``, clamped to the grid."""
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if k < 0:
        raise ValueError("k must be >= 0")
    return max(0, min(bins - 1, pos_bin + direction * k))


def shift_query(
    obs: JointObservation,
    direction: int,
    k: int,
    layout: TileLayout = TileLayout(),
) -> JointObservation:
    """Observation whose position sits ``k`` bins ahead of ``obs``.

    The returned position is the center of the target bin, so a downstream
    encode() lands exactly k bins away regardless of where inside its bin
    the original observation fell.  Velocity is unchanged.  The shift clamps
    at the ends of the grid.
    """
    bins = layout.bins_per_axis
    target = shift_bin(bin_index(obs.position, bins), direction, k, bins)
    return JointObservation(layout.bin_center(target), clamp01(obs.velocity))
