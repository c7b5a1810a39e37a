"""Pose-trajectory fusion toolkit.

Refines noisy drift-free absolute poses with smooth-but-drifty relative
measurements via moving-window on-manifold pose-graph optimization.
"""

from .pose import LossConfig, Pose, RelativePose, Trajectory
from .pgo import Constraint, ConstraintKind, PgoConfig, fuse_trajectory
from .sim import GpsTrack, NoiseModel

__all__ = [
    "Constraint",
    "ConstraintKind",
    "GpsTrack",
    "LossConfig",
    "NoiseModel",
    "PgoConfig",
    "Pose",
    "RelativePose",
    "Trajectory",
    "fuse_trajectory",
]
