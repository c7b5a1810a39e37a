"""Synthetic trajectories and the two sensor-corruption regimes.

Absolute measurements get per-frame independent noise (noisy but
drift-free); relative measurements get per-step noise plus a constant
translation bias, so integrating them drifts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .pose import Pose, RelativePose, Trajectory, relative_pose


@dataclass
class NoiseModel:
    """Noise magnitudes for the two sensor regimes; deterministic per seed."""

    abs_t_sigma: float = 0.0   # meters, i.i.d. per axis
    abs_r_sigma: float = 0.0   # degrees, axis-angle
    vo_t_sigma: float = 0.0    # meters per step
    vo_r_sigma: float = 0.0    # degrees per step
    vo_t_bias: float = 0.0     # meters per step, constant drift
    seed: int = 0

    def __post_init__(self):
        for name in ("abs_t_sigma", "abs_r_sigma", "vo_t_sigma", "vo_r_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class GpsTrack:
    """Sparse 2-d position samples with strictly increasing timestamps."""

    timestamps: np.ndarray
    positions: np.ndarray  # shape (n, 2), meters

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float)
        xy = np.asarray(self.positions, dtype=float)
        if ts.ndim != 1 or xy.shape != (len(ts), 2):
            raise ValueError("track needs matching timestamps and (n, 2) positions")
        if len(ts) > 1 and not np.all(np.diff(ts) > 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "positions", xy)

    def __len__(self) -> int:
        return len(self.timestamps)


def _yaw_pose(position: np.ndarray, yaw: float) -> Pose:
    return Pose(position, np.array([np.cos(yaw / 2), 0.0, 0.0, np.sin(yaw / 2)]))


def _headings_from_positions(positions: np.ndarray) -> np.ndarray:
    diffs = np.diff(positions[:, :2], axis=0)
    yaws = np.arctan2(diffs[:, 1], diffs[:, 0])
    return np.append(yaws, yaws[-1])


def generate_trajectory(shape: str, n: int, step: float, seed: int = 0) -> Trajectory:
    """Planar trajectory with heading along the path; steps all equal `step`.

    Shapes: "loop" (closed circle, last sample returns to the first),
    "figure-eight" (two tangent circles with opposite turning), and
    "random-walk" (seeded random heading drift).
    """
    if n < 2:
        raise ValueError("need n >= 2 frames")
    if step <= 0:
        raise ValueError("step must be > 0")

    if shape == "loop":
        m = n - 1  # chords around the circle; pose n-1 closes onto pose 0
        radius = step / (2.0 * np.sin(np.pi / m))
        theta = 2.0 * np.pi * np.arange(n) / m
        positions = np.column_stack([radius * np.cos(theta),
                                     radius * np.sin(theta),
                                     np.zeros(n)])
    elif shape == "figure-eight":
        if n < 7:
            raise ValueError("figure-eight needs n >= 7")
        m1 = (n - 1) // 2
        m2 = (n - 1) - m1
        r1 = step / (2.0 * np.sin(np.pi / m1))
        r2 = step / (2.0 * np.sin(np.pi / m2))
        th1 = 2.0 * np.pi * np.arange(m1 + 1) / m1
        loop1 = np.column_stack([r1 - r1 * np.cos(th1), r1 * np.sin(th1)])
        th2 = 2.0 * np.pi * np.arange(1, m2 + 1) / m2
        loop2 = np.column_stack([r2 * np.cos(th2) - r2, r2 * np.sin(th2)])
        xy = np.vstack([loop1, loop2])
        positions = np.column_stack([xy, np.zeros(n)])
    elif shape == "random-walk":
        rng = np.random.default_rng(seed)
        turns = rng.normal(0.0, 0.15, size=n - 1)
        yaw = np.concatenate([[0.0], np.cumsum(turns)])
        positions = np.zeros((n, 3))
        for i in range(1, n):
            positions[i] = positions[i - 1] + step * np.array(
                [np.cos(yaw[i - 1]), np.sin(yaw[i - 1]), 0.0])
    else:
        raise ValueError(f"unknown shape {shape!r}")

    yaws = _headings_from_positions(positions)
    poses = tuple(_yaw_pose(positions[i], yaws[i]) for i in range(n))
    return Trajectory(np.arange(n, dtype=float), poses)


def _random_rotation(rng: np.random.Generator, sigma_deg: float) -> np.ndarray:
    """Small random rotation: uniform axis, Gaussian angle in degrees."""
    if sigma_deg == 0.0:
        return quat.IDENTITY.copy()
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = np.radians(rng.normal(0.0, sigma_deg))
    return quat.qexp(axis * angle / 2.0)


def corrupt_absolute(traj: Trajectory, nm: NoiseModel) -> Trajectory:
    """Per-pose independent noise: noisy but drift-free by construction."""
    rng = np.random.default_rng(nm.seed)
    poses = []
    for p in traj.poses:
        t = p.t + rng.normal(0.0, nm.abs_t_sigma, size=3) if nm.abs_t_sigma else p.t
        q = quat.qmul(p.q, _random_rotation(rng, nm.abs_r_sigma))
        poses.append(Pose(t, q))
    return Trajectory(traj.timestamps, tuple(poses))


def corrupt_vo(traj: Trajectory, nm: NoiseModel) -> list[RelativePose]:
    """Per-step relative poses with noise and a constant translation bias.

    The bias points along the observer-frame x axis, so integrating the
    output drifts when vo_t_bias > 0.
    """
    rng = np.random.default_rng(nm.seed)
    bias = np.array([nm.vo_t_bias, 0.0, 0.0])
    out = []
    for i in range(len(traj) - 1):
        true_rel = relative_pose(traj.poses[i], traj.poses[i + 1])
        t = true_rel.t + bias
        if nm.vo_t_sigma:
            t = t + rng.normal(0.0, nm.vo_t_sigma, size=3)
        q = quat.qmul(true_rel.q, _random_rotation(rng, nm.vo_r_sigma))
        out.append(RelativePose(t, quat.qlog(q)))
    return out


def interpolate_gps(track: GpsTrack, timestamps) -> np.ndarray:
    """Piecewise-linear 2-d interpolation, clamped to the track endpoints."""
    if len(track) == 0:
        raise ValueError("empty GPS track")
    ts = np.asarray(timestamps, dtype=float)
    x = np.interp(ts, track.timestamps, track.positions[:, 0])
    y = np.interp(ts, track.timestamps, track.positions[:, 1])
    return np.column_stack([x, y])
