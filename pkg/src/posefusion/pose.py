"""Pose value types, relative-pose geometry, and the geometric loss.

A Pose is a 3-d translation in meters plus a unit quaternion. A
RelativePose stores the translation in the observer frame and the rotation
as a log quaternion. Two flavours of relative pose coexist:

* ``relative_pose`` -- the observer-frame form used by the VO comparison
  and the pose-graph constraints: t = R(q_j)(t_i - t_j), q = q_j^-1 * q_i.
* ``relative_pose_delta`` -- the elementwise-subtraction form used inside
  the pairwise training loss: (t_i - t_j, w_i - w_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quat


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Pose:
    """One trajectory sample: translation t (m) and unit quaternion q."""

    t: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if t.shape != (3,) or q.shape != (4,):
            raise ValueError(f"bad pose shapes t{t.shape} q{q.shape}")
        quat.check_unit(q)
        object.__setattr__(self, "t", _freeze(t))
        object.__setattr__(self, "q", _freeze(quat.canonicalize(q)))

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), quat.IDENTITY)

    @property
    def w(self) -> np.ndarray:
        """Rotation as a log quaternion."""
        return quat.qlog(self.q)


@dataclass(frozen=True)
class RelativePose:
    """Observer-frame translation (m) + log-quaternion rotation."""

    t: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if t.shape != (3,) or w.shape != (3,):
            raise ValueError(f"bad relative-pose shapes t{t.shape} w{w.shape}")
        if np.linalg.norm(w) > np.pi + 1e-9:
            raise ValueError("log-quaternion norm exceeds pi")
        object.__setattr__(self, "t", _freeze(t))
        object.__setattr__(self, "w", _freeze(w))

    @staticmethod
    def identity() -> "RelativePose":
        return RelativePose(np.zeros(3), np.zeros(3))

    @property
    def q(self) -> np.ndarray:
        return quat.qexp(self.w)


@dataclass(frozen=True)
class Trajectory:
    """Timestamped pose sequence; timestamps strictly increasing."""

    timestamps: np.ndarray
    poses: tuple[Pose, ...]

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float)
        poses = tuple(self.poses)
        if ts.ndim != 1 or len(ts) != len(poses):
            raise ValueError("timestamps and poses must have equal length")
        if len(ts) > 1 and not np.all(np.diff(ts) > 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", _freeze(ts))
        object.__setattr__(self, "poses", poses)

    def __len__(self) -> int:
        return len(self.poses)


@dataclass
class LossConfig:
    """Weights and pair-sampling parameters for the training-style loss."""

    beta: float = 0.0
    gamma: float = -3.0
    alpha: float = 1.0
    s: int = 3
    k: int = 10

    def __post_init__(self):
        if self.s < 2:
            raise ValueError("tuple size s must be >= 2")
        if self.k < 1:
            raise ValueError("frame spacing k must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")


def relative_pose(p_i: Pose, p_j: Pose) -> RelativePose:
    """Relative pose of p_i as seen from observer p_j.

    t = R(q_j)(t_i - t_j), w = log(q_j^-1 * q_i).
    """
    t = quat.qrotate(p_j.q, p_i.t - p_j.t)
    w = quat.qlog(quat.qmul(quat.qinv(p_j.q), p_i.q))
    return RelativePose(t, w)


def relative_pose_delta(p_i: Pose, p_j: Pose) -> RelativePose:
    """Subtraction-form relative pose: (t_i - t_j, w_i - w_j)."""
    return RelativePose(p_i.t - p_j.t, p_i.w - p_j.w)


def compose(p_j: Pose, rel: RelativePose) -> Pose:
    """Recover p_i from the observer pose p_j and rel = relative_pose(p_i, p_j)."""
    q_i = quat.qmul(p_j.q, rel.q)
    t_i = p_j.t + quat.qrotate(quat.qinv(p_j.q), rel.t)
    return Pose(t_i, q_i)


def advance(p_i: Pose, rel: RelativePose) -> Pose:
    """Recover the observer pose p_j from p_i and rel = relative_pose(p_i, p_j).

    This is the forward step when integrating per-frame VO, where each
    relative pose is expressed in the frame of the later (observer) pose.
    """
    q_j = quat.qmul(p_i.q, quat.qinv(rel.q))
    t_j = p_i.t - quat.qrotate(quat.qinv(q_j), rel.t)
    return Pose(t_j, q_j)


def integrate(start: Pose, rels: list[RelativePose]) -> list[Pose]:
    """Integrate a chain of consecutive relative poses forward from start.

    rels[m] is the relative pose of frame m observed from frame m+1.
    Returns len(rels) + 1 poses, the first being start.
    """
    out = [start]
    for rel in rels:
        out.append(advance(out[-1], rel))
    return out


def pose_distance(p, p_star, cfg: LossConfig) -> float:
    """Weighted L1 pose distance: |t-t*|_1 e^-beta + beta + |w-w*|_1 e^-gamma + gamma.

    Accepts two Pose or two RelativePose; rotations are compared in log form.
    """
    if isinstance(p, Pose) != isinstance(p_star, Pose):
        raise ValueError("operands must be of matching kind")
    w = p.w
    w_star = p_star.w
    dt = float(np.sum(np.abs(p.t - p_star.t)))
    dw = float(np.sum(np.abs(w - w_star)))
    return dt * np.exp(-cfg.beta) + cfg.beta + dw * np.exp(-cfg.gamma) + cfg.gamma


def sample_pairs(n: int, s: int, k: int) -> list[tuple[int, int]]:
    """Index pairs from tuples (i, i+k, ..., i+k(s-1)) for every valid start.

    Neighboring elements of each tuple form a pair; tuples start at every
    index (stride 1), so overlapping tuples repeat pairs. Indices are
    0-based.
    """
    span = k * (s - 1)
    pairs = []
    for i in range(n - span):
        for m in range(s - 1):
            pairs.append((i + k * m, i + k * (m + 1)))
    return pairs


def mapnet_loss(pred: list[Pose], gt: list[Pose], cfg: LossConfig) -> float:
    """Absolute-pose loss plus alpha-weighted pairwise relative-pose loss.

    Relative terms use the subtraction form over pairs sampled from
    k-spaced tuples of size s.
    """
    if len(pred) != len(gt):
        raise ValueError("pred and gt must have equal length")
    n = len(pred)
    needed = cfg.k * (cfg.s - 1) + 1  # shortest sequence holding one tuple
    if n < needed:
        raise ValueError(f"need at least {needed} poses to form one tuple, got {n}")
    total = sum(pose_distance(p, p_star, cfg) for p, p_star in zip(pred, gt))
    for i, j in sample_pairs(n, cfg.s, cfg.k):
        v = relative_pose_delta(pred[i], pred[j])
        v_star = relative_pose_delta(gt[i], gt[j])
        total += cfg.alpha * pose_distance(v, v_star, cfg)
    return float(total)


def rotation_error_deg(q_a: np.ndarray, q_b: np.ndarray) -> float:
    """Angle between two rotations in degrees, insensitive to q vs -q.

    Equal to 2*acos(|<q_a, q_b>|) but computed through the relative
    quaternion with atan2, which stays accurate near zero.
    """
    r = quat.qmul(quat.qinv(q_a), q_b)
    angle = 2.0 * np.arctan2(np.linalg.norm(r[1:]), abs(r[0]))
    return float(np.degrees(angle))


def transform(p: Pose, g_t: np.ndarray, g_q: np.ndarray) -> Pose:
    """Apply a global rigid transform: t -> R(g_q) t + g_t, q -> q * g_q^-1."""
    return Pose(quat.qrotate(g_q, p.t) + np.asarray(g_t, dtype=float),
                quat.qmul(p.q, quat.qinv(g_q)))


def transform_relative(rel: RelativePose, g_q: np.ndarray) -> RelativePose:
    """Relative pose under the same global transform: axis of w rotates."""
    return RelativePose(rel.t, quat.qrotate(g_q, rel.w))
