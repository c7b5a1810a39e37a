"""On-manifold Gauss-Newton pose-graph optimization and window fusion.

The state is a window of poses; each pose contributes 6 manifold
coordinates (3 translation + 3 rotation) while being stored as 7 numbers.
Every constraint yields a whitened residual r = L^T (k - f(z)) and a
Jacobian J = L^T df/d(manifold coords), where the covariance S = L L^T.
Rotation blocks are chained through the quaternion-product derivative and
the constant derivative of the exponential map at zero, and the update is
z ⊞ dz: translations add, rotations right-multiply by qexp(dw).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from . import quat
from .pose import Pose, RelativePose, Trajectory, advance, compose, integrate, relative_pose


class ConstraintKind(Enum):
    ABS_TRANSLATION = "abs-t"
    ABS_ROTATION = "abs-r"
    REL_TRANSLATION = "rel-t"
    REL_ROTATION = "rel-r"


_RELATIVE_KINDS = (ConstraintKind.REL_TRANSLATION, ConstraintKind.REL_ROTATION)


@dataclass
class Constraint:
    """One residual block of the pose graph.

    observation is a 3-vector for translations and a 4-vector quaternion
    for rotations; covariance must be symmetric positive-definite.
    """

    kind: ConstraintKind
    i: int
    j: int | None
    observation: np.ndarray
    covariance: np.ndarray
    # Upper-triangular whitener L^T from covariance = L L^T, cached.
    _lt: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.observation = np.asarray(self.observation, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)
        if (self.j is not None) != (self.kind in _RELATIVE_KINDS):
            raise ValueError("second index j must be present iff the kind is relative")
        dim = 3 if self.kind in (ConstraintKind.ABS_TRANSLATION,
                                 ConstraintKind.REL_TRANSLATION) else 4
        if self.observation.shape != (dim,):
            raise ValueError(f"{self.kind.value} observation must have shape ({dim},)")
        if self.covariance.shape != (dim, dim):
            raise ValueError(f"{self.kind.value} covariance must be {dim}x{dim}")
        try:
            self._lt = np.linalg.cholesky(self.covariance).T
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance is not positive-definite") from exc


@dataclass
class PgoConfig:
    """Window size, frame spacing, covariance tuning and solver controls."""

    window_T: int = 7
    spacing_k: int = 150
    sigma_rot: float = 10.0
    max_iters: int = 50
    step_tol: float = 1e-8

    def __post_init__(self):
        if self.window_T < 2:
            raise ValueError("window_T must be >= 2")
        if self.spacing_k < 1:
            raise ValueError("spacing_k must be >= 1")
        if self.sigma_rot <= 0:
            raise ValueError("sigma_rot must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


class RankDeficientError(RuntimeError):
    """Stacked Jacobian lost full column rank."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"rank-deficient system; offending manifold columns {self.columns}")


def build_window_graph(abs_poses: list[Pose], vo: list[RelativePose],
                       cfg: PgoConfig) -> list[Constraint]:
    """Constraints for one window: per-pose absolute + consecutive relative.

    Absolute translations carry identity covariance; rotation constraints
    carry sigma_rot * I4. Total 2T + 2(T-1) constraints, grouped per pose
    with absolute before relative.
    """
    T = len(abs_poses)
    if len(vo) != T - 1:
        raise ValueError(f"expected {T - 1} relative poses for {T} absolute poses, got {len(vo)}")
    eye3 = np.eye(3)
    sig4 = cfg.sigma_rot * np.eye(4)
    constraints: list[Constraint] = []
    for i, p in enumerate(abs_poses):
        constraints.append(Constraint(ConstraintKind.ABS_TRANSLATION, i, None, p.t, eye3))
        constraints.append(Constraint(ConstraintKind.ABS_ROTATION, i, None,
                                      quat.canonicalize(p.q), sig4))
        if i < T - 1:
            constraints.append(Constraint(ConstraintKind.REL_TRANSLATION, i, i + 1,
                                          vo[i].t, eye3))
            constraints.append(Constraint(ConstraintKind.REL_ROTATION, i, i + 1,
                                          quat.canonicalize(vo[i].q), sig4))
    return constraints


def residual_and_jacobian(c: Constraint, z: list[Pose]) -> tuple[np.ndarray, np.ndarray]:
    """Whitened residual and Jacobian rows over the 6T manifold coordinates.

    The residual is L^T (k - f(z)); the Jacobian is L^T df/d(dz) so that
    the first-order change of the residual along dz is -J dz. Rotation
    observables are hemisphere-canonicalized (scalar part >= 0) before the
    comparison, with the sign folded into the Jacobian.
    """
    T = len(z)
    lt = c._lt
    rows = lt.shape[0]
    jac = np.zeros((rows, 6 * T))
    me = quat.EXP_DERIV_AT_ZERO

    if c.kind is ConstraintKind.ABS_TRANSLATION:
        f = z[c.i].t
        jac[:, 6 * c.i:6 * c.i + 3] = lt
    elif c.kind is ConstraintKind.ABS_ROTATION:
        qc = quat.canonicalize(z[c.i].q)
        f = qc
        jac[:, 6 * c.i + 3:6 * c.i + 6] = lt @ quat.dqmul_left(qc) @ me
    elif c.kind is ConstraintKind.REL_TRANSLATION:
        qi, qj = z[c.i].q, z[c.j].q
        d = z[c.i].t - z[c.j].t
        f = quat.qrotate(qj, d)
        rot = quat.drotate_dt(qj)
        jac[:, 6 * c.i:6 * c.i + 3] = lt @ rot
        jac[:, 6 * c.j:6 * c.j + 3] = -(lt @ rot)
        jac[:, 6 * c.j + 3:6 * c.j + 6] = (
            lt @ quat.drotate_dq(qj, d) @ quat.dqmul_left(qj) @ me)
    elif c.kind is ConstraintKind.REL_ROTATION:
        qi, qj = z[c.i].q, z[c.j].q
        f_raw = quat.qmul(quat.qinv(qj), qi)
        sign = -1.0 if f_raw[0] < 0.0 else 1.0
        f = sign * f_raw
        jac[:, 6 * c.i + 3:6 * c.i + 6] = sign * (lt @ quat.dqmul_left(f_raw) @ me)
        # d(conj(qj * e) * qi)/de at e=0, chained through the conjugation
        jac[:, 6 * c.j + 3:6 * c.j + 6] = sign * (
            lt @ quat.dqmul_right(f_raw) @ np.diag([1.0, -1.0, -1.0, -1.0]) @ me)
    else:  # pragma: no cover
        raise ValueError(f"unknown constraint kind {c.kind}")

    return lt @ (c.observation - f), jac


def objective(constraints: list[Constraint], z: list[Pose]) -> float:
    """Total whitened squared error E(z) = sum_c (k - f)^T S (k - f)."""
    total = 0.0
    for c in constraints:
        r, _ = residual_and_jacobian(c, z)
        total += float(r @ r)
    return total


def _apply_step(z: list[Pose], dz: np.ndarray) -> list[Pose]:
    """Manifold update z ⊞ dz: add translations, right-multiply qexp(dw)."""
    out = []
    for p_idx, p in enumerate(z):
        dt = dz[6 * p_idx:6 * p_idx + 3]
        dw = dz[6 * p_idx + 3:6 * p_idx + 6]
        out.append(Pose(p.t + dt, quat.qmul(p.q, quat.qexp(dw))))
    return out


@dataclass
class SolveStats:
    iterations: int = 0
    final_objective: float = 0.0
    final_step_norm: float = 0.0


def gauss_newton_solve(constraints: list[Constraint], z0: list[Pose],
                       cfg: PgoConfig, stats: SolveStats | None = None) -> list[Pose]:
    """Iterate stacked linearization until the step norm drops below tol.

    Each iteration stacks all whitened residuals and Jacobians and solves
    min ||J dz - r||^2 by orthogonal factorization (same minimizer as the
    normal equations), then applies the manifold update.
    """
    z = list(z0)
    n_cols = 6 * len(z)
    iters = 0
    step_norm = np.inf
    for _ in range(cfg.max_iters):
        res_blocks = []
        jac_blocks = []
        for c in constraints:
            r, jac = residual_and_jacobian(c, z)
            res_blocks.append(r)
            jac_blocks.append(jac)
        big_j = np.vstack(jac_blocks)
        big_r = np.concatenate(res_blocks)
        dz, _, rank, _ = np.linalg.lstsq(big_j, big_r, rcond=None)
        if rank < n_cols:
            _, rmat, piv = scipy.linalg.qr(big_j, mode="economic", pivoting=True)
            diag = np.abs(np.diag(rmat))
            bad = sorted(int(piv[k]) for k in range(len(diag)) if diag[k] <= diag[0] * 1e-12)
            raise RankDeficientError(bad or list(piv[rank:]))
        z = _apply_step(z, dz)
        iters += 1
        step_norm = float(np.linalg.norm(dz))
        if step_norm < cfg.step_tol:
            break
    if stats is not None:
        stats.iterations = iters
        stats.final_step_norm = step_norm
        stats.final_objective = objective(constraints, z)
    return z


@dataclass
class FusionStats:
    """Per-window diagnostics collected by fuse_trajectory when requested."""

    window_iterations: list[int] = field(default_factory=list)


def _grid_indices(n: int, k: int) -> list[int]:
    return list(range(0, n, k))


def fuse_trajectory(abs_traj: Trajectory, vo: list[RelativePose], cfg: PgoConfig,
                    stats: FusionStats | None = None) -> Trajectory:
    """Refine absolute poses with per-frame VO via moving-window optimization.

    Grid frames spaced spacing_k apart are optimized in overlapping windows
    of window_T poses (stride 1, newest pose emitted; the first window
    emits all of its poses). Grid-step VO observations come from the
    integrated VO trajectory, and frames off the grid are carried through
    by composing the nearest refined grid pose with the intermediate VO.
    """
    n = len(abs_traj)
    if n < 2:
        raise ValueError("need at least 2 poses to fuse")
    if len(vo) != n - 1:
        raise ValueError(f"expected {n - 1} per-frame relative poses, got {len(vo)}")

    k = cfg.spacing_k
    if (n - 1) // k < 1:
        # Too short for the requested spacing: single window over all frames
        # reachable at the widest spacing that still yields 2 grid poses.
        k = n - 1
    grid = _grid_indices(n, k)
    if len(grid) < 2:
        raise ValueError("trajectory too short for any window")
    T = min(cfg.window_T, len(grid))

    # Smooth-but-drifty trajectory from integrating the VO chain; grid-step
    # relative observations are taken between its samples.
    vo_traj = integrate(abs_traj.poses[0], vo)
    grid_vo = [relative_pose(vo_traj[grid[g]], vo_traj[grid[g + 1]])
               for g in range(len(grid) - 1)]

    fused_grid: list[Pose | None] = [None] * len(grid)
    first = True
    for start in range(len(grid) - T + 1):
        abs_window = [abs_traj.poses[grid[g]] for g in range(start, start + T)]
        vo_window = grid_vo[start:start + T - 1]
        z0 = []
        for g in range(start, start + T):
            z0.append(fused_grid[g] if fused_grid[g] is not None else abs_traj.poses[grid[g]])
        constraints = build_window_graph(abs_window, vo_window, cfg)
        solve_stats = SolveStats() if stats is not None else None
        z = gauss_newton_solve(constraints, z0, cfg, solve_stats)
        if stats is not None:
            stats.window_iterations.append(solve_stats.iterations)
        if first:
            for offset in range(T):
                fused_grid[start + offset] = z[offset]
            first = False
        else:
            fused_grid[start + T - 1] = z[T - 1]

    # Carry non-grid frames through the VO chain from the nearest grid pose.
    out: list[Pose | None] = [None] * n
    for g, frame in enumerate(grid):
        out[frame] = fused_grid[g]
    for f in range(n):
        if out[f] is not None:
            continue
        g = min(range(len(grid)), key=lambda gi: abs(grid[gi] - f))
        anchor_frame = grid[g]
        rel = relative_pose(vo_traj[f], vo_traj[anchor_frame])
        out[f] = compose(fused_grid[g], rel)
    return Trajectory(abs_traj.timestamps, tuple(out))


def temporal_median_filter(traj: Trajectory, window: int = 51) -> Trajectory:
    """Sliding-window median smoothing; edges use truncated windows.

    Translations take a per-coordinate median; rotations take the window
    element minimizing the summed angular distance to all others.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be odd and >= 1")
    if window == 1:
        return traj
    half = window // 2
    n = len(traj)
    ts = np.array([p.t for p in traj.poses])
    qs = np.array([p.q for p in traj.poses])
    out = []
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        t_med = np.median(ts[lo:hi], axis=0)
        block = qs[lo:hi]
        # geometric medoid via pairwise quaternion angles
        dots = np.clip(np.abs(block @ block.T), 0.0, 1.0)
        cost = np.sum(np.arccos(dots), axis=1)
        q_med = block[int(np.argmin(cost))]
        out.append(Pose(t_med, q_med))
    return Trajectory(traj.timestamps, tuple(out))
