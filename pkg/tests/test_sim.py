import numpy as np
import pytest

from posefusion.pose import Pose, Trajectory, integrate, relative_pose
from posefusion.sim import (
    GpsTrack,
    NoiseModel,
    corrupt_absolute,
    corrupt_vo,
    generate_trajectory,
    interpolate_gps,
)


class TestGenerateTrajectory:
    def test_loop_closure(self):
        traj = generate_trajectory("loop", 4, 2.0 * np.sin(np.pi / 3))
        # 3 chords of a unit circle; the last pose returns to the first
        assert np.allclose(np.linalg.norm(traj.poses[0].t), 1.0, atol=1e-9)
        assert np.max(np.abs(traj.poses[-1].t - traj.poses[0].t)) < 1e-6

    @pytest.mark.parametrize("shape,n", [("loop", 50), ("figure-eight", 61),
                                         ("random-walk", 40)])
    def test_equal_steps(self, shape, n):
        traj = generate_trajectory(shape, n, 0.25, seed=3)
        for i in range(n - 1):
            d = np.linalg.norm(traj.poses[i + 1].t - traj.poses[i].t)
            assert abs(d - 0.25) < 1e-9

    def test_random_walk_deterministic(self):
        a = generate_trajectory("random-walk", 30, 0.1, seed=7)
        b = generate_trajectory("random-walk", 30, 0.1, seed=7)
        for pa, pb in zip(a.poses, b.poses):
            assert np.array_equal(pa.t, pb.t) and np.array_equal(pa.q, pb.q)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            generate_trajectory("loop", 1, 0.1)
        with pytest.raises(ValueError):
            generate_trajectory("loop", 10, 0.0)
        with pytest.raises(ValueError):
            generate_trajectory("helix", 10, 0.1)
        with pytest.raises(ValueError):
            generate_trajectory("figure-eight", 6, 0.1)


class TestCorruptAbsolute:
    def test_zero_noise_is_identity(self):
        traj = generate_trajectory("loop", 20, 0.1)
        out = corrupt_absolute(traj, NoiseModel(seed=1))
        for a, b in zip(out.poses, traj.poses):
            assert np.array_equal(a.t, b.t) and np.array_equal(a.q, b.q)

    def test_translation_error_folded_normal_statistics(self):
        # |e| for e ~ N(0, sigma^2 I3) has mean sigma*sqrt(2/pi)*sqrt(2)*G(2)/G(1.5),
        # i.e. the chi distribution with 3 dof: mean = sigma * 2 sqrt(2/pi).
        sigma = 0.5
        traj = generate_trajectory("loop", 10000, 0.1)
        out = corrupt_absolute(traj, NoiseModel(abs_t_sigma=sigma, seed=9))
        errs = [np.linalg.norm(a.t - b.t) for a, b in zip(out.poses, traj.poses)]
        expected = sigma * 2.0 * np.sqrt(2.0 / np.pi)
        assert abs(np.mean(errs) - expected) / expected < 0.05

    def test_error_is_stationary_over_index(self):
        traj = generate_trajectory("loop", 10000, 0.1)
        out = corrupt_absolute(traj, NoiseModel(abs_t_sigma=0.5, seed=2))
        errs = np.array([np.linalg.norm(a.t - b.t)
                         for a, b in zip(out.poses, traj.poses)])
        windows = errs.reshape(10, 1000).mean(axis=1)
        slope = np.polyfit(np.arange(10), windows, 1)[0]
        assert abs(slope) < 0.01  # Monte-Carlo tolerance, no trend

    def test_deterministic(self):
        traj = generate_trajectory("loop", 25, 0.1)
        nm = NoiseModel(abs_t_sigma=0.3, abs_r_sigma=2.0, seed=11)
        a = corrupt_absolute(traj, nm)
        b = corrupt_absolute(traj, nm)
        for pa, pb in zip(a.poses, b.poses):
            assert np.array_equal(pa.t, pb.t) and np.array_equal(pa.q, pb.q)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(abs_t_sigma=-1.0)


class TestCorruptVo:
    def test_noiseless_integration_reproduces_truth(self):
        traj = generate_trajectory("figure-eight", 41, 0.2)
        rels = corrupt_vo(traj, NoiseModel(seed=0))
        integrated = integrate(traj.poses[0], rels)
        for a, b in zip(integrated, traj.poses):
            assert np.max(np.abs(a.t - b.t)) < 1e-9

    def test_true_relatives_match_relative_pose(self):
        traj = generate_trajectory("random-walk", 15, 0.1, seed=4)
        rels = corrupt_vo(traj, NoiseModel(seed=0))
        for i, rel in enumerate(rels):
            ref = relative_pose(traj.poses[i], traj.poses[i + 1])
            assert np.max(np.abs(rel.t - ref.t)) < 1e-12
            assert np.max(np.abs(rel.w - ref.w)) < 1e-12

    def test_bias_drift_magnitude_straight_line(self):
        # on a straight path 0.01 m bias per step accumulates to exactly 10 m
        poses = tuple(Pose(np.array([0.1 * i, 0.0, 0.0]), np.array([1.0, 0, 0, 0]))
                      for i in range(1001))
        traj = Trajectory(np.arange(1001, dtype=float), poses)
        rels = corrupt_vo(traj, NoiseModel(vo_t_bias=0.01, seed=0))
        integrated = integrate(traj.poses[0], rels)
        drift = integrated[-1].t - traj.poses[-1].t
        assert np.allclose(drift, [-10.0, 0.0, 0.0], atol=1e-9)

    def test_bias_drift_matches_integration_oracle(self):
        # drift is the rotated per-step bias accumulated through the headings
        from posefusion import quat

        traj = generate_trajectory("random-walk", 1001, 0.1, seed=3)
        rels = corrupt_vo(traj, NoiseModel(vo_t_bias=0.01, seed=0))
        integrated = integrate(traj.poses[0], rels)
        bias = np.array([0.01, 0.0, 0.0])
        expected = -sum(quat.qrotate(quat.qinv(p.q), bias) for p in traj.poses[1:])
        drift = integrated[-1].t - traj.poses[-1].t
        assert np.max(np.abs(drift - expected)) < 1e-9
        assert np.linalg.norm(drift) > 1.0

    def test_integrated_error_trends_upward_with_bias(self):
        traj = generate_trajectory("random-walk", 500, 0.1, seed=6)
        rels = corrupt_vo(traj, NoiseModel(vo_t_bias=0.02, seed=0))
        integrated = integrate(traj.poses[0], rels)
        errs = np.array([np.linalg.norm(a.t - b.t)
                         for a, b in zip(integrated, traj.poses)])
        windows = errs.reshape(10, 50).mean(axis=1)
        assert np.all(np.diff(windows) > 0)

    def test_deterministic(self):
        traj = generate_trajectory("loop", 30, 0.1)
        nm = NoiseModel(vo_t_sigma=0.05, vo_r_sigma=0.5, vo_t_bias=0.01, seed=8)
        a = corrupt_vo(traj, nm)
        b = corrupt_vo(traj, nm)
        for ra, rb in zip(a, b):
            assert np.array_equal(ra.t, rb.t) and np.array_equal(ra.w, rb.w)


class TestInterpolateGps:
    def test_exact_at_samples(self):
        track = GpsTrack(np.array([0.0, 1.0, 3.0]),
                         np.array([[0.0, 0.0], [2.0, -1.0], [4.0, 5.0]]))
        out = interpolate_gps(track, track.timestamps)
        assert np.array_equal(out, track.positions)

    def test_midpoint_is_mean(self):
        track = GpsTrack(np.array([0.0, 2.0]), np.array([[0.0, 0.0], [4.0, 6.0]]))
        assert np.allclose(interpolate_gps(track, [1.0]), [[2.0, 3.0]])

    def test_clamps_outside_range(self):
        track = GpsTrack(np.array([1.0, 2.0]), np.array([[1.0, 1.0], [2.0, 2.0]]))
        out = interpolate_gps(track, [-5.0, 10.0])
        assert np.array_equal(out, [[1.0, 1.0], [2.0, 2.0]])

    def test_matches_manual_interpolation_oracle(self, rng):
        ts = np.sort(rng.uniform(0, 10, size=8))
        ts += np.arange(8) * 1e-3  # guarantee strict increase
        track = GpsTrack(ts, rng.normal(size=(8, 2)))
        queries = rng.uniform(ts[0], ts[-1], size=20)
        out = interpolate_gps(track, queries)
        for t, xy in zip(queries, out):
            j = np.searchsorted(ts, t)
            j = min(max(j, 1), 7)
            lam = (t - ts[j - 1]) / (ts[j] - ts[j - 1])
            expected = (1 - lam) * track.positions[j - 1] + lam * track.positions[j]
            assert np.max(np.abs(xy - expected)) < 1e-12

    def test_within_bracketing_hull(self, rng):
        ts = np.arange(6, dtype=float)
        track = GpsTrack(ts, rng.normal(size=(6, 2)))
        for t in rng.uniform(0, 5, size=30):
            j = min(max(int(np.ceil(t)), 1), 5)
            lo = np.minimum(track.positions[j - 1], track.positions[j])
            hi = np.maximum(track.positions[j - 1], track.positions[j])
            xy = interpolate_gps(track, [t])[0]
            assert np.all(xy >= lo - 1e-12) and np.all(xy <= hi + 1e-12)

    def test_empty_track_rejected(self):
        with pytest.raises(ValueError):
            interpolate_gps(GpsTrack(np.array([]), np.zeros((0, 2))), [0.0])

    def test_track_rejects_unsorted(self):
        with pytest.raises(ValueError):
            GpsTrack(np.array([1.0, 1.0]), np.zeros((2, 2)))
