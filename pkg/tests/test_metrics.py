import numpy as np
import pytest

from posefusion import quat
from posefusion.metrics import ErrorReport, aggregate, compare, parse_report, render_report
from posefusion.pose import Pose, Trajectory

from conftest import random_pose


def _traj(poses):
    return Trajectory(np.arange(len(poses), dtype=float), tuple(poses))


def _shifted(gt, offsets):
    return _traj([Pose(p.t + np.array([dx, 0.0, 0.0]), p.q)
                  for p, dx in zip(gt.poses, offsets)])


class TestCompare:
    def test_identical_trajectories(self, rng):
        gt = _traj([random_pose(rng) for _ in range(10)])
        rep = compare(gt, gt)
        assert rep.median_t == 0.0 and rep.mean_t == 0.0
        assert rep.median_r == 0.0 and rep.mean_r == 0.0

    def test_known_errors_one_two_three(self, rng):
        gt = _traj([random_pose(rng) for _ in range(3)])
        rep = compare(_shifted(gt, [1.0, 2.0, 3.0]), gt)
        assert rep.median_t == pytest.approx(2.0, abs=1e-12)
        assert rep.mean_t == pytest.approx(2.0, abs=1e-12)

    def test_even_count_median_is_midpoint(self, rng):
        gt = _traj([random_pose(rng) for _ in range(4)])
        rep = compare(_shifted(gt, [1.0, 2.0, 4.0, 8.0]), gt)
        assert rep.median_t == pytest.approx(3.0, abs=1e-12)

    def test_matches_sort_and_count_oracle(self, rng):
        gt = _traj([random_pose(rng) for _ in range(25)])
        est = _traj([random_pose(rng) for _ in range(25)])
        rep = compare(est, gt)
        t_err = sorted(np.linalg.norm(e.t - g.t)
                       for e, g in zip(est.poses, gt.poses))
        assert rep.median_t == pytest.approx(t_err[12], abs=1e-12)
        assert rep.mean_t == pytest.approx(np.mean(t_err), abs=1e-12)
        for m, (te, _) in enumerate(rep.per_frame):
            assert te == pytest.approx(
                np.linalg.norm(est.poses[m].t - gt.poses[m].t), abs=1e-12)
        # CDF: fraction of errors at or below each sorted threshold
        for thr, frac in rep.cdf:
            expected = sum(1 for e in t_err if e <= thr + 1e-15) / 25
            assert frac == pytest.approx(expected, abs=1e-12)

    def test_cdf_monotone_and_ends_at_one(self, rng):
        gt = _traj([random_pose(rng) for _ in range(30)])
        est = _traj([random_pose(rng) for _ in range(30)])
        for points in (None, 7, 33):
            cdf = compare(est, gt, cdf_points=points).cdf
            fracs = [f for _, f in cdf]
            assert all(b >= a for a, b in zip(fracs, fracs[1:]))
            assert fracs[-1] == 1.0

    def test_quaternion_sign_flip_invariance(self, rng):
        gt = _traj([random_pose(rng) for _ in range(8)])
        est = _traj([random_pose(rng) for _ in range(8)])
        flipped = _traj([Pose(p.t, -p.q) for p in est.poses])
        a, b = compare(est, gt), compare(flipped, gt)
        assert a.median_r == b.median_r and a.mean_r == b.mean_r

    def test_mismatched_inputs_rejected(self, rng):
        gt = _traj([random_pose(rng) for _ in range(4)])
        with pytest.raises(ValueError):
            compare(_traj([random_pose(rng) for _ in range(3)]), gt)
        other = Trajectory(np.arange(4) + 0.5,
                           tuple(random_pose(rng) for _ in range(4)))
        with pytest.raises(ValueError):
            compare(other, gt)

    def test_rotation_errors_in_degrees(self):
        q90 = quat.qexp(np.array([0.0, 0.0, np.pi / 4]))
        gt = _traj([Pose.identity()] * 1 + [Pose.identity()])
        est = _traj([Pose(np.zeros(3), q90), Pose.identity()])
        rep = compare(est, gt)
        assert rep.mean_r == pytest.approx(45.0, abs=1e-9)


class TestAggregate:
    def _report(self, median_t, mean_t, median_r=1.0, mean_r=1.0):
        return ErrorReport(median_t=median_t, median_r=median_r,
                           mean_t=mean_t, mean_r=mean_r, per_frame=[], cdf=[])

    def test_single_report_passthrough(self):
        rep = self._report(0.2, 0.3, 5.0, 6.0)
        s = aggregate([("scene-a", rep)])
        assert s.avg_median_scene == (0.2, 5.0)
        assert s.avg_median_seq == (0.2, 5.0)
        assert s.avg_mean_scene == (0.3, 6.0)
        assert s.avg_mean_seq == (0.3, 6.0)

    def test_two_reports_average(self):
        s = aggregate([("a", self._report(1.0, 1.0)), ("b", self._report(3.0, 3.0))])
        assert s.avg_median_seq[0] == pytest.approx(2.0)
        assert s.avg_median_scene[0] == pytest.approx(2.0)

    def test_grouped_fixture_hand_computation(self):
        # scene x has two sequences, scene y has one; scene average weights
        # scenes equally while the sequence average weights sequences equally
        reports = [("x", self._report(1.0, 2.0)),
                   ("x", self._report(3.0, 4.0)),
                   ("y", self._report(5.0, 6.0))]
        s = aggregate(reports)
        assert s.avg_median_seq[0] == pytest.approx((1 + 3 + 5) / 3)
        assert s.avg_mean_seq[0] == pytest.approx((2 + 4 + 6) / 3)
        assert s.avg_median_scene[0] == pytest.approx((2.0 + 5.0) / 2)
        assert s.avg_mean_scene[0] == pytest.approx((3.0 + 6.0) / 2)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])


class TestReportFormat:
    def test_round_trip(self, rng):
        gt = _traj([random_pose(rng) for _ in range(12)])
        est = _traj([random_pose(rng) for _ in range(12)])
        rep = compare(est, gt, cdf_points=9)
        back = parse_report(render_report(rep))
        assert back.median_t == rep.median_t and back.median_r == rep.median_r
        assert back.mean_t == rep.mean_t and back.mean_r == rep.mean_r
        assert back.per_frame == rep.per_frame
        assert back.cdf == rep.cdf

    def test_rendered_schema(self, rng):
        gt = _traj([random_pose(rng) for _ in range(3)])
        text = render_report(compare(gt, gt))
        lines = text.splitlines()
        assert lines[0].startswith("#")
        keys = [ln.split()[0] for ln in lines[1:]]
        assert keys[:5] == ["median_t_m", "median_r_deg", "mean_t_m", "mean_r_deg",
                            "frames"]
        assert keys.count("frame") == 3 and keys.count("cdf_t") == 3
