import math

import numpy as np
import pytest

import uwbcoop


def test_layout_and_pose():
    anchors = uwbcoop.square_anchor_layout(1.2)
    assert anchors.shape == (4, 3)
    np.testing.assert_allclose(anchors.mean(axis=0), 0.0, atol=1e-12)
    p = uwbcoop.apply_pose(uwbcoop.Pose([0.0, 0.0, 0.0], math.pi / 4), [0.2, 0.0, 0.1])
    np.testing.assert_allclose(p, [0.141421, 0.141421, 0.1], atol=1e-6)


def test_noiseless_position_recovery():
    anchors = uwbcoop.square_anchor_layout(12.0)
    layout = uwbcoop.TransceiverLayout(np.zeros((1, 3)), anchors)
    ms = uwbcoop.sweep(layout, uwbcoop.Pose([2.0, 1.0, 10.0], 0.0),
                       uwbcoop.NoiseModel(sigma=0.0), 0.0, uwbcoop.Rng(1))
    assert len(ms) == 4
    est = uwbcoop.solve_position(ms, anchors, [0.0, 0.0, 5.0])
    assert est.converged
    np.testing.assert_allclose(est.position, [2.0, 1.0, 10.0], atol=1e-6)


def test_pose_and_errors():
    anchors = uwbcoop.square_anchor_layout(12.0)
    two = uwbcoop.TransceiverLayout([[0.2, 0, 0], [-0.2, 0, 0]], anchors)
    truth = uwbcoop.Pose([0.0, 0.0, 10.0], 0.5)
    ms = uwbcoop.sweep(two, truth, uwbcoop.NoiseModel(sigma=0.0), 0.0, uwbcoop.Rng(2))
    est = uwbcoop.solve_pose(ms, two, uwbcoop.Pose([0.0, 0.0, 8.0], 0.4))
    assert abs(est.pose.yaw - 0.5) < 1e-5

    one = uwbcoop.TransceiverLayout([[0, 0, 0]], anchors)
    ms1 = uwbcoop.sweep(one, truth, uwbcoop.NoiseModel(sigma=0.0), 0.0, uwbcoop.Rng(2))
    with pytest.raises(uwbcoop.YawUnobservableError):
        uwbcoop.solve_pose(ms1, one, truth)
    with pytest.raises(uwbcoop.UnderdeterminedError):
        uwbcoop.solve_position(ms1[:2], anchors, [0.0, 0.0, 1.0])


def test_flight_and_metrics():
    layout = uwbcoop.TransceiverLayout(np.zeros((1, 3)), uwbcoop.square_anchor_layout(12.0))
    rec = uwbcoop.run_flight(uwbcoop.Trajectory.square(8.0, 10.0), layout,
                             uwbcoop.NoiseModel(sigma=0.1, seed=3), uwbcoop.FeedbackSource.uwb)
    assert len(rec) == rec.true_position.shape[0] == rec.estimate.shape[0]
    nav = uwbcoop.navigation_errors(rec)
    stats = uwbcoop.box_stats(nav["xy"])
    assert stats.median < 0.15
    assert np.all(np.isnan(nav["z"]))
    pos = uwbcoop.positioning_errors(rec)
    assert np.all(pos["xy"] >= 0.0)


def test_box_stats():
    b = uwbcoop.box_stats(list(range(1, 101)))
    assert (b.median, b.q1, b.q3) == (50.5, 25.75, 75.25)
    assert uwbcoop.box_stats([0.5, 1.5]).fraction_above(1.0) == 0.5


def test_tracking():
    rng = uwbcoop.Rng(4)
    frame = uwbcoop.synth_cloud([5.0, 0.0, 10.0], 50, 0.1, 0, [-10, -10, 0], [10, 10, 20], rng)
    state = uwbcoop.track_step(frame, uwbcoop.TrackState([5.0, 0.0, 10.0]), k_neighbors=50)
    np.testing.assert_allclose(state.position, frame.points.mean(axis=0), atol=1e-9)
    far = uwbcoop.PointCloudFrame([[20.0, 0.0, 10.0]])
    with pytest.raises(uwbcoop.TrackLostError):
        uwbcoop.track_step(far, state)


def test_setpoints():
    t, p = uwbcoop.generate_setpoints(uwbcoop.Trajectory.vertical(30.0), 0.1)
    k = int(np.argmin(np.abs(t - 15.0)))
    np.testing.assert_allclose(p[k], [0.0, 0.0, 15.0], atol=1e-12)
