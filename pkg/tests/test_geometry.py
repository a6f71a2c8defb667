import math

import mpmath as mp
import numpy as np
import pytest

from pegsim.errors import DomainError
from pegsim.geometry import (
    FeatureVector,
    HoleFrame,
    PolarTilt,
    axis_direction,
    axis_tilt,
    decompose,
    feature_from_pose,
    from_axis_angles,
    pose_from_feature,
    recompose,
    to_axis_angles,
)

D = math.radians


def test_feature_vector_domain():
    with pytest.raises(DomainError):
        FeatureVector(l=-1e-3)
    with pytest.raises(DomainError):
        FeatureVector(theta_x=math.pi / 2)
    x = FeatureVector(1, 2, 3, 0.1, 0.2)
    assert FeatureVector.from_array(x.as_array()) == x
    assert x.replace(l=5).l == 5


def test_to_axis_angles_trivial():
    assert to_axis_angles(PolarTilt(0.0, 1.0)) == (0.0, 0.0)
    tx, ty = to_axis_angles(PolarTilt(0.1, 0.0))
    assert tx == pytest.approx(0.1, abs=1e-15) and ty == 0.0
    with pytest.raises(DomainError):
        PolarTilt(math.pi / 2, 0.0)


def test_to_axis_angles_oracle():
    mp.mp.dps = 40
    t, p = mp.radians(2), mp.radians(45)
    expect = mp.atan(mp.tan(t) * mp.cos(p))
    tx, ty = to_axis_angles(PolarTilt(D(2), D(45)))
    assert tx == pytest.approx(float(expect), abs=1e-15)
    assert ty == pytest.approx(float(expect), abs=1e-15)
    # 1.41434 deg is a low-precision reference; the exact value is 1.414501 deg
    assert math.degrees(tx) == pytest.approx(1.41434, abs=5e-4)


def test_from_axis_angles():
    t = from_axis_angles(0.0, 0.0)
    assert (t.theta, t.phi) == (0.0, 0.0)
    t = from_axis_angles(0.1, 0.0)
    assert t.theta == pytest.approx(0.1, abs=1e-15) and t.phi == 0.0
    a = to_axis_angles(PolarTilt(D(2), D(45)))[0]
    t = from_axis_angles(a, a)
    assert t.theta == pytest.approx(D(2), abs=1e-14)
    assert t.phi == pytest.approx(D(45), abs=1e-14)
    # phi stays in (-pi, pi]
    assert from_axis_angles(-0.1, -0.0).phi == pytest.approx(math.pi)


def test_small_angle_limit():
    rng = np.random.default_rng(0)
    for _ in range(200):
        th, ph = rng.uniform(0, D(1)), rng.uniform(-math.pi, math.pi)
        tx, ty = to_axis_angles(PolarTilt(th, ph))
        assert abs(tx - th * math.cos(ph)) <= 1e-6
        assert abs(ty - th * math.sin(ph)) <= 1e-6


def test_axis_tilt_plane_pairing():
    # theta_y tilts the peg in X-O-Z: phi = 0 and the axis leans toward +X
    t = axis_tilt(FeatureVector(theta_y=D(2)))
    assert t.theta == pytest.approx(D(2)) and t.phi == 0.0
    assert axis_direction(FeatureVector(theta_y=D(2)))[0] > 0
    t = axis_tilt(FeatureVector(theta_x=D(2)))
    assert t.phi == pytest.approx(math.pi / 2)


def test_decompose():
    x = FeatureVector(1, 2, 3, 4 * 0.1, 5 * 0.1)
    assert decompose(x) == ((1, 3, 0.5), (2, 3, 0.4))
    assert decompose(FeatureVector()) == ((0, 0, 0), (0, 0, 0))
    x = FeatureVector(0.05e-3, 0.0, 1e-3, 0.0, D(2))
    assert decompose(x)[0] == (0.05e-3, 1e-3, D(2))
    assert recompose(*decompose(x)) == x
    with pytest.raises(DomainError):
        recompose((0, 1, 0), (0, 2, 0))


def test_pose_examples():
    assert feature_from_pose(np.eye(4)) == FeatureVector()
    P = np.eye(4)
    P[:3, 3] = (0.05e-3, 0.0, -1e-3)
    x = feature_from_pose(P)
    assert x.d_x == pytest.approx(0.05e-3, abs=1e-15)
    assert x.l == pytest.approx(1e-3, abs=1e-15)
    assert x.theta_x == x.theta_y == 0.0
    Q = pose_from_feature(FeatureVector(l=2e-3))
    assert np.allclose(Q[:3, :3], np.eye(3)) and Q[2, 3] == pytest.approx(-2e-3)


def test_pose_round_trip():
    rng = np.random.default_rng(1)
    frame = HoleFrame(origin=(0.1, -0.2, 0.3), z_axis=(0.0, 0.0, 1.0), x_axis=(0.0, 1.0, 0.0))
    for _ in range(1000):
        x = FeatureVector(
            rng.uniform(-1e-4, 1e-4), rng.uniform(-1e-4, 1e-4), rng.uniform(0, 1e-2),
            rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
        )
        y = feature_from_pose(pose_from_feature(x, frame), frame)
        assert np.max(np.abs(y.as_array() - x.as_array())) <= 1e-12


def test_pose_degenerate():
    P = np.eye(4)
    P[:3, :3] = [[1, 0, 0], [0, 0, -1], [0, 1, 0]]
    with pytest.raises(DomainError):
        feature_from_pose(P)
    with pytest.raises(DomainError):
        HoleFrame(z_axis=(0.0, 0.0, 2.0))


def test_before_contact_offsets_at_mouth():
    # tip above the surface: l clamps to 0 and offsets are read at the mouth
    x = FeatureVector(1e-4, 0.0, 0.0, 0.0, D(1))
    P = pose_from_feature(x)
    P[2, 3] += 1e-3
    y = feature_from_pose(P)
    assert y.l == 0.0
    assert y.d_x == pytest.approx(1e-4 - 1e-3 * math.tan(D(1)), abs=1e-15)
