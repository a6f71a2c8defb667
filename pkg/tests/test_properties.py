import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from pegsim.contact import respond
from pegsim.geometry import FeatureVector, feature_from_pose, pose_from_feature
from pegsim.sim import SIM_QUADRATURE, nominal_geometry
from pegsim.states import XOZ, classify_features, classify_responses
from pegsim.verify import inside_exact_clearance

CLEAR = nominal_geometry("clearance")
INTER = nominal_geometry("interference")

offsets = st.floats(-0.1e-3, 0.1e-3)
tilts = st.floats(-math.radians(2.0), math.radians(2.0))
depths = st.floats(0.1e-3, 10e-3)
fits = st.sampled_from([CLEAR, INTER])
SETTINGS = settings(max_examples=60, deadline=None)


@SETTINGS
@given(fits, offsets, offsets, depths, tilts, tilts)
def test_axial_force_and_friction_bound(g, dx, dy, l, tx, ty):
    w = respond(FeatureVector(dx, dy, l, tx, ty), g, SIM_QUADRATURE)
    assert w.F_z >= 0
    assert g.mu * math.hypot(w.F_x, w.F_y) <= w.F_z * (1 + 1e-9) + 1e-12


@SETTINGS
@given(fits, offsets, depths, tilts)
def test_planar_mirror(g, d, l, t):
    a = respond(FeatureVector(d_x=d, l=l, theta_y=t), g, SIM_QUADRATURE)
    b = respond(FeatureVector(d_x=-d, l=l, theta_y=-t), g, SIM_QUADRATURE)
    n = max(a.norm(), 1e-300)
    assert abs(a.F_x + b.F_x) <= 1e-9 * n
    assert abs(a.M_y + b.M_y) <= 1e-9 * n
    assert abs(a.F_z - b.F_z) <= 1e-9 * n


@SETTINGS
@given(offsets, depths, tilts)
def test_exact_clearance_is_silent(d, l, t):
    if inside_exact_clearance(d, l, t, CLEAR):
        assert respond(FeatureVector(d_x=d, l=l, theta_y=t), CLEAR, SIM_QUADRATURE).norm() == 0.0


@SETTINGS
@given(offsets, offsets, depths, tilts, tilts)
def test_pose_round_trip(dx, dy, l, tx, ty):
    x = FeatureVector(dx, dy, l, tx, ty)
    y = feature_from_pose(pose_from_feature(x))
    assert np.max(np.abs(y.as_array() - x.as_array())) <= 1e-12


@SETTINGS
@given(fits, offsets, depths, tilts)
def test_feature_classifier_mirror(g, d, l, t):
    assert classify_features(XOZ, -d, l, -t, g) is classify_features(XOZ, d, l, t, g).mirror()


@SETTINGS
@given(st.floats(-100, 100), st.floats(0.1, 100), st.floats(-2, 2), depths)
def test_response_classifier_mirror(F, F_z, M, l):
    a = classify_responses(XOZ, F, F_z, M, l, CLEAR, strict=False)
    assert classify_responses(XOZ, -F, F_z, -M, l, CLEAR, strict=False) is a.mirror()
