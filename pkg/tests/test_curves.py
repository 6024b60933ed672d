import math

import numpy as np
import pytest

from earring import curves as cv
from earring import pillowcase as pc


def test_loop_closure_lattice():
    L = cv.circle_loop((1.5, 1.5), 0.4)
    assert L.closure == "lattice"
    assert L.check_spacing(0.05)


def test_loop_closure_iota():
    C = cv.corner_circle(1, 0.1)
    assert C.closure == "iota"


def test_bad_loop_rejected():
    with pytest.raises(cv.CurveError):
        cv.Curve("loop", np.array([[0.0, 0.0], [1.0, 1.0]]))


def test_arc_endpoints():
    A = cv.line_arc((0, 0), (math.pi, 0))
    assert A.corners == (0, 2)
    with pytest.raises(cv.CurveError):
        cv.Curve("arc", np.array([[0.1, 0.0], [1.0, 0.0]]))


def test_resample_preserves_ends():
    A = cv.line_arc((0, 0), (math.pi, math.pi), n=17)
    B = A.resampled(0.01)
    assert np.allclose(B.samples[0], A.samples[0])
    assert np.allclose(B.samples[-1], A.samples[-1])
    assert B.check_spacing(0.011)


def test_doubled_arc_lift_closes():
    A = cv.line_arc((0, 0), (math.pi, 0), n=33)
    closed = cv.doubled_arc_lift(A)
    disp = closed[-1] - closed[0]
    assert np.allclose(disp - np.round(disp / (2 * math.pi)) * 2 * math.pi, 0,
                       atol=1e-12)


def test_to_canonical_matches_normalize():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-10, 10, size=(200, 2))
    canon = cv.to_canonical(pts)
    for (g, t), (cg, ct) in zip(pts, canon):
        p = pc.normalize(g, t)
        assert pc.dist(p, pc.normalize(cg, ct)) < 1e-9


def test_unwrap_continuous():
    ang = np.linspace(0, 2 * math.pi, 100)
    canon = cv.to_canonical(np.stack([1.5 + 0.3 * np.cos(ang),
                                      1.5 + 0.3 * np.sin(ang)], axis=-1))
    lift = cv.unwrap_to_lift(canon)
    steps = np.linalg.norm(np.diff(lift, axis=0), axis=-1)
    assert np.max(steps) < 0.1


def test_hausdorff_on_shifted_clouds():
    a = np.stack([np.linspace(0.5, 1.5, 50), np.full(50, 1.0)], axis=-1)
    b = a + np.array([0.0, 0.25])
    assert cv.hausdorff(a, b) == pytest.approx(0.25, abs=1e-6)


def test_projector_signed_distance():
    line = np.stack([np.linspace(0, 3, 40), np.zeros(40)], axis=-1)
    proj = cv.PolylineProjector(line, closed=False)
    sd, _, normal, _ = proj.project(np.array([1.0, 0.2]))
    assert abs(abs(sd) - 0.2) < 1e-12
    sd2, _, _, _ = proj.project(np.array([1.0, -0.2]))
    assert abs(sd + sd2) < 1e-12  # opposite sides, opposite signs


def test_curve_json_roundtrip():
    A = cv.line_arc((0, 0), (math.pi, math.pi), n=9)
    B = cv.Curve.loads(A.dumps())
    assert B.kind == "arc" and B.corners == (0, 3)
    assert np.allclose(A.samples, B.samples)
