import math

import numpy as np
import pytest

from earring import correspondence as co
from earring import curves as cv
from earring import topology as tp

PI = math.pi


def test_disjoint_curves():
    a = cv.circle_loop((1.0, 1.0), 0.2)
    b = cv.circle_loop((2.2, 2.2), 0.2)
    rep = tp.intersection_number(a, b)
    assert rep.algebraic == 0 and rep.geometric == 0


def test_single_transverse_crossing():
    p1 = cv.Curve("path", np.array([[1.0, 1.0], [2.0, 2.0]]))
    p2 = cv.Curve("path", np.array([[1.0, 2.0], [2.0, 1.0]]))
    rep = tp.intersection_number(p1, p2)
    assert rep.geometric == 1 and abs(rep.algebraic) == 1


def test_antisymmetry_random_pairs():
    rng = np.random.default_rng(0)
    for k in range(100):
        c1 = cv.circle_loop(rng.uniform(0.8, 2.2, 2), rng.uniform(0.2, 0.6),
                            n=64, orientation=1)
        c2 = cv.circle_loop(rng.uniform(0.8, 2.2, 2), rng.uniform(0.2, 0.6),
                            n=64, orientation=-1 if k % 2 else 1)
        r12 = tp.intersection_number(c1, c2)
        r21 = tp.intersection_number(c2, c1)
        assert r12.algebraic == -r21.algebraic
        assert r12.geometric == r21.geometric


def test_iota_aware_counting():
    # a curve and the iota-image of a partner meet even if raw lifts are far
    a = cv.Curve("path", np.array([[0.3, 0.3], [0.9, 0.9]]))
    b = cv.Curve("path", np.array([[-0.3, -0.9], [-0.9, -0.3]]))  # iota lift
    rep = tp.intersection_number(a, b)
    assert rep.geometric == 1


def test_homology_basis_circles():
    for ci in range(3):
        h = tp.homology_class(cv.corner_circle(ci, 0.1))
        expected = [0, 0, 0]
        expected[ci] = 1
        assert h.coefficients() == tuple(expected)
    h3 = tp.homology_class(cv.corner_circle(3, 0.1))
    assert h3.coefficients() == (-1, -1, -1)


def test_homology_contractible_and_orientation():
    assert tp.homology_class(cv.circle_loop((1.5, 1.5), 0.2)).coefficients() == (0, 0, 0)
    h = tp.homology_class(cv.corner_circle(1, 0.1, orientation=-1))
    assert h.coefficients() == (0, -1, 0)


def test_homology_invariance_refinement_jitter():
    base = cv.corner_circle(2, 0.25)
    fine = base.resampled(0.003)
    # radial jitter keeps the involution closure intact
    ang = np.linspace(0.0, math.pi, len(base))
    rad = 0.25 + 8e-4 * np.sin(2 * ang)
    jig = cv.Curve("loop", np.array([PI, 0.0]) +
                   rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1))
    for c in (fine, jig):
        assert tp.homology_class(c).coefficients() == (0, 0, 1)


def test_fig8_homology_matches_winding_pattern():
    A0 = cv.line_arc((0, 0), (PI, 0), n=257)
    f8 = co.model_map_vdelta(A0, 0.2).components[0]
    h = tp.homology_class(f8).coefficients()
    assert h in ((1, 0, -1), (-1, 0, 1))  # opposite windings at corners 0 and 2


def test_classifier_accepts_model_arcs():
    for a, b in (((0, 0), (PI, 0)), ((0, 0), (PI, PI)), ((PI, 0), (PI, PI))):
        arc = cv.line_arc(a, b, n=257)
        out = co.model_map_vdelta(arc, 0.2)
        v = tp.classify_homology_fig8(out.components, arc, 0.2)
        assert v["is_homology_fig8"] and v["is_connected"]
        am, ap = v["counts"]["alpha_minus"], v["counts"]["alpha_plus"]
        assert abs(am[0]) == 1 and abs(ap[0]) == 1 and am[0] == -ap[0]
        assert v["counts"]["beta"] == (0, 2)


def test_classifier_rejects_doubled_loop():
    arc = cv.line_arc((0, 0), (PI, 0), n=257)
    loop = cv.circle_loop((PI / 2, PI / 2), 0.4)
    doubled = co.model_map_vdelta(loop, 0.2)
    with pytest.raises(tp.SupportViolation):
        tp.classify_homology_fig8(doubled.components, arc, 0.2, tube_radius=0.45)


def test_classifier_accepts_disconnected_pair():
    # a disconnected homology figure eight: a half-lift oval around the start
    # corner reaching past the arc midpoint (two beta crossings) plus a small
    # circle around the end corner with the opposite orientation
    arc = cv.line_arc((0, 0), (PI, 0), n=257)
    ang = np.linspace(0, math.pi, 257)
    oval = cv.Curve("loop", np.stack([1.8 * np.cos(ang),
                                      0.3 * np.sin(ang)], axis=-1))
    c2 = cv.corner_circle(2, 0.3, orientation=-1)
    v = tp.classify_homology_fig8([oval, c2], arc, 0.2)
    assert v["is_homology_fig8"] and not v["is_connected"]


def test_model_fig8_single_self_crossing():
    arc = cv.line_arc((0, 0), (PI, PI), n=257)
    f8 = co.model_map_vdelta(arc, 0.2).components[0]
    assert tp.self_intersections(f8) == 1


def test_bigons_trivial_cases():
    p1 = cv.Curve("path", np.array([[1.0, 1.0], [2.0, 2.0]]))
    p2 = cv.Curve("path", np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert tp.count_bigons(p1, p2) == 0
    c = np.array([1.4, 1.4])
    th = np.linspace(-1.2, 1.2, 120)
    seg = cv.Curve("path", np.stack([np.full(80, c[0]),
                                     c[1] + np.linspace(-1, 1, 80)], axis=-1))
    lens = cv.Curve("path", np.stack([c[0] + 0.5 - 0.8 * th ** 2, c[1] + th],
                                     axis=-1))
    assert tp.count_bigons(seg, lens) == 1


def test_bigon_panels():
    (a_plain, b_fig8), (a_fig8, b_plain) = tp.bigon_panels()
    assert tp.count_bigons(a_plain, b_fig8) == 1
    assert tp.count_bigons(a_fig8, b_plain) == 0
    # the mechanism: the doubled side carries the single visible self-crossing
    assert len(tp._self_crossing_params(a_fig8.samples)) == 1
