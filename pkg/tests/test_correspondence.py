import math

import numpy as np
import pytest

from earring import correspondence as co
from earring import curves as cv
from earring import moduli as md
from earring import pillowcase as pc
from earring import topology as tp

PI = math.pi


@pytest.fixture(scope="module")
def composed_loop():
    L = cv.circle_loop((PI / 2, PI / 2), 0.5, n=129)
    return L, co.compose_curve(L, 0.05)


@pytest.fixture(scope="module")
def composed_a0():
    A0 = cv.line_arc((0, 0), (PI, 0), n=129)
    return A0, co.compose_curve(A0, 0.19)


def test_loop_doubles(composed_loop):
    L, out = composed_loop
    assert out.component_count() == 2
    target = cv.to_canonical(L.resampled(0.004).samples)
    for comp in out.components:
        d = cv.hausdorff(cv.to_canonical(comp.resampled(0.004).samples), target)
        assert d < 0.1


def test_trace_lies_over_input(composed_loop):
    L, out = composed_loop
    for comp, prov in zip(out.components, out.provenance):
        assert np.max(prov["residual"]) < 1e-9
        base = cv.to_canonical(np.stack([prov["gamma"], prov["theta"]], axis=-1))
        d = cv.min_dist_to_samples(base, cv.to_canonical(L.resampled(0.004).samples))
        assert np.max(d) < 5e-3


def test_s_to_zero_collapse():
    # at s = 0 the restriction is the diagonal: the pushed image is the input
    L = cv.circle_loop((PI / 2, PI / 2), 0.5, n=65)
    hp, _ = md.sigma_sections(L.samples[:, 0], L.samples[:, 1])
    cg, ct, cgt = md.inner_invariants(L.samples[:, 0], L.samples[:, 1], hp, 0.0)
    g1 = np.arccos(np.clip(cg, -1, 1))
    t1 = np.arccos(np.clip(ct, -1, 1))
    flip = np.abs(np.cos(g1 - t1) - cgt) > np.abs(np.cos(g1 + t1) - cgt)
    t1 = np.where(flip, -t1, t1)
    pushed = cv.to_canonical(np.stack([g1, t1], axis=-1))
    d = cv.hausdorff(pushed, cv.to_canonical(L.samples))
    assert d < 1e-9


def test_arc_composes_to_connected_fig8(composed_a0):
    A0, out = composed_a0
    assert out.component_count() == 1
    v = tp.classify_homology_fig8(out.components, A0, 0.19)
    assert v["is_homology_fig8"] and v["is_connected"]


def test_composed_outputs_miss_corners(composed_a0):
    _, out = composed_a0
    for comp in out.components:
        c = cv.to_canonical(comp.samples)
        assert float(np.min(pc.corner_dist(c[:, 0], c[:, 1]))) > 0.1


def test_compose_rejects_bad_s():
    L = cv.circle_loop((PI / 2, PI / 2), 0.5, n=65)
    with pytest.raises(ValueError):
        co.compose_curve(L, 0.0)
    with pytest.raises(ValueError):
        co.compose_curve(L, 1.0)


def test_model_map_loop_doubling_exact():
    L = cv.circle_loop((PI / 2, PI / 2), 0.5, n=129)
    out = co.model_map_vdelta(L, 0.2)
    assert out.component_count() == 2
    for comp in out.components:
        assert np.allclose(comp.samples, L.samples)


def test_model_map_loop_in_disk_rejected():
    L = cv.circle_loop((0.3, 0.3), 0.2, n=65)
    with pytest.raises(co.BadDelta):
        co.model_map_vdelta(L, 0.4)


def test_model_map_radial_arc_wraps_once():
    arc = cv.line_arc((0, 0), (PI, 0), n=257)
    out = co.model_map_vdelta(arc, 0.2)
    f8 = out.components[0]
    h = tp.homology_class(f8).coefficients()
    assert h in ((1, 0, -1), (-1, 0, 1))


def test_model_map_fig8_meets_alpha_once(composed_a0=None):
    arc = cv.line_arc((0, 0), (PI, 0), n=257)
    v = tp.classify_homology_fig8(co.model_map_vdelta(arc, 0.2).components,
                                  arc, 0.2)
    assert v["counts"]["alpha_minus"][1] == 1
    assert v["counts"]["alpha_plus"][1] == 1


def test_compare_to_model_small_s():
    arc = cv.line_arc((0, 0), (PI, 0), n=129)
    d = co.compare_to_model(arc, 1e-3, 0.2)
    assert d < 0.2 / 100


def test_pairing_agreement_with_model():
    arcs = [cv.line_arc((0, 0), (PI, 0), n=257),
            cv.line_arc((0, 0), (PI, PI), n=257),
            cv.line_arc((0, 0), (0, PI), n=257)]
    M_model = np.zeros((3, 3), dtype=int)
    M_comp = np.zeros((3, 3), dtype=int)
    for i, A in enumerate(arcs):
        f8 = co.model_map_vdelta(A, 0.2).components[0]
        comp = co.compose_curve(A, 0.19)
        for j, B in enumerate(arcs):
            M_model[i, j] = tp.intersection_number(f8, B).algebraic
            M_comp[i, j] = sum(abs(tp.intersection_number(c, B).algebraic)
                               for c in comp.components)
    assert M_model.tolist() == [[2, 1, 1], [1, 2, 1], [1, 1, 2]]
    assert np.abs(M_comp).tolist() == [[2, 1, 1], [1, 2, 1], [1, 1, 2]]


def test_counts_unknot_and_hopf():
    assert co.count_generalized_points(
        cv.line_arc((0, 0), (PI, 0)), cv.line_arc((0, 0), (PI, PI)), 0.05) == 1
    assert co.count_generalized_points(
        cv.line_arc((0, 0), (PI, 0)), cv.line_arc((0, 0), (PI, -2 * PI)), 0.05) == 2
    assert co.count_generalized_points(
        cv.line_arc((0, 0), (PI, -PI)), cv.line_arc((0, 0), (PI, PI)), 0.05) == 2


def test_counts_regularity_reported():
    sols = co.count_generalized_points(
        cv.line_arc((0, 0), (PI, 0)), cv.line_arc((0, 0), (PI, PI)), 0.05,
        details=True)
    assert len(sols) == 1 and sols[0]["sv"] > 1e-6


def test_determinism():
    A0 = cv.line_arc((0, 0), (PI, 0), n=65)
    a = co.compose_curve(A0, 0.1)
    b = co.compose_curve(A0, 0.1)
    assert len(a.components) == len(b.components)
    for ca, cb in zip(a.components, b.components):
        assert np.array_equal(ca.samples, cb.samples)
