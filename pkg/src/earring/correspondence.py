"""Action of the moduli correspondence on immersed curves in the pillowcase.

compose_curve traces the preimage of a curve under the outer restriction
inside the gauge-fixed moduli space by pseudo-arclength continuation of

    { H1 = 0, H2 = 0, signed-distance-to-curve = 0 }

in the four unknowns (gamma, theta, two sphere coordinates of h), then
pushes the trace through the inner restriction.  model_map_vdelta applies
the explicit local Dehn-twist model instead: doubling away from the corner
disks and one full twist per corner disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import curves as cv
from . import moduli as md
from . import pillowcase as pc
from .curves import Curve

TWO_PI = 2.0 * math.pi

DEFAULT_TWIST_SIGNS = (1, 1, 1, 1)


class ContinuationStall(RuntimeError):
    pass


class FoldUnresolved(RuntimeError):
    pass


class NonTransverse(RuntimeError):
    pass


class BadDelta(ValueError):
    pass


@dataclass
class ComposeOptions:
    step_min: float = 1e-4
    step_max: float = 5e-2
    step_init: float = 1e-2
    corrector_tol: float = 1e-12
    corrector_accept: float = 1e-10
    max_steps: int = 40000
    n_seeds: int = 8
    closure_tol: float = 1e-5
    residual_tol: float = 1e-9


@dataclass
class ComposedCurve:
    components: list            # list[Curve] in the inner pillowcase
    provenance: list            # per component: dict of arrays gamma,theta,h,res
    s: float
    input_curve: Curve
    is_connected: bool

    def component_count(self):
        return len(self.components)


# ---------------------------------------------------------------------------
# Continuation engine


class _System:
    """Residuals and complex-step Jacobian of {H1, H2, sd} on T x S^2."""

    def __init__(self, projector, s):
        self.proj = projector
        self.s = s

    def res_and_jac(self, g, t, h):
        """Residual (3,) and Jacobian (3, 4) in (dgamma, dtheta, du, dv)."""
        sd, _, normal, _ = self.proj.project(np.array([g, t]))
        e1, e2 = md._tangent_frame(h)
        eps = md.CS_STEP

        # one batched complex evaluation: value plus the four step columns
        gg = np.array([g, g + 1j * eps, g, g, g])
        tt = np.array([t, t, t + 1j * eps, t, t])
        hh = np.stack([h, h, h, h + 1j * eps * e1, h + 1j * eps * e2])
        hh = hh / np.sqrt(np.sum(hh * hh, axis=-1))[:, None]
        h1, h2 = md.eval_H(gg, tt, hh, self.s)
        res = np.array([h1[0].real, h2[0].real, sd])
        jac = np.array([
            [h1[1].imag / eps, h1[2].imag / eps, h1[3].imag / eps, h1[4].imag / eps],
            [h2[1].imag / eps, h2[2].imag / eps, h2[3].imag / eps, h2[4].imag / eps],
            [normal[0], normal[1], 0.0, 0.0],
        ])
        return res, jac, (e1, e2)


def _to5(t4, frame):
    """Tangent 4-vector in a local sphere frame -> frame-independent 5-vector."""
    e1, e2 = frame
    return np.concatenate([t4[:2], t4[2] * e1 + t4[3] * e2])


def _to4(t5, frame):
    e1, e2 = frame
    t4 = np.array([t5[0], t5[1], np.dot(t5[2:], e1), np.dot(t5[2:], e2)])
    n = np.linalg.norm(t4)
    return t4 / n if n > 0 else t4


def _tangent5(jac, frame, prev5=None):
    _, sv, vt = np.linalg.svd(jac)
    if sv[-1] < 1e-10:
        raise NonTransverse(f"Jacobian rank drop (smallest singular value {sv[-1]:.2e})")
    t5 = _to5(vt[-1], frame)
    if prev5 is not None and np.dot(t5, prev5) < 0:
        t5 = -t5
    return t5


def _apply(y, delta, frame):
    g, t, h = y
    e1, e2 = frame
    hq = h + delta[2] * e1 + delta[3] * e2
    hq = hq / np.linalg.norm(hq)
    return (g + delta[0], t + delta[1], hq)


def _corrector(system, y, tangent5=None, max_iter=12):
    for _ in range(max_iter):
        res, jac, frame = system.res_and_jac(*y)
        if np.max(np.abs(res)) < 1e-13:
            return y, res
        if tangent5 is None:
            delta, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        else:
            aug = np.vstack([jac, _to4(tangent5, frame)])
            rhs = np.concatenate([-res, [0.0]])
            delta = np.linalg.solve(aug, rhs)
        y = _apply(y, delta, frame)
    res, _, _ = system.res_and_jac(*y)
    return y, res


def _ydist(y1, y2):
    dg = y1[0] - y2[0]
    dt = y1[1] - y2[1]
    dg -= np.round(dg / TWO_PI) * TWO_PI
    dt -= np.round(dt / TWO_PI) * TWO_PI
    return math.hypot(dg, dt) + float(np.linalg.norm(y1[2] - y2[2]))


def _y_iota(y):
    g, t, h = md.iota_hat(y[0], y[1], y[2])
    return (float(g), float(t), h)


def _ydist_quotient(y1, y2):
    """Distance between gauge-fixed points modulo the extended involution."""
    return min(_ydist(y1, y2), _ydist(y1, _y_iota(y2)))


def trace_component(system, y0, opts):
    """Pseudo-arclength trace of one closed solution component through y0.

    Steps whose tangent rotates by more than 60 degrees are rejected and the
    step is halved: the solution curve folds over the base near the corners,
    and jumping across a fold would flip the traversal direction.
    """
    y, res = _corrector(system, y0)
    if np.max(np.abs(res)) > opts.corrector_accept:
        raise ContinuationStall(f"seed corrector residual {np.max(np.abs(res)):.2e}")
    samples = [y]
    _, jac, frame = system.res_and_jac(*y)
    tan = _tangent5(jac, frame)
    tan0 = tan.copy()
    ds = opts.step_init
    far = 0.0
    for _step in range(opts.max_steps):
        while True:
            y_pred = _apply(y, ds * _to4(tan, frame), frame)
            y_new, res_new = _corrector(system, y_pred, tangent5=tan)
            if np.max(np.abs(res_new)) <= opts.corrector_accept:
                _, jac_new, frame_new = system.res_and_jac(*y_new)
                tan_new = _tangent5(jac_new, frame_new, prev5=tan)
                if np.dot(tan_new, tan) >= 0.5:
                    break
            ds *= 0.5
            if ds < opts.step_min:
                raise FoldUnresolved(
                    f"step underflow after {_step} steps near "
                    f"({y[0]:.3f}, {y[1]:.3f})")
        y, tan, frame = y_new, tan_new, frame_new
        samples.append(y)
        d0 = _ydist(y, samples[0])
        far = max(far, d0)
        if far > 6 * opts.step_max and d0 < max(opts.closure_tol, 1.2 * ds):
            if np.dot(tan, tan0) > 0.9:
                samples.append(samples[0])
                return samples
        ds = min(ds * 1.3, opts.step_max)
    raise ContinuationStall(f"no closure after {opts.max_steps} steps")


def _push_component(samples, s, opts):
    """Restrict a traced component to the inner pillowcase as a Curve.

    A trace invariant under the extended involution covers its image in the
    quotient twice; it is cut at the half period (the point closest to the
    involution image of the start, which lies on the component exactly).
    """
    n = len(samples) - 1
    y_flip = _y_iota(samples[0])
    dists = [_ydist(y_flip, samples[k]) for k in range(n)]
    kmin = int(np.argmin(dists))
    doubled = dists[kmin] < 3 * opts.step_max and n // 3 <= kmin <= 2 * n // 3 + 1
    if doubled:
        pts = samples[: kmin + 1] + [y_flip]
    else:
        pts = samples

    G = np.array([y[0] for y in pts])
    T = np.array([y[1] for y in pts])
    H = np.stack([y[2] for y in pts])
    f2, f3 = md.eval_F(G, T, H, s)
    res = np.maximum(np.abs(f2), np.abs(f3))
    if np.max(res) > opts.residual_tol:
        raise ContinuationStall(f"pushed sample residual {np.max(res):.2e}")

    cg, ct, cgt = md.inner_invariants(G, T, H, s)
    g1 = np.arccos(np.clip(cg, -1.0, 1.0))
    t1 = np.arccos(np.clip(ct, -1.0, 1.0))
    flip = np.abs(np.cos(g1 - t1) - cgt) > np.abs(np.cos(g1 + t1) - cgt)
    t1 = np.where(flip, -t1, t1)
    canon = cv.to_canonical(np.stack([g1, t1 % TWO_PI], axis=-1))
    lift = cv.unwrap_to_lift(canon)
    curve = Curve("loop", lift)
    prov = {"gamma": G, "theta": T, "h": H,
            "residual": res, "doubled_upstairs": doubled}
    return curve, prov


def _fiber_at(g, t, s, branch):
    hp, hm = md.sigma_sections(g, t)
    seed = hp if branch > 0 else hm
    stages = [x for x in (0.05, 0.1, 0.15) if x < abs(s)] + [abs(s)]
    h = np.asarray(seed, dtype=float)
    for stage in stages:
        sgn = math.copysign(stage, s) if s != 0 else stage
        h, r, ok = md.newton_fiber(np.array([g]), np.array([t]), h[None, :] if h.ndim == 1 else h, sgn)
        h = h[0] if h.ndim == 2 else h
        if not ok.all():
            return None
    return h


def compose_curve(curve, s, opts=None):
    """Compose an immersed curve with the moduli correspondence at parameter s.

    Loops away from the corners yield two closed components close to the
    input; arcs with corner endpoints yield closed components forming a
    homology figure eight supported near the arc.
    """
    opts = opts or ComposeOptions()
    if not (0 < s < math.pi / 4):
        raise ValueError("s must lie in (0, pi/4)")
    fine = curve.resampled(min(0.02, curve.length() / 64))
    lift = cv.constraint_lift(fine)
    disp = lift[-1] - lift[0]
    if np.linalg.norm(disp) > 1e-9:
        tiled = np.concatenate([lift[:-1] - disp, lift[:-1], lift + disp], axis=0)
    else:
        tiled = lift
    projector = cv.PolylineProjector(tiled, closed=True)
    system = _System(projector, s)

    total = fine.length() if curve.kind == "loop" else 2 * fine.length()
    seg = np.linalg.norm(np.diff(lift, axis=0), axis=-1)
    cumlen = np.concatenate([[0.0], np.cumsum(seg)])

    components, provenance = [], []
    reps = []
    for frac in np.linspace(0.08, 0.92, opts.n_seeds):
        u = frac * cumlen[-1]
        k = int(np.searchsorted(cumlen, u))
        k = min(max(k, 1), len(lift) - 1)
        base = lift[k]
        if pc.corner_dist(base[0], base[1]) < max(0.05, 2.5 * s):
            continue
        for branch in (+1, -1):
            h = _fiber_at(base[0], base[1], s, branch)
            if h is None:
                continue
            y, seed_res = _corrector(system, (float(base[0]), float(base[1]), h))
            if np.max(np.abs(seed_res)) > opts.corrector_accept:
                continue
            if any(min(_ydist_quotient(y, q) for q in rep) < 3 * opts.step_max
                   for rep in reps):
                continue
            try:
                samples = trace_component(system, y, opts)
            except (ContinuationStall, NonTransverse):
                continue
            reps.append(samples)
            comp, prov = _push_component(samples, s, opts)
            components.append(comp)
            provenance.append(prov)
    if not components:
        raise ContinuationStall("no component could be traced from any seed")

    # definitional check: the trace projects onto the input curve
    for prov in provenance:
        worst = 0.0
        for g, t in zip(prov["gamma"], prov["theta"]):
            sd, _, _, _ = projector.project(np.array([g, t]))
            worst = max(worst, abs(sd))
        if worst > 1e-6:
            raise ContinuationStall(f"trace left the input curve by {worst:.2e}")

    return ComposedCurve(components, provenance, s, curve,
                         is_connected=len(components) == 1)


# ---------------------------------------------------------------------------
# The model map


def twist_angle_profile(t):
    """Smooth non-decreasing [0, 2pi] profile with value pi and slope > 0 at 0."""
    t = np.asarray(t, dtype=float)
    raw = math.pi * (1.0 + np.tanh(6.0 * t) / math.tanh(6.0))
    return np.clip(raw, 0.0, TWO_PI)


def radial_dip_profile(t):
    """Smooth [1/2, 1] radial profile with a single minimum at 0, 1 at both ends."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    return 0.5 + 0.5 * a * a * (3.0 - 2.0 * a)


def _strand_normals(points):
    d = np.gradient(points, axis=0)
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    return np.stack([-d[:, 1], d[:, 0]], axis=-1)


def _cap(corner_lift, p_from, p_to, sweep_target, delta, n=120):
    """Corner cap from p_from to p_to at radii ~ [delta/2, delta].

    The angular course follows the twist profile, sweeping by the 2*pi-branch
    of (angle(p_to) - angle(p_from)) nearest to sweep_target.
    """
    v1 = p_from - corner_lift
    v2 = p_to - corner_lift
    b1 = math.atan2(v1[1], v1[0])
    b2 = math.atan2(v2[1], v2[0])
    r1, r2 = np.linalg.norm(v1), np.linalg.norm(v2)
    dbeta = b2 - b1
    dbeta += TWO_PI * round((sweep_target - dbeta) / TWO_PI)
    ts = np.linspace(-1.0, 1.0, n)
    ang = b1 + dbeta * twist_angle_profile(ts) / TWO_PI
    u = (ts + 1.0) / 2.0
    rad = delta * radial_dip_profile(ts) + (1 - u) * (r1 - delta) + u * (r2 - delta)
    pts = corner_lift + rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    pts[0], pts[-1] = p_from, p_to
    return pts


def model_map_vdelta(curve, delta, twist_signs=DEFAULT_TWIST_SIGNS, offset=None):
    """Explicit Dehn-twist model of the correspondence action.

    Loops away from the corner disks are doubled exactly.  Arcs are doubled
    outside the corner disks (with a small transversality offset) and capped
    inside each disk by one full twist, producing a figure eight; the twist
    signs are per-corner configuration.
    """
    if not (0 < delta < math.pi / 4):
        raise BadDelta("delta must lie in (0, pi/4)")
    if curve.kind == "loop":
        if float(np.min(pc.corner_dist(curve.samples[:, 0], curve.samples[:, 1]))) < delta:
            raise BadDelta("loop enters a corner disk")
        return ComposedCurve(
            [Curve("loop", curve.samples.copy()), Curve("loop", curve.samples.copy())],
            [{}, {}], 0.0, curve, is_connected=False)
    if curve.kind != "arc":
        raise BadDelta("model map acts on loops and arcs")

    offset = delta / 400.0 if offset is None else offset
    fine = curve.resampled(min(0.01, delta / 25.0))
    pts = fine.samples
    c0 = pts[0]
    c1 = pts[-1]
    r0 = np.linalg.norm(pts - c0, axis=-1)
    r1 = np.linalg.norm(pts - c1, axis=-1)
    inside0 = r0 < delta
    inside1 = r1 < delta
    mid_mask = ~(inside0 | inside1)
    if not np.any(mid_mask):
        raise BadDelta("arc is not delta-separated: no samples outside corner disks")
    i0 = int(np.argmax(mid_mask))                    # first outside sample
    i1 = len(pts) - 1 - int(np.argmax(mid_mask[::-1]))
    if np.any(~mid_mask[i0:i1 + 1]):
        raise BadDelta("arc re-enters a corner disk between its ends")

    def cut(idx_in, idx_out, center):
        # exact radius-delta point between consecutive samples
        a, b = pts[idx_in], pts[idx_out]
        ra, rb = np.linalg.norm(a - center), np.linalg.norm(b - center)
        w = (delta - ra) / (rb - ra)
        return a + w * (b - a)

    y_start = cut(i0 - 1, i0, c0) if i0 > 0 else pts[0]
    y_end = cut(i1 + 1, i1, c1) if i1 < len(pts) - 1 else pts[-1]
    middle = np.concatenate([[y_start], pts[i0:i1 + 1], [y_end]], axis=0)
    normals = _strand_normals(middle)
    strand_p = middle + offset * normals
    strand_m = middle - offset * normals

    tw_end = twist_signs[cv.corner_index_of_lift(c1)]
    tw_start = twist_signs[cv.corner_index_of_lift(c0)]
    cap_end = _cap(c1, strand_p[-1], 2 * c1 - strand_m[-1], tw_end * math.pi, delta)
    strand_back = (2 * c1 - strand_m)[::-1]
    c0_reflected = 2 * c1 - c0
    # the return cap closes onto the forward strand's lattice translate,
    # traversing the twist region in the opposite direction
    cap_start = _cap(c0_reflected, strand_back[-1],
                     strand_p[0] + 2 * (c1 - c0), -tw_start * math.pi, delta)
    loop_pts = np.concatenate(
        [strand_p, cap_end[1:], strand_back[1:], cap_start[1:]], axis=0)
    out = Curve("loop", loop_pts)
    return ComposedCurve([out], [{}], 0.0, curve, is_connected=True)


def compare_to_model(curve, s, delta, opts=None, twist_signs=DEFAULT_TWIST_SIGNS):
    """Hausdorff distance between the composed and model curves over P^delta.

    Samples are restricted to the part of both outputs lying over base points
    outside the corner disks (the doubled region, where the model equals the
    s = 0 restriction).
    """
    composed = compose_curve(curve, s, opts)
    model = model_map_vdelta(curve, delta, twist_signs=twist_signs)

    def filtered(components, step=0.004):
        pts = []
        for comp in components:
            ss = comp.resampled(step).samples
            keep = pc.corner_dist(ss[:, 0], ss[:, 1]) >= delta
            pts.append(cv.to_canonical(ss[keep]))
        return np.concatenate(pts, axis=0)

    return cv.hausdorff(filtered(composed.components), filtered(model.components))


# ---------------------------------------------------------------------------
# Generalized intersection points of a pair of test arcs


def _arc_interp(lift, t):
    """Piecewise-linear interpolation along arclength, complex-step safe."""
    seg = np.linalg.norm(np.diff(lift, axis=0), axis=-1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])

    def at(u):
        ur = u.real if np.iscomplexobj(u) else u
        k = int(np.clip(np.searchsorted(cum, ur) - 1, 0, len(seg) - 1))
        w = (u - cum[k]) / seg[k]
        return lift[k][0] + w * (lift[k + 1][0] - lift[k][0]), \
            lift[k][1] + w * (lift[k + 1][1] - lift[k][1])

    return at, cum[-1]


def count_generalized_points(arc0, arc1, s, n_seeds=24, merge_tol=1e-6,
                             cond_tol=1e-6, details=False):
    """Count solutions of {arc0(t0) = r0(m), arc1(t1) = r1(m)} over moduli points m.

    Newton on the joint 4-dimensional system from grid seeds on both section
    branches; duplicates are merged after canonicalizing under the extended
    involution, and every solution's Jacobian regularity is checked.
    """
    if not (0 < s < math.pi / 4):
        raise ValueError("s must lie in (0, pi/4)")
    f0, len0 = _arc_interp(arc0.samples, None)
    f1, len1 = _arc_interp(arc1.samples, None)
    a1_canon = cv.to_canonical(arc1.resampled(0.01).samples)

    def residual(t0, t1, h):
        # the inner point is matched in the cubic-surface embedding, which is
        # an immersion along the pillowcase edges (plain (gamma, theta)
        # matching degenerates when the target arc lies on an edge)
        g, t = f0(t0)
        h1, h2 = md.eval_H(g, t, h, s)
        cg, ct, cgt = md.inner_invariants(g, t, h, s)
        g1, t1v = f1(t1)
        return np.array([h1, h2,
                         cg - np.cos(g1),
                         ct - np.cos(t1v),
                         cgt - np.cos(g1 - t1v)]), cgt, (g1, t1v)

    solutions = []
    eps = md.CS_STEP
    for frac in np.linspace(0.06, 0.94, n_seeds):
        t0 = frac * len0
        g, t = f0(t0)
        if pc.corner_dist(g, t) < max(0.05, 2.5 * s):
            continue
        for branch in (+1, -1):
            h = _fiber_at(g, t, s, branch)
            if h is None:
                continue
            # seed t1 by projecting the inner restriction onto arc1
            cg, ct, cgt = md.inner_invariants(g, t, h, s)
            g1 = math.acos(min(1, max(-1, float(cg))))
            t1v = math.acos(min(1, max(-1, float(ct))))
            if abs(math.cos(g1 - t1v) - cgt) > abs(math.cos(g1 + t1v) - cgt):
                t1v = -t1v
            p1 = cv.to_canonical(np.array([[g1, t1v % TWO_PI]]))
            dists = pc.dist_raw(p1[0, 0], p1[0, 1], a1_canon[:, 0], a1_canon[:, 1])
            kbest = int(np.argmin(dists))
            t1 = kbest / (len(a1_canon) - 1.0) * len1

            x = [t0, t1, np.asarray(h, dtype=float)]
            ok = False
            jac = None
            for _ in range(60):
                res, _, _ = residual(x[0], x[1], x[2])
                if np.max(np.abs(res)) < 1e-12:
                    ok = True
                    break
                e1, e2 = md._tangent_frame(x[2])

                def hv(u, v):
                    q = x[2] + u * e1 + v * e2
                    return q / np.sqrt(np.sum(q * q))

                cols = []
                r, _, _ = residual(x[0] + 1j * eps, x[1], x[2])
                cols.append(r.imag / eps)
                r, _, _ = residual(x[0], x[1] + 1j * eps, x[2])
                cols.append(r.imag / eps)
                r, _, _ = residual(x[0], x[1], hv(1j * eps, 0.0))
                cols.append(r.imag / eps)
                r, _, _ = residual(x[0], x[1], hv(0.0, 1j * eps))
                cols.append(r.imag / eps)
                jac = np.array(cols).T            # 5 x 4 Gauss-Newton
                delta, *_ = np.linalg.lstsq(jac, -res.astype(float), rcond=None)
                if np.max(np.abs(delta)) > 2.0:
                    delta *= 2.0 / np.max(np.abs(delta))
                x = [x[0] + delta[0], x[1] + delta[1],
                     (x[2] + delta[2] * e1 + delta[3] * e2)]
                x[2] = x[2] / np.linalg.norm(x[2])
            if not ok:
                continue
            if not (1e-6 * len0 < x[0] < len0 * (1 - 1e-6)
                    and 1e-6 * len1 < x[1] < len1 * (1 - 1e-6)):
                continue
            sv = np.linalg.svd(jac, compute_uv=False)
            solutions.append((x[0], x[1], x[2].copy(), sv[-1]))

    merged = []
    for t0, t1, h, sv in solutions:
        g, t = f0(t0)
        key = np.concatenate([[t0, t1], h])
        dup = False
        for m in merged:
            if np.linalg.norm(key - m["key"]) < max(merge_tol, 1e-4):
                dup = True
                break
        if not dup:
            merged.append({"key": key, "t0": t0, "t1": t1, "h": h, "sv": sv})
    for m in merged:
        if m["sv"] < cond_tol:
            raise NonTransverse(
                f"generalized point at t0={m['t0']:.4f} has singular value {m['sv']:.2e}")
    if details:
        return merged
    return len(merged)
