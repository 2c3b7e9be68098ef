"""Induced geometry of CMC leaves: metric, curvature, volumes, distances.

In the symmetric reduction the leaf metric is a surface-of-revolution form
``A(xi) dxi^2 + B(xi) dx^2`` (n = 2; for n >= 3 the cross block is a warped
hyperbolic metric).  Scalar curvature comes from the closed-form warped
product formula rather than generic tensor differencing, which keeps it
honest at the C^1 seams; seam values are one-sided.

Distances (n = 2) use the conserved cross-section momentum of the revolution
metric; a lattice shortest-path search on the sampled leaf serves as the
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import MethodDisagreement, NotSpacelike, WedgeCMCError


@dataclass(frozen=True)
class LeafSample:
    """Pointwise induced-metric data of a leaf in the chain frame.

    ``g_cross`` multiplies the unit cross-section metric; ``detg_over_base``
    is det(g_leaf)/det(h).  K eigenvalues are (cross multiplicity n-1, chain
    multiplicity 1); curvatures are unrescaled.
    """

    seg_index: int
    s_local: float
    kind: str
    g_chain: float
    g_cross: float
    detg_over_base: float
    volume_density: float
    K_cross: float
    K_chain: float
    meanH: float
    Ksq: float
    R: float


@dataclass(frozen=True)
class GeodesicQuery:
    """Distance query between two on-leaf points (segment, s_local, x).

    x is the normalized cross-section coordinate (period 1).  Method tag
    'clairaut' (default), 'mesh-dijkstra', or 'both' (cross-checked; a
    disagreement beyond tolerance raises MethodDisagreement).
    """

    start: tuple
    end: tuple
    method: str = "clairaut"


def _collar_warp(panel, s_local):
    sig = panel.sigma(s_local)
    return math.cosh(sig), math.sinh(sig)


def panel_geometry(field, pf):
    """Vectorized per-node leaf geometry for one panel (unrescaled).

    Returns dict with chain coefficient A, cross coefficient, determinant
    ratio, volume density (integrand of the leaf volume wrt the unrescaled
    local coordinate), K eigenvalues, meanH, |K|^2, scalar curvature R, and
    circumference^2 B for the n=2 distance computations.
    """
    model = field.model
    n = model.n
    m = n - 1
    seg = model.segments[pf.panel.seg_index]
    u, du, d2u = pf.u, pf.du, pf.d2u
    V = seg.cross_section_volume
    if pf.panel.kind == "wedge":
        A = 1.0 - du * du
        if np.any(A <= 0):
            raise NotSpacelike("wedge graph condition violated")
        warp = np.ones_like(u)
        W = u.copy()
        Wp = du.copy()
        Wpp = d2u.copy()
        Ap = -2.0 * du * d2u
        K_cross = -1.0 / (u * np.sqrt(A))
        K_chain = -d2u / A**1.5
    else:
        A = u * u - du * du
        if np.any(A <= 0):
            raise NotSpacelike("collar graph condition violated")
        sig = pf.panel.sigma(pf.panel.lo + pf.s)
        ch, sh = np.cosh(sig), np.sinh(sig)
        warp = ch
        W = u * ch
        Wp = du * ch + u * sh
        Wpp = d2u * ch + 2.0 * du * sh + u * ch
        Ap = 2.0 * u * du - 2.0 * du * d2u
        Q = np.sqrt(A)
        K_cross = -(1.0 + du * sh / (u * ch)) / Q
        K_chain = -(u * u - 2.0 * du * du + u * d2u) / (A * Q)
    sqrtA = np.sqrt(A)
    W_t = Wp / sqrtA
    W_tt = Wpp / A - Wp * Ap / (2.0 * A * A)
    khat = -1.0 if n >= 3 else 0.0
    R = -2.0 * m * W_tt / W
    if m > 1:
        R = R + m * (m - 1) * (khat - W_t * W_t) / (W * W)
    meanH = m * K_cross + K_chain
    Ksq = m * K_cross**2 + K_chain**2
    g_cross = (u * warp) ** 2
    # det(g_leaf) relative to det(h) in wedges and det(g_base) in collars
    detg_over_base = A * u ** (2 * m)
    vol_density = sqrtA * (u * warp) ** m * V
    circ = u * warp * V  # n=2 circumference at normalized x-period 1
    return {
        "A": A,
        "g_cross": g_cross,
        "detg_over_base": detg_over_base,
        "vol_density": vol_density,
        "K_cross": K_cross,
        "K_chain": K_chain,
        "meanH": meanH,
        "Ksq": Ksq,
        "R": R,
        "B": circ * circ,
        "warp": warp,
    }


def _node_index(pf, s_local):
    i = int(round((s_local - pf.panel.lo) / (pf.s[1] - pf.s[0])))
    i = min(max(i, 0), len(pf.s) - 1)
    if abs(pf.panel.lo + pf.s[i] - s_local) < 1e-9 * max(1.0, abs(s_local)):
        return i
    return None


def leaf_sample(field, segment, s_local):
    """Full LeafSample at one chart position (nearest-node jets off-node)."""
    if isinstance(segment, str):
        segment, _ = field.model.segment_by_label(segment)
    k = field.panel_for(segment, s_local)
    pf = field.panels[k]
    geo = panel_geometry(field, pf)
    i = _node_index(pf, s_local)
    if i is None:
        # interpolate the jet from the rescaled spline, then recompute pointwise
        scale = field.lam if pf.panel.kind == "wedge" else 1.0
        sp = field.panel_spline(k)
        xr = (s_local - pf.panel.lo) * scale
        w = float(sp(xr))
        dw = float(sp.derivative(1)(xr))
        d2w = float(sp.derivative(2)(xr))
        lam = field.lam
        if pf.panel.kind == "wedge":
            u, du, d2u = w / lam, dw, d2w * lam
        else:
            u, du, d2u = w / lam, dw / lam, d2w / lam
        tmp = _PointJet(pf.panel, s_local, u, du, d2u)
        geo_pt = panel_geometry(field, tmp)
        i = 0
        geo = {kk: np.atleast_1d(v) for kk, v in geo_pt.items()}
    return LeafSample(
        seg_index=segment,
        s_local=s_local,
        kind=pf.panel.kind,
        g_chain=float(geo["A"][i]),
        g_cross=float(geo["g_cross"][i]),
        detg_over_base=float(geo["detg_over_base"][i]),
        volume_density=float(geo["vol_density"][i]),
        K_cross=float(geo["K_cross"][i]),
        K_chain=float(geo["K_chain"][i]),
        meanH=float(geo["meanH"][i]),
        Ksq=float(geo["Ksq"][i]),
        R=float(geo["R"][i]),
    )


class _PointJet:
    """Single-point stand-in for a PanelField (shares panel_geometry)."""

    def __init__(self, panel, s_local, u, du, d2u):
        self.panel = panel
        self.s = np.array([s_local - panel.lo])
        self.u = np.array([u])
        self.du = np.array([du])
        self.d2u = np.array([d2u])


def induced_metric(field, segment, s_local):
    """Induced-metric part of the leaf sample (see LeafSample)."""
    return leaf_sample(field, segment, s_local)


def second_fundamental_form(field, segment, s_local):
    """Leaf sample with the second fundamental form filled (same object)."""
    return leaf_sample(field, segment, s_local)


def leaf_volume(field, region="all"):
    """Leaf volume over a region: a wedge label, 'off_wedges', or 'all'.

    Composite trapezoid per panel at the grid order; seams contribute
    measure zero.
    """
    model = field.model
    total = 0.0
    for pf in field.panels:
        seg = model.segments[pf.panel.seg_index]
        if region == "all":
            pass
        elif region == "off_wedges":
            if seg.kind == "wedge":
                continue
        elif region == "wedges":
            if seg.kind != "wedge":
                continue
        else:
            if seg.label != region:
                continue
        geo = panel_geometry(field, pf)
        total += float(np.trapezoid(geo["vol_density"], pf.s))
    return total


# --------------------------------------------------------------------------
# distances on the leaf (n = 2 reduction)


def _chain_metric_arrays(field, start, end):
    """Concatenated (xi, A, B) samples between two chain positions.

    start/end are (seg_index, s_local); start must precede end in the chain.
    xi is the unrescaled chain coordinate accumulated along panels.
    """
    model = field.model
    offs = model.segment_offsets()
    xi0 = offs[start[0]] + start[1]
    xi1 = offs[end[0]] + end[1]
    if xi1 < xi0:
        xi0, xi1 = xi1, xi0
    xs, As, Bs = [], [], []
    for pf in field.panels:
        base = offs[pf.panel.seg_index] + pf.panel.lo
        xi = base + pf.s
        mask = (xi >= xi0 - 1e-14) & (xi <= xi1 + 1e-14)
        if not np.any(mask):
            continue
        geo = panel_geometry(field, pf)
        xs.append(xi[mask])
        As.append(geo["A"][mask])
        Bs.append(geo["B"][mask])
    if not xs:
        raise WedgeCMCError("empty chain interval")
    xi = np.concatenate(xs)
    A = np.concatenate(As)
    B = np.concatenate(Bs)
    order = np.argsort(xi, kind="stable")
    return xi[order], A[order], B[order]


def clairaut_distance(field, start, end, n_refine=1):
    """Geodesic distance between on-leaf points via the conserved momentum.

    Points are (seg_index, s_local, x) with x normalized to period 1.  The
    geodesic is assumed chain-monotone (no turning points), which covers
    crossing and traversal queries; the momentum p solves the cross-section
    displacement equation int p sqrt(A/(B(B-p^2))) dxi = |dx|.
    """
    if field.model.n != 2:
        raise WedgeCMCError("leaf distances implemented for the n=2 reduction")
    (sa, la, xa), (sb, lb, xb) = start, end
    xi, A, B = _chain_metric_arrays(field, (sa, la), (sb, lb))
    dx = abs(xb - xa)
    if xi[-1] - xi[0] < 1e-15:
        # pure cross-section arc at fixed xi
        return dx * math.sqrt(float(B[0]))
    if dx < 1e-15:
        return float(np.trapezoid(np.sqrt(A), xi))

    def displacement(p):
        integ = p * np.sqrt(A / (B * (B - p * p)))
        return float(np.trapezoid(integ, xi))

    p_max = math.sqrt(float(np.min(B)))

    def f(p):
        return displacement(p) - dx

    hi = p_max * (1.0 - 1e-12)
    if f(hi) < 0:
        raise WedgeCMCError(
            "query requires a turning point (dx beyond monotone reach)"
        )
    p = brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-14)
    integ = np.sqrt(A * B / (B - p * p))
    return float(np.trapezoid(integ, xi))


def mesh_dijkstra_distance(
    field,
    start,
    end,
    nx=None,
    stencil=4,
    x_pad=0.35,
    perturb=0.0,
    seed=0,
    max_chain_nodes=600,
):
    """Shortest-path oracle on a lattice sampling of the leaf window.

    Entirely independent of the momentum method: the (xi, x) window is
    sampled into a lattice with local-metric edge weights, and the shortest
    chain-monotone lattice path is relaxed column by column over a widened
    direction stencil (Dijkstra on the forward lattice graph).  Cell aspect
    is balanced in leaf-metric units so the stencil's angular resolution is
    meaningful.  ``perturb`` jitters interior x-coordinates (seeded) for
    stability tests.  Returns (distance, info) with the metric cell sizes.
    """
    (sa, la, xa), (sb, lb, xb) = start, end
    xi, A, B = _chain_metric_arrays(field, (sa, la), (sb, lb))
    keep = np.concatenate(([True], np.diff(xi) > 1e-14))
    xi, A, B = xi[keep], A[keep], B[keep]
    if len(xi) > max_chain_nodes:
        idx = np.unique(np.linspace(0, len(xi) - 1, max_chain_nodes).round().astype(int))
        xi, A, B = xi[idx], A[idx], B[idx]
    ni = len(xi)
    dx = xb - xa
    pad = x_pad * max(abs(dx), 0.2)
    x_lo, x_hi = min(xa, xb) - pad, max(xa, xb) + pad
    if nx is None:
        # balance metric cell aspect: hx*sqrt(B) ~ chain metric spacing
        chain_len = float(np.trapezoid(np.sqrt(A), xi))
        hxi_metric = max(chain_len / max(ni - 1, 1), 1e-12)
        span_metric = (x_hi - x_lo) * math.sqrt(float(np.mean(B)))
        nx = int(np.clip(round(span_metric / hxi_metric) + 1, 24, 384))
    xs = np.linspace(x_lo, x_hi, nx)
    hx = xs[1] - xs[0]
    xgrid = np.tile(xs, (ni, 1))
    if perturb:
        rng = np.random.default_rng(seed)
        jitter = (rng.random((ni, nx)) - 0.5) * perturb * hx
        jitter[0, :] = jitter[-1, :] = 0.0
        jitter[:, 0] = jitter[:, -1] = 0.0
        xgrid = xgrid + jitter

    offsets = [
        (a, b)
        for a in range(1, stencil + 1)
        for b in range(-stencil, stencil + 1)
        if math.gcd(a, abs(b)) == 1
    ]

    dist = np.full((ni, nx), np.inf)
    j_start = int(np.argmin(np.abs(xs - xa)))
    j_end = int(np.argmin(np.abs(xs - xb)))
    dist[0, j_start] = 0.0
    # seed vertical motion along the first column
    dB0 = math.sqrt(B[0])
    dist[0] = np.minimum(dist[0], np.abs(xgrid[0] - xgrid[0, j_start]) * dB0)
    for i in range(1, ni):
        row = dist[i]
        for a, b in offsets:
            i0 = i - a
            if i0 < 0:
                continue
            dxi = xi[i] - xi[i0]
            Am = 0.5 * (A[i] + A[i0])
            Bm = 0.5 * (B[i] + B[i0])
            if b == 0:
                w = np.sqrt(Am * dxi * dxi + Bm * (xgrid[i] - xgrid[i0]) ** 2)
                np.minimum(row, dist[i0] + w, out=row)
            elif b > 0:
                dxx = xgrid[i, b:] - xgrid[i0, :-b]
                w = np.sqrt(Am * dxi * dxi + Bm * dxx * dxx)
                np.minimum(row[b:], dist[i0, :-b] + w, out=row[b:])
            else:
                dxx = xgrid[i, :b] - xgrid[i0, -b:]
                w = np.sqrt(Am * dxi * dxi + Bm * dxx * dxx)
                np.minimum(row[:b], dist[i0, -b:] + w, out=row[:b])
        # vertical relaxation within the column, via cumulative minima
        stepw = math.sqrt(B[i]) * hx
        drift = stepw * np.arange(nx)
        np.minimum(row, np.minimum.accumulate(row - drift) + drift, out=row)
        np.minimum(
            row,
            (np.minimum.accumulate((row + drift)[::-1])[::-1] - drift),
            out=row,
        )
    d = dist[ni - 1, j_end]
    if not np.isfinite(d):
        raise WedgeCMCError("mesh oracle found no path")
    d += abs(xa - xs[j_start]) * math.sqrt(B[0])
    d += abs(xb - xs[j_end]) * math.sqrt(B[-1])
    cell = (
        float(np.max(np.diff(xi)) * math.sqrt(np.max(A))),
        float(hx * math.sqrt(np.max(B))),
    )
    return float(d), {"cell": cell, "shape": (ni, nx)}


def leaf_distance(field, query, nx=64, stencil=3):
    """Geodesic distance for a GeodesicQuery; 'both' cross-checks the methods.

    The cross-check tolerance is max(1e-4, 10 x mesh resolution) where the
    mesh resolution is the largest cell size in leaf-metric units; beyond it
    a MethodDisagreement is raised (surfaced, not hidden).
    """
    if query.method == "clairaut":
        return clairaut_distance(field, query.start, query.end)
    if query.method == "mesh-dijkstra":
        return mesh_dijkstra_distance(field, query.start, query.end, nx, stencil)[0]
    if query.method == "both":
        d_c = clairaut_distance(field, query.start, query.end)
        d_m, info = mesh_dijkstra_distance(field, query.start, query.end, nx, stencil)
        tol = max(1e-4, 10.0 * max(info["cell"]))
        if abs(d_c - d_m) > tol:
            raise MethodDisagreement(
                f"clairaut {d_c!r} vs mesh {d_m!r} differ beyond {tol!r}"
            )
        return d_c
    raise ValueError(f"unknown method {query.method!r}")


def min_circumference(field):
    """Smallest cross-section circumference over the leaf (n=2)."""
    best = math.inf
    for pf in field.panels:
        geo = panel_geometry(field, pf)
        best = min(best, float(np.min(np.sqrt(geo["B"]))))
    return best


def embedded_height_convexity(field, y_values=(0.0, 0.5, 1.0)):
    """Minimum of d^2 v / dr^2 over wedge samples, v = sqrt(u^2 + y^2).

    The flat-chart height of a leaf with nonpositive K is convex; discrete
    fields may dip slightly negative at grid tolerance.
    """
    worst = math.inf
    for pf in field.panels:
        if pf.panel.kind != "wedge":
            continue
        u, du, d2u = pf.u, pf.du, pf.d2u
        for yv in y_values:
            y = yv / field.lam
            v2 = u * u + y * y
            num = (du * du + u * d2u) * v2 - (u * du) ** 2
            worst = min(worst, float(np.min(num / v2**1.5)))
    return worst
