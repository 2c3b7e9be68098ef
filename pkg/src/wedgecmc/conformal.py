"""Conformal-flatness diagnostics of slice metrics h + dr^2 by nested differencing.

The rho = 1 slice of a wedge carries h + dr^2 with h the hyperbolic
cross-section metric.  In two dimensions the slice is flat; in three the
Cotton tensor vanishes (conformally flat); from four on the Weyl tensor does
not.  All curvature here is computed purely from pointwise metric samples by
nested fourth-order central differences on a Poincare-ball patch, so the
diagnostics are independent of every closed-form curvature expression in the
package.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from .errors import PatchTooCoarse

_C1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_OFF = np.array([-2, -1, 1, 2])


def _fd_grad(fun, x, h):
    """Fourth-order central gradient of a tensor-valued function."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x))
    out = np.zeros((len(x),) + f0.shape)
    for k in range(len(x)):
        acc = np.zeros_like(f0)
        for c, o in zip(_C1, _OFF):
            xp = x.copy()
            xp[k] += o * h
            acc = acc + c * np.asarray(fun(xp))
        out[k] = acc / h
    return out


def poincare_slice_metric(d):
    """Metric function for the slice H^(d-1) x R in Poincare-ball coordinates.

    Coordinates are (w_1..w_{d-1}, r); the hyperbolic block is
    4 delta / (1-|w|^2)^2 on the unit ball.
    """

    def g(x):
        w = x[:-1]
        conf = 2.0 / (1.0 - float(w @ w))
        out = np.eye(d)
        out[: d - 1, : d - 1] *= conf * conf
        return out

    return g


def flat_wedge_slice_metric():
    """n=2 wedge slice (x, r): the flat product metric."""

    def g(x):
        return np.eye(2)

    return g


def collar_slice_metric():
    """n=2 collar slice (s, x): ds^2 + cosh(s)^2 dx^2 (curvature -1)."""

    def g(x):
        return np.array([[1.0, 0.0], [0.0, math.cosh(x[0]) ** 2]])

    return g


def christoffel(gfun, x, h):
    g = np.asarray(gfun(x))
    ginv = np.linalg.inv(g)
    dg = _fd_grad(gfun, x, h)  # dg[k, i, j] = d_k g_ij
    gamma = 0.5 * (
        np.einsum("ad,bdc->abc", ginv, dg)
        + np.einsum("ad,cdb->abc", ginv, dg)
        - np.einsum("ad,dbc->abc", ginv, dg)
    )
    return gamma


def riemann(gfun, x, h):
    """R^a_{bcd} by differencing the connection (nested stencils)."""
    gamma = christoffel(gfun, x, h)
    dgamma = _fd_grad(lambda y: christoffel(gfun, y, h), x, h)
    # dgamma[c, a, b, d] = d_c Gamma^a_{bd}
    R = (
        np.einsum("cabd->abcd", dgamma)
        - np.einsum("dabc->abcd", dgamma)
        + np.einsum("ace,ebd->abcd", gamma, gamma)
        - np.einsum("ade,ebc->abcd", gamma, gamma)
    )
    return R


def ricci_scalar(gfun, x, h):
    g = np.asarray(gfun(x))
    ginv = np.linalg.inv(g)
    R = riemann(gfun, x, h)
    ric = np.einsum("abad->bd", R)
    return ric, float(np.einsum("bd,bd->", ginv, ric))


def cotton_norm(gfun, x, h):
    """Pointwise |C| of a 3-metric, C_ijk = grad_k P_ij - grad_j P_ik."""
    g = np.asarray(gfun(x))
    ginv = np.linalg.inv(g)

    def schouten(y):
        ric, scal = ricci_scalar(gfun, y, h)
        return ric - 0.25 * scal * np.asarray(gfun(y))

    P = schouten(x)
    dP = _fd_grad(schouten, x, h)  # dP[k, i, j]
    gamma = christoffel(gfun, x, h)
    # covariant derivative grad_k P_ij = d_k P_ij - Gamma^l_ki P_lj - Gamma^l_kj P_il
    covP = dP - np.einsum("lki,lj->kij", gamma, P) - np.einsum("lkj,il->kij", gamma, P)
    C = covP.transpose(1, 2, 0) - covP.transpose(1, 0, 2)  # C[i, j, k] = covP[k,i,j] - covP[j,i,k]
    norm2 = np.einsum(
        "ijk,pqr,ip,jq,kr->", C, C, ginv, ginv, ginv
    )
    return math.sqrt(abs(float(norm2)))


def weyl_norm(gfun, x, h):
    """Pointwise |Weyl| of a d-metric (d >= 4)."""
    g = np.asarray(gfun(x))
    d = g.shape[0]
    ginv = np.linalg.inv(g)
    Rup = riemann(gfun, x, h)
    Rdown = np.einsum("ae,ebcd->abcd", g, Rup)
    ric = np.einsum("abad->bd", Rup)
    scal = float(np.einsum("bd,bd->", ginv, ric))
    W = Rdown.copy()
    for (i, j, k, l) in product(range(d), repeat=4):
        W[i, j, k, l] -= (
            g[i, k] * ric[j, l]
            - g[i, l] * ric[j, k]
            - g[j, k] * ric[i, l]
            + g[j, l] * ric[i, k]
        ) / (d - 2)
        W[i, j, k, l] += (
            scal * (g[i, k] * g[j, l] - g[i, l] * g[j, k]) / ((d - 1) * (d - 2))
        )
    norm2 = np.einsum(
        "abcd,pqrs,ap,bq,cr,ds->", W, W, ginv, ginv, ginv, ginv
    )
    riem2 = np.einsum(
        "abcd,pqrs,ap,bq,cr,ds->", Rdown, Rdown, ginv, ginv, ginv, ginv
    )
    return math.sqrt(abs(float(norm2))), math.sqrt(abs(float(riem2)))


def gauss_curvature(gfun, x, h):
    """Gaussian curvature of a 2-metric: R/2."""
    _, scal = ricci_scalar(gfun, x, h)
    return 0.5 * scal


_SAMPLES = {
    2: [(0.0, 0.0), (0.15, -0.1), (-0.2, 0.25)],
    3: [(0.1, 0.05, 0.0), (-0.15, 0.2, 0.1), (0.05, -0.1, -0.2)],
    4: [(0.1, 0.05, -0.05, 0.0), (-0.1, 0.15, 0.05, 0.1)],
}


def conformal_flatness_diagnostic(n, resolution=32):
    """Sup over patch samples of the dimension-appropriate flatness norm.

    n=2: Gaussian curvature of the wedge slice (expect 0).
    n=3: pointwise Cotton norm of h + dr^2 (expect -> 0 under refinement).
    n>=4: pointwise Weyl norm (expect bounded away from 0), reported
    relative to the Riemann norm as the patch curvature scale.
    Returns a dict with 'value', 'kind', 'step', and 'scale'.
    """
    if resolution < 8:
        raise PatchTooCoarse("patch resolution must be at least 8")
    h = 0.5 / resolution
    d = min(n, 4)
    if n == 2:
        g = flat_wedge_slice_metric()
        vals = [abs(gauss_curvature(g, np.array(x), h)) for x in _SAMPLES[2]]
        return {"kind": "gauss_curv", "value": max(vals), "step": h, "scale": 1.0}
    if n == 3:
        g = poincare_slice_metric(3)
        vals = [cotton_norm(g, np.array(x), h) for x in _SAMPLES[3]]
        # curvature scale: |Ric| of the hyperbolic block ~ O(1)
        return {"kind": "cotton_norm", "value": max(vals), "step": h, "scale": 1.0}
    g = poincare_slice_metric(d)
    vals = []
    scales = []
    for x in _SAMPLES[4]:
        w, r = weyl_norm(g, np.array(x), h)
        vals.append(w)
        scales.append(r)
    return {
        "kind": "weyl_norm",
        "value": min(vals),
        "step": h,
        "scale": max(scales),
    }
