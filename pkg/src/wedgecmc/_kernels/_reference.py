"""Pure numpy implementation of the hot per-node kernels.

Used when the compiled extension is unavailable (or forced via the
WEDGECMC_PURE environment variable).  The compiled backend fuses these loops;
both expose the same array contract and are interchangeable.

All kernels work on a single panel grid: node values ``w`` (length m+1,
uniform spacing ``h``), spatial dimension ``n``, and for collar panels the
per-node ``tanh(sigma)`` of the warp.  The graph mean curvature of rho = w is

    wedge:  H = -w'' (1-w'^2)^{-3/2} - (n-1) / (w sqrt(1-w'^2))
    collar: H = -(w^2 - 2 w'^2 + w w'') (w^2-w'^2)^{-3/2}
              - (n-1) (1 + w' tanh(sigma)/w) / sqrt(w^2-w'^2)

with the future-normal sign convention that makes level sets come out as
-n/rho (collar) and -(n-1)/rho (wedge).
"""

import numpy as np


def wedge_H(u, du, d2u, n):
    """Pointwise wedge mean curvature of the graph rho = u(r)."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    S = 1.0 - du * du
    return -d2u * S**-1.5 - (n - 1) / (u * np.sqrt(S))


def collar_H(u, du, d2u, tanh_sig, n):
    """Pointwise collar mean curvature of the graph rho = u(s)."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    tanh_sig = np.asarray(tanh_sig, dtype=float)
    Q2 = u * u - du * du
    num = u * u - 2.0 * du * du + u * d2u
    return -num * Q2**-1.5 - (n - 1) * (1.0 + du * tanh_sig / u) / np.sqrt(Q2)


def wedge_H_partials(u, du, d2u, n):
    """H and its partials wrt (u, du, d2u) for the wedge operator."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    S = 1.0 - du * du
    S12 = np.sqrt(S)
    S32 = S * S12
    S52 = S * S32
    H = -d2u / S32 - (n - 1) / (u * S12)
    dH_u = (n - 1) / (u * u * S12)
    dH_q = -3.0 * d2u * du / S52 - (n - 1) * du / (u * S32)
    dH_p = -1.0 / S32
    return H, dH_u, dH_q, dH_p


def collar_H_partials(u, du, d2u, tanh_sig, n):
    """H and its partials wrt (u, du, d2u) for the collar operator."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    T = np.asarray(tanh_sig, dtype=float)
    Q2 = u * u - du * du
    Q = np.sqrt(Q2)
    Q3 = Q2 * Q
    Q5 = Q2 * Q3
    num = u * u - 2.0 * du * du + u * d2u
    gcross = 1.0 + du * T / u
    H = -num / Q3 - (n - 1) * gcross / Q
    dH_u = (
        -(2.0 * u + d2u) / Q3
        + 3.0 * u * num / Q5
        + (n - 1) * du * T / (u * u * Q)
        + (n - 1) * gcross * u / Q3
    )
    dH_q = (
        4.0 * du / Q3
        - 3.0 * du * num / Q5
        - (n - 1) * T / (u * Q)
        - (n - 1) * gcross * du / Q3
    )
    dH_p = -u / Q3
    return H, dH_u, dH_q, dH_p


def wedge_interior(w, h, n):
    """Residual pieces for interior nodes of a wedge panel.

    Returns (H, lower, diag, upper): the operator value and the Jacobian
    entries wrt w[i-1], w[i], w[i+1], using second-order centered stencils.
    """
    w = np.asarray(w, dtype=float)
    u = w[1:-1]
    q = (w[2:] - w[:-2]) / (2.0 * h)
    p = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (h * h)
    H, dH_u, dH_q, dH_p = wedge_H_partials(u, q, p, n)
    lower = -dH_q / (2.0 * h) + dH_p / (h * h)
    diag = dH_u - 2.0 * dH_p / (h * h)
    upper = dH_q / (2.0 * h) + dH_p / (h * h)
    return H, lower, diag, upper


def collar_interior(w, h, n, tanh_sig):
    """Residual pieces for interior nodes of a collar panel (tanh_sig at interior nodes)."""
    w = np.asarray(w, dtype=float)
    u = w[1:-1]
    q = (w[2:] - w[:-2]) / (2.0 * h)
    p = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (h * h)
    H, dH_u, dH_q, dH_p = collar_H_partials(u, q, p, tanh_sig, n)
    lower = -dH_q / (2.0 * h) + dH_p / (h * h)
    diag = dH_u - 2.0 * dH_p / (h * h)
    upper = dH_q / (2.0 * h) + dH_p / (h * h)
    return H, lower, diag, upper
