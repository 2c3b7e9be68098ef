"""Symmetry-reduced CMC solver for chain models.

The leaf of mean curvature tau < 0 is the graph rho = u(xi) over the chain.
Internally everything is solved in rescaled variables w = lambda u with
lambda = |tau|/(n-1): wedge coordinates stretch (r' = lambda r) while collars
are scale invariant, the target mean curvature becomes -(n-1), and all
unknowns are O(1) between the barriers 1 < w < n/(n-1).  Newton tolerance is
interpreted on this rescaled residual.

Discretization: second-order centered differences on a uniform grid per
panel, with ghost-free seam rows enforcing continuity of u and of its
proper-length derivative (dw/ds = w dw/dr' at collar|wedge junctions, plain
slope matching at collar kinks and like-kind junctions).  The leaf is C^1 but
not C^2 across seams, so no interior equation is imposed at seam nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.linalg import solve_banded
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import spsolve

from . import _kernels
from .errors import (
    InsufficientLadder,
    NoConvergence,
    NonNegativeTau,
    NotSpacelike,
    StepTooLarge,
)
from .fitting import fit_or_degenerate
from .model import build_model, rescaling_factor


@dataclass(frozen=True)
class SolverConfig:
    """Newton/grid controls.

    ``resolution`` is the minimum number of intervals per panel;
    ``points_per_unit`` refines proportionally to the panel's rescaled width
    so boundary layers of the stretched wedges stay resolved.
    """

    resolution: int = 48
    points_per_unit: float = 32.0
    tolerance: float = 1e-10
    max_iterations: int = 50
    min_damping: float = 2.0**-30
    spacelike_margin: float = 1e-8
    initial_guess: str = "barrier-midpoint"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.resolution < 16:
            raise ValueError("resolution must be at least 16 per segment")
        if self.initial_guess not in ("barrier-midpoint", "cone"):
            raise ValueError(f"unknown initial guess {self.initial_guess!r}")

    def intervals_for(self, rescaled_width):
        m = max(self.resolution, int(math.ceil(self.points_per_unit * rescaled_width)))
        return max(m, 5)


@dataclass
class _PanelGrid:
    panel: object
    h: float                 # rescaled spacing
    m: int                   # intervals
    gidx: np.ndarray         # global unknown index per node
    nodes: np.ndarray        # rescaled local coordinates
    tanh_sig: np.ndarray | None  # collar warp tanh(sigma) per node


@dataclass
class _Grid:
    model: object
    lam: float
    panels: list
    size: int
    periodic: bool

    def seam_rows(self):
        """(row, left panel, right panel) for every interior seam (wrap last)."""
        out = []
        for k in range(1, len(self.panels)):
            out.append((self.panels[k].gidx[0], self.panels[k - 1], self.panels[k]))
        if self.periodic:
            out.append((self.panels[0].gidx[0], self.panels[-1], self.panels[0]))
        return out


def build_grid(model, lam, config):
    panels = []
    g = 0
    for p in model.panels:
        width = p.width * (lam if p.kind == "wedge" else 1.0)
        m = config.intervals_for(width)
        h = width / m
        gidx = np.arange(g, g + m + 1)
        nodes = np.linspace(0.0, width, m + 1)
        tanh_sig = None
        if p.kind == "collar":
            tanh_sig = np.tanh(p.sigma(p.lo + nodes))
        panels.append(_PanelGrid(p, h, m, gidx, nodes, tanh_sig))
        g += m
    size = g + 1
    if model.periodic:
        size -= 1
        panels[-1].gidx = panels[-1].gidx.copy()
        panels[-1].gidx[-1] = 0
    return _Grid(model=model, lam=lam, panels=panels, size=size, periodic=model.periodic)


def _end_slope(w, h, side):
    """Second-order one-sided first derivative at a panel end."""
    if side == "left":
        return (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h)
    return (3.0 * w[-1] - 4.0 * w[-2] + w[-3]) / (2.0 * h)


def _spacelike_margins(grid, U):
    """Minimum of the chain metric coefficient over all panels (rescaled)."""
    worst = math.inf
    for pg in grid.panels:
        w = U[pg.gidx]
        q = np.empty_like(w)
        q[1:-1] = (w[2:] - w[:-2]) / (2.0 * pg.h)
        q[0] = _end_slope(w, pg.h, "left")
        q[-1] = _end_slope(w, pg.h, "right")
        if pg.panel.kind == "wedge":
            coeff = 1.0 - q * q
        else:
            coeff = w * w - q * q
        worst = min(worst, float(np.min(coeff)), float(np.min(w)))
    return worst


def _assemble(grid, U, want_jacobian):
    """Residual (and banded/sparse Jacobian) of the rescaled system."""
    model = grid.model
    n = model.n
    tau_hat = -(n - 1.0)
    N = grid.size
    F = np.zeros(N)
    rows, cols, vals = [], [], []
    ab = None
    if want_jacobian and not grid.periodic:
        ab = np.zeros((5, N))

    def put(r, c, v):
        if ab is not None:
            ab[2 + r - c, c] += v
        else:
            rows.append(r)
            cols.append(c)
            vals.append(v)

    for pg in grid.panels:
        w = U[pg.gidx]
        if pg.panel.kind == "wedge":
            H, lower, diag, upper = _kernels.wedge_interior(w, pg.h, n)
        else:
            H, lower, diag, upper = _kernels.collar_interior(
                w, pg.h, n, pg.tanh_sig[1:-1]
            )
        rows_i = pg.gidx[1:-1]
        F[rows_i] = H - tau_hat
        if want_jacobian:
            if ab is not None:
                ab[3, pg.gidx[:-2]] += lower
                ab[2, pg.gidx[1:-1]] += diag
                ab[1, pg.gidx[2:]] += upper
            else:
                rows.extend(rows_i)
                cols.extend(pg.gidx[:-2])
                vals.extend(lower)
                rows.extend(rows_i)
                cols.extend(rows_i)
                vals.extend(diag)
                rows.extend(rows_i)
                cols.extend(pg.gidx[2:])
                vals.extend(upper)

    for r, left, right in grid.seam_rows():
        wl = U[left.gidx]
        wr = U[right.gidx]
        hl, hr = left.h, right.h
        DL = _end_slope(wl, hl, "right")
        DR = _end_slope(wr, hr, "left")
        ws = U[r]
        kinds = (left.panel.kind, right.panel.kind)
        il = left.gidx
        ir = right.gidx
        if kinds == ("collar", "wedge"):
            F[r] = DL - ws * DR
            if want_jacobian:
                put(r, r, 3.0 / (2 * hl) - DR + ws * 3.0 / (2 * hr))
                put(r, il[-2], -2.0 / hl)
                put(r, il[-3], 0.5 / hl)
                put(r, ir[1], -ws * 2.0 / hr)
                put(r, ir[2], ws * 0.5 / hr)
        elif kinds == ("wedge", "collar"):
            F[r] = DR - ws * DL
            if want_jacobian:
                put(r, r, -3.0 / (2 * hr) - DL - ws * 3.0 / (2 * hl))
                put(r, ir[1], 2.0 / hr)
                put(r, ir[2], -0.5 / hr)
                put(r, il[-2], ws * 2.0 / hl)
                put(r, il[-3], -ws * 0.5 / hl)
        else:
            F[r] = DL - DR
            if want_jacobian:
                put(r, r, 3.0 / (2 * hl) + 3.0 / (2 * hr))
                put(r, il[-2], -2.0 / hl)
                put(r, il[-3], 0.5 / hl)
                put(r, ir[1], -2.0 / hr)
                put(r, ir[2], 0.5 / hr)

    if not grid.periodic:
        first = grid.panels[0]
        last = grid.panels[-1]
        n_ratio = model.n / (model.n - 1.0)
        if model.outer_boundary == "dirichlet-cone":
            F[0] = U[0] - n_ratio
            F[N - 1] = U[N - 1] - n_ratio
            if want_jacobian:
                put(0, 0, 1.0)
                put(N - 1, N - 1, 1.0)
        else:
            F[0] = _end_slope(U[first.gidx], first.h, "left")
            F[N - 1] = _end_slope(U[last.gidx], last.h, "right")
            if want_jacobian:
                put(0, 0, -3.0 / (2 * first.h))
                put(0, first.gidx[1], 2.0 / first.h)
                put(0, first.gidx[2], -0.5 / first.h)
                put(N - 1, N - 1, 3.0 / (2 * last.h))
                put(N - 1, last.gidx[-2], -2.0 / last.h)
                put(N - 1, last.gidx[-3], 0.5 / last.h)

    if not want_jacobian:
        return F, None
    if ab is not None:
        return F, ("banded", ab)
    J = csr_matrix((vals, (rows, cols)), shape=(N, N))
    return F, ("sparse", J)


def _solve_linear(jac, rhs):
    kind, data = jac
    if kind == "banded":
        return solve_banded((2, 2), data, rhs)
    return spsolve(data, rhs)


def _newton(grid, U0, config):
    U = U0.copy()
    margin = config.spacelike_margin
    if _spacelike_margins(grid, U) < margin:
        raise NotSpacelike("initial guess violates the spacelike graph condition")
    F, _ = _assemble(grid, U, want_jacobian=False)
    res = float(np.max(np.abs(F)))
    history = [res]
    for it in range(config.max_iterations):
        if res < config.tolerance:
            return U, res, it, np.abs(F)
        _, jac = _assemble(grid, U, want_jacobian=True)
        try:
            delta = _solve_linear(jac, -F)
        except Exception as exc:  # singular Jacobian and friends
            raise NoConvergence(
                f"linear solve failed at iteration {it}: {exc}",
                {"iterations": it, "residual": res, "history": history},
            ) from exc
        alpha = 1.0
        while True:
            U_try = U + alpha * delta
            if _spacelike_margins(grid, U_try) >= margin:
                F_try, _ = _assemble(grid, U_try, want_jacobian=False)
                res_try = float(np.max(np.abs(F_try)))
                if res_try < res:
                    U, F, res = U_try, F_try, res_try
                    history.append(res)
                    break
            alpha *= 0.5
            if alpha < config.min_damping:
                raise NoConvergence(
                    "Newton step rejected down to minimum damping",
                    {"iterations": it, "residual": res, "history": history},
                )
    if res < config.tolerance:
        return U, res, config.max_iterations, np.abs(F)
    raise NoConvergence(
        f"no convergence after {config.max_iterations} iterations "
        f"(residual {res:.3e}, tolerance {config.tolerance:.3e})",
        {"iterations": config.max_iterations, "residual": res, "history": history},
    )


# --------------------------------------------------------------------------
# solved fields


@dataclass
class PanelField:
    """Per-panel samples of a height field in local coordinates.

    ``s``/``u``/``du``/``d2u`` are in the model's own (unrescaled) chart;
    ``w``/``dw``/``d2w`` are the rescaled samples over the rescaled panel
    coordinate (wedges stretched by lambda, collars unchanged).
    """

    panel: object
    s: np.ndarray
    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    d2w: np.ndarray
    h: float  # rescaled spacing


@dataclass
class HeightField:
    """Sampled CMC leaf rho = u(xi) at mean curvature tau over a chain model."""

    model: object
    tau: float
    lam: float
    panels: list
    residual_norm: float
    converged: bool
    iterations: int
    residuals: np.ndarray | None = None
    profile: object = None  # exact u(seg_index, s_local) when known
    tolerance: float = 1e-10
    _splines: dict = dataclass_field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.model.n

    def barrier_bounds(self):
        lo = 1.0 / self.lam
        hi = self.model.n / ((self.model.n - 1) * self.lam)
        return lo, hi

    def barrier_violations(self, slack=None):
        """Count samples outside the open barrier interval 1 < w < n/(n-1).

        Checked in rescaled variables.  The exact leaf is strictly inside,
        but the discrete solution legitimately sits within solver tolerance
        of it and the stretched-wedge interior reaches the lower barrier to
        rounding, so the default slack is max(10 x tolerance, 1e-12).
        """
        if slack is None:
            slack = max(10.0 * self.tolerance, 1e-12)
        hi = self.model.n / (self.model.n - 1.0)
        bad = 0
        for pf in self.panels:
            w = pf.w
            bad += int(np.sum(~((w > 1.0 - slack) & (w < hi + slack))))
        return bad

    def panel_spline(self, k):
        """Quintic spline of the rescaled profile on panel k (cached)."""
        if k not in self._splines:
            pf = self.panels[k]
            x = pf.s * (self.lam if pf.panel.kind == "wedge" else 1.0)
            self._splines[k] = make_interp_spline(x, pf.w, k=min(5, len(x) - 1))
        return self._splines[k]

    def u_value(self, seg_index, s_local):
        """Height u at a segment-local coordinate (exact profile if available)."""
        if self.profile is not None:
            return self.profile(seg_index, s_local)
        for k, pf in enumerate(self.panels):
            p = pf.panel
            if p.seg_index == seg_index and p.lo - 1e-12 <= s_local <= p.hi + 1e-12:
                scale = self.lam if p.kind == "wedge" else 1.0
                return float(self.panel_spline(k)((s_local - p.lo) * scale)) / self.lam
        raise ValueError(f"coordinate {s_local} not on segment {seg_index}")

    def panel_for(self, seg_index, s_local):
        for k, pf in enumerate(self.panels):
            p = pf.panel
            if p.seg_index == seg_index and p.lo - 1e-12 <= s_local <= p.hi + 1e-12:
                return k
        raise ValueError(f"coordinate {s_local} not on segment {seg_index}")

    def to_table(self):
        """Columnar rows (xi, segment, u, du, d2u, residual), seams listed per side."""
        offsets = self.model.segment_offsets()
        rows = []
        for pf in self.panels:
            p = pf.panel
            seg = self.model.segments[p.seg_index]
            for i in range(len(pf.s)):
                rows.append(
                    {
                        "xi": offsets[p.seg_index] + p.lo + pf.s[i],
                        "segment": seg.label,
                        "u": pf.u[i],
                        "du": pf.du[i],
                        "d2u": pf.d2u[i],
                        "residual": self.residual_norm if self.converged else math.inf,
                    }
                )
        return rows


def _derivative_arrays(w, h):
    dw = np.empty_like(w)
    dw[1:-1] = (w[2:] - w[:-2]) / (2.0 * h)
    dw[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h)
    dw[-1] = (3.0 * w[-1] - 4.0 * w[-2] + w[-3]) / (2.0 * h)
    d2w = np.empty_like(w)
    d2w[1:-1] = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (h * h)
    d2w[0] = (2.0 * w[0] - 5.0 * w[1] + 4.0 * w[2] - w[3]) / (h * h)
    d2w[-1] = (2.0 * w[-1] - 5.0 * w[-2] + 4.0 * w[-3] - w[-4]) / (h * h)
    return dw, d2w


def _field_from_solution(model, tau, grid, U, res, iters, rvec, profile=None, tolerance=1e-10):
    lam = rescaling_factor(model, tau)
    pfs = []
    for pg in grid.panels:
        w = U[pg.gidx].astype(float)
        dw, d2w = _derivative_arrays(w, pg.h)
        if pg.panel.kind == "wedge":
            s = pg.nodes / lam
            u = w / lam
            du = dw.copy()
            d2u = d2w * lam
        else:
            s = pg.nodes.copy()
            u = w / lam
            du = dw / lam
            d2u = d2w / lam
        pfs.append(PanelField(pg.panel, s, u, du, d2u, w, dw, d2w, pg.h))
    return HeightField(
        model=model,
        tau=tau,
        lam=lam,
        panels=pfs,
        residual_norm=res,
        converged=res < math.inf,
        iterations=iters,
        residuals=rvec,
        profile=profile,
        tolerance=tolerance,
    )


def solve_cmc_leaf(model, tau, config=None, initial=None):
    """Solve for the CMC leaf of mean curvature tau; returns a HeightField.

    ``initial`` may be a previously solved HeightField (continuation along a
    ladder) or an array of rescaled nodal values matching the grid.
    Raises NoConvergence (with diagnostics) if damped Newton stalls and
    NotSpacelike if an iterate breaks the graph condition irrecoverably.
    """
    if not tau < 0:
        raise NonNegativeTau(f"tau must be negative, got {tau}")
    config = config or SolverConfig()
    lam = rescaling_factor(model, tau)
    grid = build_grid(model, lam, config)
    if initial is None:
        n = model.n
        mid = 0.5 * (1.0 + n / (n - 1.0))
        U0 = np.full(grid.size, mid)
    elif isinstance(initial, HeightField):
        U0 = _transfer_initial(initial, grid, lam)
    else:
        U0 = np.asarray(initial, dtype=float)
        if U0.shape != (grid.size,):
            raise ValueError("initial array does not match the grid")
    U, res, iters, rvec = _newton(grid, U0, config)
    return _field_from_solution(
        model, tau, grid, U, res, iters, rvec, tolerance=config.tolerance
    )


def _transfer_initial(prev, grid, lam):
    """Interpolate a previous solution's rescaled profile onto a new grid."""
    U0 = np.empty(grid.size)
    for k, pg in enumerate(grid.panels):
        pf = prev.panels[k]
        x_old = pf.s * (prev.lam if pf.panel.kind == "wedge" else 1.0)
        x_new = pg.nodes
        if pf.panel.kind == "wedge":
            # stretch the old rescaled profile proportionally onto the new width
            x_old = x_old * (x_new[-1] / x_old[-1]) if x_old[-1] > 0 else x_old
        U0[pg.gidx] = np.interp(x_new, x_old, pf.w)
    return U0


def solve_ladder(model, lambdas, config=None, progress=None):
    """Solve the leaf for each lambda (tau = -(n-1) lambda); returns {lambda: field}.

    Direct solves from the barrier midpoint; on failure retries by
    continuation from the nearest already-solved smaller lambda.  Failures are
    re-raised with diagnostics only if continuation also fails.
    """
    config = config or SolverConfig()
    out = {}
    for lam in sorted(lambdas):
        tau = -(model.n - 1) * lam
        try:
            out[lam] = solve_cmc_leaf(model, tau, config)
        except NoConvergence:
            smaller = [x for x in out if x < lam]
            if not smaller:
                raise
            out[lam] = solve_cmc_leaf(model, tau, config, initial=out[max(smaller)])
        if progress is not None:
            progress(lam, out[lam])
    return out


# --------------------------------------------------------------------------
# operators and exact fields


def reduced_mean_curvature(model, segment, u, du, d2u, s_local=None):
    """Graph mean curvature at one chain point from its 2-jet (u, du, d2u).

    ``segment`` is an index or label; ``s_local`` locates the point inside a
    collar (needed for the warp term, ignored for wedges).  Derivatives are in
    the segment's own unrescaled coordinate.  Raises NotSpacelike when the
    induced chain metric coefficient is not positive.
    """
    if isinstance(segment, str):
        seg_index, seg = model.segment_by_label(segment)
    else:
        seg_index, seg = segment, model.segments[segment]
    n = model.n
    if seg.kind == "wedge":
        if not 1.0 - du * du > 0:
            raise NotSpacelike("wedge graph condition |du| < 1 violated")
        return float(_kernels.wedge_H(u, du, d2u, n))
    if s_local is None:
        raise ValueError("collar evaluation needs the local coordinate s_local")
    if not u * u - du * du > 0:
        raise NotSpacelike("collar graph condition |du| < u violated")
    panel = model.panel_at(seg_index, s_local)
    return float(_kernels.collar_H(u, du, d2u, math.tanh(panel.sigma(s_local)), n))


def analytic_field(model, tau, profile, dprofile, d2profile, config=None):
    """Height field sampled from an exact profile u(seg_index, s_local)."""
    config = config or SolverConfig()
    lam = rescaling_factor(model, tau)
    grid = build_grid(model, lam, config)
    U = np.empty(grid.size)
    for pg in grid.panels:
        p = pg.panel
        scale = lam if p.kind == "wedge" else 1.0
        s_loc = p.lo + pg.nodes / scale
        U[pg.gidx] = lam * np.array([profile(p.seg_index, s) for s in s_loc])
    fld = _field_from_solution(
        model, tau, grid, U, 0.0, 0, None, profile=profile, tolerance=config.tolerance
    )
    # overwrite sampled derivatives with the exact ones
    for pf in fld.panels:
        p = pf.panel
        s_loc = p.lo + pf.s
        pf.du[:] = [dprofile(p.seg_index, s) for s in s_loc]
        pf.d2u[:] = [d2profile(p.seg_index, s) for s in s_loc]
        if p.kind == "wedge":
            pf.dw[:] = pf.du
            pf.d2w[:] = pf.d2u / lam
        else:
            pf.dw[:] = pf.du * lam
            pf.d2w[:] = pf.d2u * lam
    return fld


def cone_field(model, tau, config=None):
    """Exact cone leaf u = n/|tau| (a solution only on pure-collar models)."""
    c = model.n / abs(tau)
    return analytic_field(
        model,
        tau,
        lambda si, s: c,
        lambda si, s: 0.0,
        lambda si, s: 0.0,
        config,
    )


def kasner_field(model, config=None):
    """Exact product leaf u = 1 at tau = -(n-1) (all-wedge models)."""
    return analytic_field(
        model,
        -(model.n - 1.0),
        lambda si, s: 1.0,
        lambda si, s: 0.0,
        lambda si, s: 0.0,
        config,
    )


def rescale(field):
    """Return the field in rescaled coordinates: u_lambda = lambda u on the stretched model.

    Wedge widths stretch to lambda*ell; the rescaled leaf has mean curvature
    -(n-1) and sits between the barriers 1 < u_lambda < n/(n-1).  At lambda=1
    this is the identity.
    """
    model = field.model
    lam = field.lam
    if lam == 1.0:
        return field
    from .model import Segment

    segs = [
        Segment(
            s.kind,
            s.width * (lam if s.kind == "wedge" else 1.0),
            s.cross_section_volume,
            s.label,
            s.geodesic_loci,
        )
        for s in model.segments
    ]
    stretched = build_model(model.n, segs, model.closure, model.outer_boundary)
    pfs = []
    for pf in field.panels:
        scale = lam if pf.panel.kind == "wedge" else 1.0
        new_panel = stretched.panel_at(
            pf.panel.seg_index, 0.5 * (pf.panel.lo + pf.panel.hi) * scale
        )
        pfs.append(
            PanelField(
                panel=new_panel,
                s=pf.s * scale,
                u=pf.w.copy(),
                du=pf.dw.copy(),
                d2u=pf.d2w.copy(),
                w=pf.w.copy(),
                dw=pf.dw.copy(),
                d2w=pf.d2w.copy(),
                h=pf.h,
            )
        )
    profile = None
    if field.profile is not None:
        old = field.profile

        def profile(si, s, _old=old, _m=model, _lam=lam):
            scale = _lam if _m.segments[si].kind == "wedge" else 1.0
            return _lam * _old(si, s / scale)

    return HeightField(
        model=stretched,
        tau=-(model.n - 1.0),
        lam=1.0,
        panels=pfs,
        residual_norm=field.residual_norm,
        converged=field.converged,
        iterations=field.iterations,
        residuals=field.residuals,
        profile=profile,
        tolerance=field.tolerance,
    )


# --------------------------------------------------------------------------
# independent finite-difference oracle


def _hyperbolic_exp(w):
    """Exponential-chart embedding of H^(d) into Minkowski^(d+1) at the base point."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    r = float(np.linalg.norm(w))
    if r < 1e-30:
        head, tail = 1.0, w
    else:
        head = math.cosh(r)
        tail = math.sinh(r) / r * w
    return head, tail


def _embedding(field, panel):
    """Rescaled flat-chart embedding X(params) of the leaf near a panel.

    Parameters are (x_1..x_{n-1}, chain) with x the cross-section exponential
    chart; returns a callable producing points of Minkowski^(n+1).
    """
    kidx = None
    for j, pf in enumerate(field.panels):
        if pf.panel.seg_index == panel.seg_index and abs(pf.panel.lo - panel.lo) < 1e-12:
            kidx = j
            break
    if kidx is None:
        raise ValueError("panel does not belong to this field")

    def w_of(chain):
        if field.profile is not None:
            scale = field.lam if panel.kind == "wedge" else 1.0
            return field.lam * field.profile(panel.seg_index, panel.lo + chain / scale)
        return float(field.panel_spline(kidx)(chain))

    if panel.kind == "wedge":
        def X(params):
            x = params[:-1]
            chain = params[-1]
            w = w_of(chain)
            head, tail = _hyperbolic_exp(x)
            return np.concatenate(([w * head], w * tail, [chain]))
    else:
        def X(params):
            x = params[:-1]
            chain = params[-1]
            w = w_of(chain)
            sig = panel.sigma(panel.lo + chain)
            head, tail = _hyperbolic_exp(x)
            cs, ss = math.cosh(sig), math.sinh(sig)
            return np.concatenate(([w * cs * head], w * cs * tail, [w * ss]))

    return X


def _fd_mean_curvature_at(X, base, step, n):
    """Mean curvature of a parametrized spacelike surface by central differences."""
    dim = n  # number of parameters
    amb = n + 1
    T = np.zeros((dim, amb))
    S = np.zeros((dim, dim, amb))
    X0 = X(base)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = step
        Xp = X(base + e)
        Xm = X(base - e)
        T[i] = (Xp - Xm) / (2.0 * step)
        S[i, i] = (Xp - 2.0 * X0 + Xm) / (step * step)
    for i in range(dim):
        for j in range(i + 1, dim):
            ei = np.zeros(dim)
            ej = np.zeros(dim)
            ei[i] = step
            ej[j] = step
            Spp = X(base + ei + ej)
            Spm = X(base + ei - ej)
            Smp = X(base - ei + ej)
            Smm = X(base - ei - ej)
            S[i, j] = S[j, i] = (Spp - Spm - Smp + Smm) / (4.0 * step * step)

    eta = np.ones(amb)
    eta[0] = -1.0
    g = np.einsum("ia,ja,a->ij", T, T, eta)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise StepTooLarge("differenced surface is not spacelike") from exc
    # future unit timelike normal: eta-orthogonal to all tangents
    M = T * eta  # rows are eta-lowered tangents
    _, _, vh = np.linalg.svd(M)
    N = vh[-1]
    norm2 = float(N @ (eta * N))
    if norm2 >= 0:
        raise StepTooLarge("no timelike normal direction found")
    N = N / math.sqrt(-norm2)
    if N[0] < 0:
        N = -N
    K = np.einsum("ija,a,a->ij", S, eta, N)
    return float(np.trace(np.linalg.solve(g, K)))


def fd_mean_curvature_oracle(field, samples=None, step=1e-2):
    """Independent mean-curvature check via the flat-chart embedding.

    Differencing happens on the rescaled leaf, whose target curvature is
    -(n-1); returned residuals |H_fd + (n-1)| are in that normalization.
    ``samples`` is a list of (segment_index, s_local) chart positions; by
    default each panel contributes a handful of interior nodes.  The
    step is in rescaled chain units and must keep the stencil inside a panel.
    """
    model = field.model
    n = model.n
    if samples is None:
        samples = []
        for pf in field.panels:
            p = pf.panel
            for frac in (0.25, 0.5, 0.75):
                samples.append((p.seg_index, p.lo + frac * p.width))
    residuals = []
    for seg_index, s_local in samples:
        kidx = field.panel_for(seg_index, s_local)
        panel = field.panels[kidx].panel
        scale = field.lam if panel.kind == "wedge" else 1.0
        chain = (s_local - panel.lo) * scale
        width = panel.width * scale
        if chain < 2 * step or chain > width - 2 * step:
            raise StepTooLarge(
                f"sample at {s_local} is within 2 steps of a panel edge"
            )
        X = _embedding(field, panel)
        base = np.zeros(n)
        base[-1] = chain
        H = _fd_mean_curvature_at(X, base, step, n)
        residuals.append(abs(H + (n - 1.0)))
    return np.asarray(residuals)


def oracle_order_study(field, samples, steps):
    """Measured convergence order of the oracle residual under step halving."""
    sups = []
    for st in steps:
        sups.append(float(np.max(fd_mean_curvature_oracle(field, samples, st))))
    orders = []
    for a, b, ha, hb in zip(sups[:-1], sups[1:], steps[:-1], steps[1:]):
        orders.append(math.log(a / b) / math.log(ha / hb))
    return sups, orders


# --------------------------------------------------------------------------
# ladder diagnostics


@dataclass(frozen=True)
class KasnerLimitReport:
    """Sup-norm decay of the rescaled height toward the product leaf."""

    lambdas: tuple
    wedge_label: str
    sup_dev: tuple
    sup_d1: tuple
    sup_d2: tuple
    floors: tuple
    monotone: dict
    fits: dict
    derivative_bound_constant: float
    derivative_bound_table: dict


def _wedge_window_arrays(field, wedge_label, window):
    seg_index, seg = field.model.segment_by_label(wedge_label)
    for pf in field.panels:
        if pf.panel.seg_index == seg_index:
            lo = window[0] * seg.width
            hi = window[1] * seg.width
            mask = (pf.s >= lo - 1e-12) & (pf.s <= hi + 1e-12)
            return pf, mask
    raise KeyError(wedge_label)


def _decreasing_with_floor(values, floor):
    for a, b in zip(values[:-1], values[1:]):
        if b >= a and not (a <= floor and b <= floor):
            return False
    return True


def kasner_limit_check(fields, wedge_label=None, window=(0.25, 0.75), epsilons=(0.1, 0.2)):
    """Measure sup|u_lambda - 1| and derivative sup-norms on a wedge window.

    ``fields`` maps lambda to a converged HeightField (>= 4 rungs).  The
    sup-norms converge exponentially in the stretched wedge, so monotone
    decrease is checked with a numerical floor: once consecutive rungs sit at
    the solver/roundoff floor the comparison is vacuous.
    """
    if len(fields) < 4:
        raise InsufficientLadder("kasner limit check needs >= 4 ladder points")
    lams = tuple(sorted(fields))
    sample = fields[lams[0]]
    if wedge_label is None:
        wedge_label = sample.model.wedge_labels[0]
    sup_dev, sup_d1, sup_d2 = [], [], []
    dbound = {eps: [] for eps in epsilons}
    tol = 1e-10
    hmin = math.inf
    for lam in lams:
        f = fields[lam]
        if not f.converged:
            raise NoConvergence(f"ladder field at lambda={lam} not converged")
        pf, mask = _wedge_window_arrays(f, wedge_label, window)
        hmin = min(hmin, pf.h)
        sup_dev.append(float(np.max(np.abs(pf.w[mask] - 1.0))))
        sup_d1.append(float(np.max(np.abs(pf.dw[mask]))))
        sup_d2.append(float(np.max(np.abs(pf.d2w[mask]))))
        seg = f.model.segments[pf.panel.seg_index]
        for eps in epsilons:
            emask = (pf.s >= eps * seg.width) & (pf.s <= (1 - eps) * seg.width)
            sup_du = float(np.max(np.abs(pf.du[emask])))
            dbound[eps].append(lam * (eps * seg.width) * sup_du)
    floor0 = 10.0 * tol
    floors = (floor0, floor0 * 2.0 / hmin, floor0 * 4.0 / (hmin * hmin))
    monotone = {
        "dev": _decreasing_with_floor(sup_dev, floors[0]),
        "d1": _decreasing_with_floor(sup_d1, floors[1]),
        "d2": _decreasing_with_floor(sup_d2, floors[2]),
    }
    fits = {}
    for name, vals in (("dev", sup_dev), ("d1", sup_d1), ("d2", sup_d2)):
        fits[name] = fit_or_degenerate(list(zip(lams, vals)))
    cmax = max(max(v) for v in dbound.values())
    return KasnerLimitReport(
        lambdas=lams,
        wedge_label=wedge_label,
        sup_dev=tuple(sup_dev),
        sup_d1=tuple(sup_d1),
        sup_d2=tuple(sup_d2),
        floors=floors,
        monotone=monotone,
        fits=fits,
        derivative_bound_constant=cmax,
        derivative_bound_table={eps: tuple(v) for eps, v in dbound.items()},
    )
