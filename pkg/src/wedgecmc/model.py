"""Reduced chain models of flat wedge and simplicial spacetimes.

A model is a chain of segments over a 1-dimensional "chain coordinate":

* ``collar`` segments carry the cone over a hyperbolic collar.  In geodesic
  Fermi coordinates the spatial metric is ``ds^2 + cosh^2(sigma) h`` with
  ``sigma`` the signed distance to the totally geodesic cross-section, so the
  cross-section volume at chain position s is ``V * cosh(sigma(s))^(n-1)``.
* ``wedge`` segments carry the flat slab ``-d rho^2 + rho^2 h + dr^2`` of
  width ``ell`` glued along totally geodesic cross-sections.

Interior collars of multi-wedge chains must be geodesic at both junctions,
which the smooth cosh warp cannot do; the symmetric reduction therefore glues
two cosh branches at the collar midpoint.  The kink carries distributional
curvature and is recorded as a model caveat, never silently ignored.

Sign convention used throughout the package: the second fundamental form of a
rho-level set is K = -1/2 d_rho g with future-pointing normal, so expanding
leaves have mean curvature tau < 0 (``-n/rho`` off the wedges, ``-(n-1)/rho``
on them).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    AdjacencyError,
    BadDimension,
    ChartError,
    JunctionMismatch,
    NonNegativeTau,
)

JUNCTION_RTOL = 1e-12


@dataclass(frozen=True)
class Segment:
    """One chain segment: a collar or a wedge.

    ``width`` is the proper extent in the segment's own coordinate (s for
    collars, r for wedges).  ``cross_section_volume`` is Vol(Sigma) for a
    wedge and the volume at the geodesic locus (warp minimum) for a collar.
    ``geodesic_loci`` positions the warp minima inside a collar, in local
    coordinates; ``None`` lets build_model choose from chain context.
    """

    kind: str
    width: float
    cross_section_volume: float
    label: str = ""
    geodesic_loci: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("collar", "wedge"):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not self.width > 0:
            raise ValueError("segment width must be positive")
        if not self.cross_section_volume > 0:
            raise ValueError("cross-section volume must be positive")
        if self.kind == "wedge" and self.geodesic_loci is not None:
            raise ValueError("geodesic_loci only applies to collars")


@dataclass(frozen=True)
class Panel:
    """Maximal smooth piece of a segment.

    Collar segments split at warp kinks (Voronoi midpoints between geodesic
    loci); each collar panel has exactly one locus and signed distance
    ``sigma(s) = s - locus``.  Wedge segments are a single panel.
    """

    seg_index: int
    kind: str
    lo: float
    hi: float
    locus: float = 0.0

    @property
    def width(self):
        return self.hi - self.lo

    def sigma(self, s):
        """Signed geodesic distance of local coordinate s from the warp minimum."""
        return s - self.locus


@dataclass(frozen=True)
class ChartPoint:
    """A point of the chain chart: segment index, local coordinate, cosmological time."""

    segment: int
    xi: float
    rho: float
    x: float = 0.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")


@dataclass(frozen=True)
class MinkowskiPoint:
    """Flat-chart image of a chain point: time t, spatial block y, slab coordinate r."""

    t: float
    y: tuple[float, ...]
    r: float = 0.0

    def rho(self):
        """Cosmological time recovered from the flat chart."""
        q = self.t * self.t - sum(v * v for v in self.y)
        if q <= 0:
            raise ChartError("point outside the interior of the light cone")
        return math.sqrt(q)


@dataclass(frozen=True)
class ModelSpec:
    """Validated chain model.  Immutable; safe to share across solver workers."""

    n: int
    segments: tuple[Segment, ...]
    closure: str
    outer_boundary: str
    panels: tuple[Panel, ...] = field(default=())
    caveats: tuple[str, ...] = field(default=())

    @property
    def periodic(self):
        return self.closure == "periodic"

    @property
    def wedge_labels(self):
        return tuple(s.label for s in self.segments if s.kind == "wedge")

    def segment_offsets(self):
        """Cumulative chain coordinate at each segment start."""
        out, acc = [], 0.0
        for s in self.segments:
            out.append(acc)
            acc += s.width
        return out

    def total_width(self):
        return sum(s.width for s in self.segments)

    def segment_by_label(self, label):
        for i, s in enumerate(self.segments):
            if s.label == label:
                return i, s
        raise KeyError(label)

    def panels_of_segment(self, seg_index):
        return [p for p in self.panels if p.seg_index == seg_index]

    def panel_at(self, seg_index, s_local):
        for p in self.panels_of_segment(seg_index):
            if p.lo - 1e-15 <= s_local <= p.hi + 1e-15:
                return p
        raise ChartError(f"coordinate {s_local} outside segment {seg_index}")

    def cross_section_volume_at(self, seg_index, s_local):
        """Cross-section volume V(s) of the base geometry at a chain position."""
        seg = self.segments[seg_index]
        if seg.kind == "wedge":
            return seg.cross_section_volume
        panel = self.panel_at(seg_index, s_local)
        return seg.cross_section_volume * math.cosh(panel.sigma(s_local)) ** (self.n - 1)

    def base_volume(self, collars_only=True):
        """Volume of the modeled base hyperbolic geometry (collar regions).

        The wedges are flat insertions and do not belong to the hyperbolic
        base; with ``collars_only=False`` the wedge slabs' base volume
        (width times cross-section volume) is added.
        """
        total = 0.0
        m = self.n - 1
        for p in self.panels:
            seg = self.segments[p.seg_index]
            if seg.kind == "collar":
                # integral of V cosh^m over the panel, closed form via sinh for m=1,
                # numeric for higher m
                a, b = p.sigma(p.lo), p.sigma(p.hi)
                total += seg.cross_section_volume * _cosh_power_integral(m, a, b)
            elif not collars_only:
                total += seg.cross_section_volume * seg.width
        return total


def _cosh_power_integral(m, a, b):
    """Integral of cosh(x)^m over [a, b], by the reduction formula."""
    if m == 0:
        return b - a

    def antideriv(m, x):
        if m == 0:
            return x
        if m == 1:
            return math.sinh(x)
        return (math.cosh(x) ** (m - 1) * math.sinh(x) + (m - 1) * antideriv(m - 2, x)) / m

    return antideriv(m, b) - antideriv(m, a)


def _resolve_loci(segments, closure):
    """Choose geodesic loci for collars that did not declare them.

    Collars flanked by wedges on both sides (cyclically, for periodic
    closures) are geodesic at both junctions, giving a tent warp with a
    midpoint kink.  A collar with a wedge on one side only is geodesic at
    that junction.  A lone collar is geodesic at its start.
    """
    n_seg = len(segments)
    resolved = []
    for i, seg in enumerate(segments):
        if seg.kind == "wedge" or seg.geodesic_loci is not None:
            resolved.append(seg)
            continue
        left = segments[(i - 1) % n_seg] if (i > 0 or closure == "periodic") else None
        right = segments[(i + 1) % n_seg] if (i < n_seg - 1 or closure == "periodic") else None
        wedge_left = left is not None and left.kind == "wedge"
        wedge_right = right is not None and right.kind == "wedge"
        if n_seg == 1 and closure == "periodic":
            loci = (0.0, seg.width)
        elif wedge_left and wedge_right:
            loci = (0.0, seg.width)
        elif wedge_left:
            loci = (0.0,)
        elif wedge_right:
            loci = (seg.width,)
        else:
            loci = (0.0,)
        resolved.append(
            Segment(seg.kind, seg.width, seg.cross_section_volume, seg.label, loci)
        )
    return resolved


def _build_panels(segments):
    panels = []
    kinks = []
    for i, seg in enumerate(segments):
        if seg.kind == "wedge":
            panels.append(Panel(i, "wedge", 0.0, seg.width))
            continue
        loci = sorted(seg.geodesic_loci)
        cuts = [0.0]
        for a, b in zip(loci[:-1], loci[1:]):
            mid = 0.5 * (a + b)
            if 0.0 < mid < seg.width:
                cuts.append(mid)
                kinks.append((i, mid))
        cuts.append(seg.width)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi - lo <= 0:
                continue
            centre = 0.5 * (lo + hi)
            locus = min(loci, key=lambda z: abs(z - centre))
            panels.append(Panel(i, "collar", lo, hi, locus))
    return panels, kinks


def build_model(n, segments, closure="truncated", outer_boundary="neumann"):
    """Validate a chain description and return an immutable ModelSpec.

    Raises BadDimension, AdjacencyError or JunctionMismatch on invalid input.
    Junction continuity requires the collar cross-section volume evaluated at
    each junction, ``V cosh^(n-1)(sigma)``, to match the adjacent wedge's
    volume to relative tolerance 1e-12.
    """
    if not isinstance(n, int) or n < 2:
        raise BadDimension(f"spatial dimension must be an integer >= 2, got {n}")
    segments = list(segments)
    if not segments:
        raise ValueError("segment list must be nonempty")
    if closure not in ("truncated", "periodic"):
        raise ValueError(f"unknown closure {closure!r}")
    if outer_boundary not in ("neumann", "dirichlet-cone"):
        raise ValueError(f"unknown outer boundary {outer_boundary!r}")

    # unique labels, auto-filled when blank
    seen = set()
    labeled = []
    for i, s in enumerate(segments):
        label = s.label or f"{'W' if s.kind == 'wedge' else 'C'}{i + 1}"
        if label in seen:
            raise ValueError(f"duplicate segment label {label!r}")
        seen.add(label)
        labeled.append(Segment(s.kind, s.width, s.cross_section_volume, label, s.geodesic_loci))
    segments = labeled

    n_seg = len(segments)
    pairs = list(zip(range(n_seg - 1), range(1, n_seg)))
    if closure == "periodic" and n_seg > 1:
        pairs.append((n_seg - 1, 0))
    for i, j in pairs:
        if segments[i].kind == "wedge" and segments[j].kind == "wedge":
            raise AdjacencyError(
                f"wedge segments {segments[i].label!r} and {segments[j].label!r} "
                "are adjacent without an intervening collar"
            )

    segments = _resolve_loci(segments, closure)
    panels, kinks = _build_panels(segments)

    spec = ModelSpec(
        n=n,
        segments=tuple(segments),
        closure=closure,
        outer_boundary=outer_boundary,
        panels=tuple(panels),
    )

    # junction continuity of the cross-section volume
    junctions = list(pairs)
    if closure == "periodic" and n_seg == 1:
        junctions = [(0, 0)]
    for i, j in junctions:
        vol_left = spec.cross_section_volume_at(i, segments[i].width)
        vol_right = spec.cross_section_volume_at(j, 0.0)
        ref = max(abs(vol_left), abs(vol_right))
        if abs(vol_left - vol_right) > JUNCTION_RTOL * ref:
            raise JunctionMismatch(
                f"cross-section volume jumps from {vol_left!r} to {vol_right!r} "
                f"at junction {segments[i].label!r}|{segments[j].label!r}"
            )

    caveats = []
    if closure == "truncated":
        caveats.append(
            "truncated chain: the far field beyond the outer collars is not modeled; "
            f"outer boundary condition is '{outer_boundary}'"
        )
    else:
        caveats.append(
            "periodic closure: symmetric reduction of a necklace of wedges, "
            "not a closed hyperbolic manifold"
        )
    for i, pos in kinks:
        caveats.append(
            f"distributional curvature at collar kink: segment {segments[i].label!r} "
            f"at local coordinate {pos:g}"
        )
    if n_seg == 1 and segments[0].kind == "wedge" and closure == "periodic":
        caveats.append("single periodic wedge: flat Kasner-type product chain")

    return ModelSpec(
        n=spec.n,
        segments=spec.segments,
        closure=spec.closure,
        outer_boundary=spec.outer_boundary,
        panels=spec.panels,
        caveats=tuple(caveats),
    )


# --------------------------------------------------------------------------
# closed-form level-set data


def level_set_mean_curvature(model, point):
    """Exact mean curvature of the rho-level set through a chart point.

    Collar regions see the full cone (-n/rho); wedge slabs only curve in the
    cross-section directions (-(n-1)/rho).
    """
    seg = model.segments[point.segment]
    if not -1e-12 <= point.xi <= seg.width + 1e-12:
        raise ChartError(f"xi={point.xi} outside segment of width {seg.width}")
    if seg.kind == "collar":
        return -model.n / point.rho
    return -(model.n - 1) / point.rho


def barrier_interval(model, tau):
    """Open rho-interval (1/lambda, n/((n-1) lambda)) confining any CMC leaf of mean curvature tau."""
    if not tau < 0:
        raise NonNegativeTau(f"tau must be negative, got {tau}")
    lam = abs(tau) / (model.n - 1)
    return 1.0 / lam, model.n / ((model.n - 1) * lam)


def rescaling_factor(model, tau):
    """lambda = |tau|/(n-1): the homothety taking the tau-leaf to mean curvature -(n-1)."""
    if not tau < 0:
        raise NonNegativeTau(f"tau must be negative, got {tau}")
    return abs(tau) / (model.n - 1)


def minkowski_embed(model, point, x=None):
    """Embed a chart point into the flat chart of its segment's universal cover.

    Wedge chart: (t, y, r) = (rho cosh x, rho sinh x, r), so t^2 - y^2 = rho^2.
    Collar chart: the cone over Fermi coordinates,
    (t, y1, y2) = rho (cosh sigma cosh x, cosh sigma sinh x, sinh sigma).
    In the reduction x is the single cross-section arc coordinate.
    """
    if x is None:
        x = point.x
    seg = model.segments[point.segment]
    if not -1e-12 <= point.xi <= seg.width + 1e-12:
        raise ChartError(f"xi={point.xi} outside segment of width {seg.width}")
    rho = point.rho
    if seg.kind == "wedge":
        return MinkowskiPoint(
            t=rho * math.cosh(x), y=(rho * math.sinh(x),), r=point.xi
        )
    panel = model.panel_at(point.segment, point.xi)
    sig = panel.sigma(point.xi)
    return MinkowskiPoint(
        t=rho * math.cosh(sig) * math.cosh(x),
        y=(rho * math.cosh(sig) * math.sinh(x), rho * math.sinh(sig)),
        r=0.0,
    )


# --------------------------------------------------------------------------
# convenience constructors for the standard laboratory models


def pure_collar_model(n, extent, volume, outer_boundary="neumann"):
    """Truncated cone model: a single collar, geodesic at its start."""
    seg = Segment("collar", extent, volume, "C1", (0.0,))
    return build_model(n, [seg], "truncated", outer_boundary)


def kasner_model(n, ell, volume):
    """Single periodic wedge: the flat product chain with exact leaf rho = const."""
    return build_model(n, [Segment("wedge", ell, volume, "W1")], "periodic")


def single_wedge_model(n, ell, volume, s_max, outer_boundary="neumann"):
    """Wedge of width ell between two outer collars of extent s_max."""
    return build_model(
        n,
        [
            Segment("collar", s_max, volume, "CL"),
            Segment("wedge", ell, volume, "W1"),
            Segment("collar", s_max, volume, "CR"),
        ],
        "truncated",
        outer_boundary,
    )


def chain_model(n, wedges, inner_extent, s_max, outer_boundary="neumann"):
    """Truncated chain of wedges (label, ell, volume) joined by interior collars.

    Interior collars are geodesic at both junctions (tent warp); all
    cross-section volumes must already satisfy junction continuity, which for
    the tent warp means equal wedge volumes.
    """
    segs = []
    first_vol = wedges[0][2]
    segs.append(Segment("collar", s_max, first_vol, "CL"))
    for k, (label, ell, vol) in enumerate(wedges):
        segs.append(Segment("wedge", ell, vol, label))
        if k < len(wedges) - 1:
            segs.append(Segment("collar", inner_extent, vol, f"C{k + 1}"))
    segs.append(Segment("collar", s_max, wedges[-1][2], "CR"))
    return build_model(n, segs, "truncated", outer_boundary)


def necklace_model(n, wedges, collar_extent):
    """Periodic chain alternating wedges (label, ell, volume) and tent collars."""
    segs = []
    for k, (label, ell, vol) in enumerate(wedges):
        segs.append(Segment("wedge", ell, vol, label))
        segs.append(Segment("collar", collar_extent, vol, f"C{k + 1}"))
    return build_model(n, segs, "periodic")
