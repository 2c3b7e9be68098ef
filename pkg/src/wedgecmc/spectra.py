"""Weighted multicurves, the dual metric tree, and leaf length spectra.

A curve class is crossing data: a cyclic word over wedge labels plus an
integer cross-section winding.  The measure spectrum is the weighted
intersection number sum over the word; the dual-tree translation length of
the class's axis (a line whose edge pattern repeats the word) equals it
exactly, and is additionally verified here by brute-force minimization of
d(p, alpha p) over a discretized fundamental segment.

Leaf lengths are assembled from chain-line legs: each wedge crossing costs
its leaf width, and transitions between crossings run through the off-wedge
collar complex.  Collar deep ends (outer truncation boundaries and tent
kinks) model the entrance to the unmodeled bulk of the hyperbolic piece,
whose leaf-metric size is O(1/lambda); paths through the bulk hub carry the
collar approach cost only.  On periodic chains there is no bulk, so only
cyclic walks of the necklace are realizable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import ClassNotRealizable, InsufficientLadder, UnknownLabel
from .fitting import fit_or_degenerate
from .leaf import clairaut_distance, min_circumference, panel_geometry


@dataclass(frozen=True)
class MultiCurve:
    """Weighted multicurve: one (label, weight, cross-section volume) per wedge."""

    entries: tuple

    def __post_init__(self):
        labels = [e[0] for e in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate wedge labels in multicurve")
        for label, weight, vol in self.entries:
            if not (weight > 0 and vol > 0):
                raise ValueError(f"weights and volumes must be positive ({label})")

    @classmethod
    def from_model(cls, model):
        return cls(
            tuple(
                (s.label, s.width, s.cross_section_volume)
                for s in model.segments
                if s.kind == "wedge"
            )
        )

    def weight(self, label):
        for lab, weight, _ in self.entries:
            if lab == label:
                return weight
        raise UnknownLabel(label)

    @property
    def labels(self):
        return tuple(e[0] for e in self.entries)

    def total_weighted_volume(self):
        return sum(w * v for _, w, v in self.entries)


@dataclass(frozen=True)
class CurveClass:
    """Free-homotopy class given by crossing data (cyclic word) and winding."""

    label: str
    crossings: tuple = ()
    winding: int = 0

    def __post_init__(self):
        if not self.crossings and self.winding == 0:
            raise ValueError("trivial class: no crossings and zero winding")

    def counts(self):
        out = {}
        for c in self.crossings:
            out[c] = out.get(c, 0) + 1
        return out


@dataclass(frozen=True)
class TreeLength:
    value: float
    hyperbolic: bool


def measure_spectrum(multicurve, curve_class):
    """Weighted intersection number sum_k m_k ell_k of the class with the multicurve."""
    total = 0.0
    for lab in curve_class.crossings:
        total += multicurve.weight(lab)
    return total


@dataclass
class DualTree:
    """Dual metric tree of the multicurve, seen along one class axis.

    The deck element of a crossing word translates its axis, a line whose
    edge lengths repeat the word's weights; the translation length is the
    word period.  Trivial words are elliptic (flagged, length 0).
    """

    multicurve: MultiCurve

    def axis_edges(self, curve_class):
        return tuple(self.multicurve.weight(lab) for lab in curve_class.crossings)

    def translation_length(self, curve_class):
        edges = self.axis_edges(curve_class)
        if not edges:
            return TreeLength(0.0, False)
        total = 0.0
        for e in edges:
            total += e
        return TreeLength(total, True)

    def compose(self, class_a, class_b):
        """Deck composition: word concatenation (translation lengths add on the axis)."""
        return CurveClass(
            label=f"{class_a.label}*{class_b.label}",
            crossings=class_a.crossings + class_b.crossings,
            winding=class_a.winding + class_b.winding,
        )

    def brute_force_translation_length(self, curve_class, resolution=1e-4):
        """inf_p d(p, alpha p) minimized over a discretized fundamental segment.

        Points live on the axis line with repeating edge pattern; alpha shifts
        by one word period.  Serves as the independent oracle for
        translation_length.
        """
        edges = self.axis_edges(curve_class)
        if not edges:
            return TreeLength(0.0, False)
        period = 0.0
        for e in edges:
            period += e
        npts = max(2, int(math.ceil(period / resolution)) + 1)
        ps = np.linspace(0.0, period, npts)
        # metric on the line is euclidean in the accumulated-length coordinate,
        # so d(p, alpha p) = |(p + period) - p|; the discretization scans it
        dists = np.abs((ps + period) - ps)
        return TreeLength(float(np.min(dists)), True)


# --------------------------------------------------------------------------
# leaf lengths


def _chain_line_length(field, panel_field):
    geo = panel_geometry(field, panel_field)
    return float(np.trapezoid(np.sqrt(geo["A"]), panel_field.s))


def _off_wedge_graph(field):
    """Shortest off-wedge leaf distances between wedge seam points.

    Nodes: wedge seams ('L', label)/('R', label) and the bulk hub.  Collar
    panels connect their end nodes at chain-line leg cost; deep ends (outer
    boundaries, tent kinks) connect to the hub at zero extra cost.  Returns a
    dict of pairwise distances between seam nodes.
    """
    model = field.model
    nodes = set()
    edges = []
    n_seg = len(model.segments)

    def boundary_node(seg_index, side):
        """Node name for a collar panel end at segment-local position."""
        seg = model.segments[seg_index]
        # which neighbors flank this position
        if side == "start":
            if seg_index == 0 and not model.periodic:
                return ("deep", "outer-left")
            other = model.segments[(seg_index - 1) % n_seg]
            if other.kind == "wedge":
                return ("seam", "R", other.label)
            return ("join", (seg_index - 1) % n_seg, seg_index)
        else:
            if seg_index == n_seg - 1 and not model.periodic:
                return ("deep", "outer-right")
            other = model.segments[(seg_index + 1) % n_seg]
            if other.kind == "wedge":
                return ("seam", "L", other.label)
            return ("join", seg_index, (seg_index + 1) % n_seg)

    for pf in field.panels:
        p = pf.panel
        if p.kind != "collar":
            continue
        seg = model.segments[p.seg_index]
        cost = _chain_line_length(field, pf)
        lo_is_seg_start = abs(p.lo) < 1e-12
        hi_is_seg_end = abs(p.hi - seg.width) < 1e-12
        a = boundary_node(p.seg_index, "start") if lo_is_seg_start else ("deep", (p.seg_index, p.lo))
        b = boundary_node(p.seg_index, "end") if hi_is_seg_end else ("deep", (p.seg_index, p.hi))
        nodes.update((a, b))
        edges.append((a, b, cost))

    if not model.periodic:
        hub = ("hub",)
        nodes.add(hub)
        for nd in list(nodes):
            if nd[0] == "deep":
                edges.append((nd, hub, 0.0))

    # Floyd-Warshall on the tiny node set
    nodes = sorted(nodes, key=repr)
    idx = {nd: i for i, nd in enumerate(nodes)}
    m = len(nodes)
    dist = np.full((m, m), np.inf)
    np.fill_diagonal(dist, 0.0)
    for a, b, cost in edges:
        i, j = idx[a], idx[b]
        dist[i, j] = min(dist[i, j], cost)
        dist[j, i] = dist[i, j]
    for k in range(m):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return nodes, idx, dist


def _wedge_crossing_cost(field):
    out = {}
    for pf in field.panels:
        if pf.panel.kind == "wedge":
            out[field.model.segments[pf.panel.seg_index].label] = _chain_line_length(
                field, pf
            )
    return out


def _necklace_walk_multiplicity(model, word):
    """Number of full cyclic turns if the word is a walk of the periodic chain."""
    order = [s.label for s in model.segments if s.kind == "wedge"]
    k = len(order)
    if len(word) % k != 0:
        return None
    if k == 0:
        return None
    # word must be a rotation of order repeated q times
    q = len(word) // k
    for shift in range(k):
        expect = tuple(order[(shift + i) % k] for i in range(len(word)))
        if tuple(word) == expect:
            return q
    return None


def leaf_length_spectrum(field, curve_class):
    """Shortest closed leaf curve in the class (n=2 reduction).

    Pure-winding classes wrap the smallest cross-section circumference.
    Crossing classes on periodic chains must be cyclic walks of the necklace
    and may carry winding (single conserved-momentum geodesic on the cover).
    On truncated chains, crossings are connected through the collar complex
    and bulk hub (winding along such hub transitions is not realizable).
    """
    model = field.model
    word = curve_class.crossings
    for lab in word:
        if lab not in model.wedge_labels:
            raise UnknownLabel(lab)
    if not word:
        return abs(curve_class.winding) * min_circumference(field)

    if model.periodic:
        q = _necklace_walk_multiplicity(model, word)
        if q is None:
            raise ClassNotRealizable(
                f"word {word!r} is not a cyclic walk of the periodic chain"
            )
        # chain-line length of one full turn including collars
        turn = 0.0
        for pf in field.panels:
            turn += _chain_line_length(field, pf)
        if curve_class.winding == 0:
            return q * turn
        # single geodesic on the cover with total cross-section displacement
        return _periodic_winding_length(field, q, curve_class.winding)

    if curve_class.winding != 0:
        raise ClassNotRealizable(
            "winding combined with crossings is only realizable on periodic chains"
        )
    crossing = _wedge_crossing_cost(field)
    nodes, idx, dist = _off_wedge_graph(field)

    def seam(side, label):
        return idx[("seam", side, label)]

    m = len(word)
    best = math.inf
    # optimize crossing directions: direction[i] True means L->R
    for mask in range(1 << m):
        total = 0.0
        ok = True
        for i, lab in enumerate(word):
            total += crossing[lab]
            d_i = bool(mask >> i & 1)
            nxt = word[(i + 1) % m]
            d_n = bool(mask >> ((i + 1) % m) & 1)
            exit_node = seam("R" if d_i else "L", lab)
            entry_node = seam("L" if d_n else "R", nxt)
            hop = dist[exit_node, entry_node]
            if not np.isfinite(hop):
                ok = False
                break
            total += float(hop)
        if ok:
            best = min(best, total)
    if not math.isfinite(best):
        raise ClassNotRealizable(f"no off-wedge connection realizes {word!r}")
    return best


def _periodic_winding_length(field, turns, winding):
    """Clairaut geodesic length for q turns of the necklace with net winding."""
    model = field.model
    offs = model.segment_offsets()
    total_width = model.total_width()
    # unroll q turns of the chain on the cover and shoot a single momentum
    xi_list, A_list, B_list = [], [], []
    for rep in range(turns):
        for pf in field.panels:
            geo = panel_geometry(field, pf)
            base = offs[pf.panel.seg_index] + pf.panel.lo + rep * total_width
            xi_list.append(base + pf.s)
            A_list.append(geo["A"])
            B_list.append(geo["B"])
    xi = np.concatenate(xi_list)
    A = np.concatenate(A_list)
    B = np.concatenate(B_list)
    order = np.argsort(xi, kind="stable")
    xi, A, B = xi[order], A[order], B[order]
    dx = abs(winding)
    from scipy.optimize import brentq

    def displacement(p):
        return float(np.trapezoid(p * np.sqrt(A / (B * (B - p * p))), xi))

    p_max = math.sqrt(float(np.min(B))) * (1.0 - 1e-12)
    if displacement(p_max) < dx:
        p = p_max
    else:
        p = brentq(lambda p: displacement(p) - dx, 0.0, p_max, xtol=1e-15)
    return float(np.trapezoid(np.sqrt(A * B / (B - p * p)), xi))


@dataclass(frozen=True)
class SpectrumReport:
    """Per-class ladder of leaf lengths against the dual-tree values."""

    lambdas: tuple
    classes: tuple
    tree_values: dict
    leaf_values: dict
    fits: dict
    max_deviation: tuple
    deviation_decreasing: bool
    tolerance: float
    passed: bool


def spectrum_convergence_report(fields, multicurve, classes, tolerance=0.01):
    """Measure lim leaf length = tree translation length over a lambda ladder.

    ``fields`` maps lambda to converged HeightFields.  The marked-spectrum
    deviation max_c |leaf(c) - tree(c)| per lambda is a proxy for metric
    convergence; it must decrease along the ladder and the ladder-top values
    must match the tree within ``tolerance`` relative (absolute for limit 0).
    """
    if len(fields) < 4:
        raise InsufficientLadder("spectrum report needs >= 4 ladder points")
    lams = tuple(sorted(fields))
    tree = DualTree(multicurve)
    tree_values = {c.label: tree.translation_length(c).value for c in classes}
    leaf_values = {c.label: [] for c in classes}
    for lam in lams:
        f = fields[lam]
        for c in classes:
            leaf_values[c.label].append(leaf_length_spectrum(f, c))
    fits = {
        c.label: fit_or_degenerate(list(zip(lams, leaf_values[c.label])))
        for c in classes
    }
    max_dev = tuple(
        max(abs(leaf_values[c.label][i] - tree_values[c.label]) for c in classes)
        for i in range(len(lams))
    )
    decreasing = all(b < a for a, b in zip(max_dev[:-1], max_dev[1:]))
    passed = decreasing
    for c in classes:
        target = tree_values[c.label]
        top = leaf_values[c.label][-1]
        scale = max(abs(target), 1.0) if target != 0 else 1.0
        if abs(top - target) > tolerance * scale:
            passed = False
    return SpectrumReport(
        lambdas=lams,
        classes=tuple(c.label for c in classes),
        tree_values=tree_values,
        leaf_values={k: tuple(v) for k, v in leaf_values.items()},
        fits=fits,
        max_deviation=max_dev,
        deviation_decreasing=decreasing,
        tolerance=tolerance,
        passed=passed,
    )
