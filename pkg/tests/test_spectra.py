import numpy as np
import pytest

from wedgecmc import model as M
from wedgecmc import solver as S
from wedgecmc import spectra as SP
from wedgecmc.errors import ClassNotRealizable, UnknownLabel


@pytest.fixture(scope="module")
def two_weights():
    return SP.MultiCurve((("S1", 0.5, 2.0), ("S2", 1.0, 2.0)))


def test_measure_spectrum_values(two_weights):
    assert SP.measure_spectrum(two_weights, SP.CurveClass("a", ("S1",))) == 0.5
    assert SP.measure_spectrum(two_weights, SP.CurveClass("w", (), 3)) == 0.0
    c = SP.CurveClass("m", ("S1", "S1", "S2", "S2", "S2"))
    assert SP.measure_spectrum(two_weights, c) == 4.0


def test_measure_spectrum_unknown_label(two_weights):
    with pytest.raises(UnknownLabel):
        SP.measure_spectrum(two_weights, SP.CurveClass("x", ("S9",)))


def test_tree_translation_exactness(two_weights):
    tree = SP.DualTree(two_weights)
    for word in (("S1",), ("S2",), ("S1", "S2"), ("S1", "S1", "S2", "S2", "S2")):
        c = SP.CurveClass("c", word)
        exact = SP.measure_spectrum(two_weights, c)
        tl = tree.translation_length(c)
        assert tl.hyperbolic
        assert tl.value == exact  # same summation order: bitwise equal
        brute = tree.brute_force_translation_length(c, resolution=1e-4)
        assert abs(brute.value - exact) < 1e-12


def test_tree_translation_single_edge():
    tree = SP.DualTree(SP.MultiCurve((("S1", 0.7, 1.0),)))
    c = SP.CurveClass("once", ("S1",))
    assert tree.translation_length(c).value == pytest.approx(0.7)
    assert tree.brute_force_translation_length(c).value == pytest.approx(0.7, abs=1e-12)


def test_trivial_word_elliptic(two_weights):
    tree = SP.DualTree(two_weights)
    t = tree.translation_length(SP.CurveClass("ring", (), 1))
    assert t.value == 0.0 and not t.hyperbolic


def test_composition_additivity(two_weights):
    tree = SP.DualTree(two_weights)
    a = SP.CurveClass("a", ("S1", "S2"))
    b = SP.CurveClass("b", ("S2",), 1)
    ab = tree.compose(a, b)
    assert tree.translation_length(ab).value == pytest.approx(
        tree.translation_length(a).value + tree.translation_length(b).value, rel=1e-15
    )
    assert SP.measure_spectrum(two_weights, ab) == SP.measure_spectrum(
        two_weights, a
    ) + SP.measure_spectrum(two_weights, b)


def test_kasner_crossing_class_exact(kasner2):
    f = S.kasner_field(kasner2)
    mc = SP.MultiCurve.from_model(kasner2)
    tree = SP.DualTree(mc)
    for q in (1, 2, 3):
        c = SP.CurveClass(f"q{q}", ("W1",) * q)
        leaf_len = SP.leaf_length_spectrum(f, c)
        assert leaf_len - tree.translation_length(c).value == 0.0


def test_kasner_crossing_with_winding(kasner2):
    f = S.kasner_field(kasner2)
    # flat cylinder of width 1 and circumference 2: hypot closed geodesic
    c = SP.CurveClass("helix", ("W1",), winding=1)
    assert SP.leaf_length_spectrum(f, c) == pytest.approx(np.hypot(1.0, 2.0), rel=1e-12)


def test_pure_winding_bound(spectra_ladder, two_wedge_chain):
    c = SP.CurveClass("ring", (), 1)
    for lam, f in spectra_ladder.items():
        val = SP.leaf_length_spectrum(f, c)
        # bounded by winding x upper barrier x smallest base circumference
        assert val <= 1 * (2.0 / ((2 - 1) * lam)) * 2.0 * (1 + 1e-9)
        assert val >= 0.0


def test_truncated_chain_classes_converge(spectra_ladder):
    single = SP.CurveClass("single", ("W1",))
    double = SP.CurveClass("double", ("W1", "W2"))
    lams = sorted(spectra_ladder)
    singles = [SP.leaf_length_spectrum(spectra_ladder[l], single) for l in lams]
    doubles = [SP.leaf_length_spectrum(spectra_ladder[l], double) for l in lams]
    assert abs(singles[-1] - 0.5) < 0.01
    assert abs(doubles[-1] - 1.5) < 0.015
    assert all(b < a for a, b in zip(singles[:-1], singles[1:]))
    # off-wedge contribution <= C/lambda with one constant across the ladder
    C = (singles[0] - 0.5) * lams[0]
    for lam, v in zip(lams, singles):
        assert v - 0.5 <= 1.2 * C / lam


def test_necklace_realizability():
    mn = M.necklace_model(2, [("W1", 0.5, 2.0), ("W2", 1.0, 2.0)], 2.0)
    f = S.solve_cmc_leaf(mn, -50.0)
    with pytest.raises(ClassNotRealizable):
        SP.leaf_length_spectrum(f, SP.CurveClass("bad", ("W1",)))
    with pytest.raises(ClassNotRealizable):
        SP.leaf_length_spectrum(f, SP.CurveClass("bad2", ("W2", "W1", "W1")))
    v = SP.leaf_length_spectrum(f, SP.CurveClass("ok", ("W1", "W2")))
    assert v == pytest.approx(1.5, rel=0.2)


def test_winding_with_hub_not_realizable(spectra_ladder):
    f = spectra_ladder[sorted(spectra_ladder)[0]]
    with pytest.raises(ClassNotRealizable):
        SP.leaf_length_spectrum(f, SP.CurveClass("mix", ("W1",), winding=2))


def test_rescaled_lengths_scale_exactly(spectra_ladder):
    lam = sorted(spectra_ladder)[1]
    f = spectra_ladder[lam]
    c = SP.CurveClass("double", ("W1", "W2"))
    base = SP.leaf_length_spectrum(f, c)
    r = S.rescale(f)
    # the rescaled leaf metric is lambda^2 x the original: lengths scale by lambda
    assert SP.leaf_length_spectrum(r, c) == pytest.approx(lam * base, rel=1e-9)


def test_spectrum_report(spectra_ladder, two_wedge_chain):
    mc = SP.MultiCurve.from_model(two_wedge_chain)
    classes = [
        SP.CurveClass("single", ("W1",)),
        SP.CurveClass("double", ("W1", "W2")),
        SP.CurveClass("ring", (), 1),
    ]
    rep = SP.spectrum_convergence_report(spectra_ladder, mc, classes)
    assert rep.tree_values == {"single": 0.5, "double": 1.5, "ring": 0.0}
    assert rep.deviation_decreasing
    assert rep.passed
    assert all(b < a for a, b in zip(rep.max_deviation[:-1], rep.max_deviation[1:]))
