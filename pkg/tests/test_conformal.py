import numpy as np
import pytest

from wedgecmc import conformal as CF
from wedgecmc.errors import PatchTooCoarse


def test_fd_pipeline_recovers_known_curvatures():
    # collar slice ds^2 + cosh^2 s dx^2 has Gaussian curvature -1
    g = CF.collar_slice_metric()
    assert CF.gauss_curvature(g, np.array([0.4, 0.1]), 0.01) == pytest.approx(
        -1.0, abs=1e-6
    )
    # Poincare disc has curvature -1
    def h2(x):
        conf = 2.0 / (1.0 - float(x @ x))
        return conf * conf * np.eye(2)

    assert CF.gauss_curvature(h2, np.array([0.2, 0.1]), 0.01) == pytest.approx(
        -1.0, abs=1e-5
    )


def test_wedge_slice_flat_n2():
    out = CF.conformal_flatness_diagnostic(2, 32)
    assert out["kind"] == "gauss_curv"
    assert abs(out["value"]) < 1e-12


def test_cotton_vanishes_under_refinement_n3():
    vals = [CF.conformal_flatness_diagnostic(3, res)["value"] for res in (16, 32, 64)]
    assert vals[1] < vals[0] and vals[2] < vals[1]
    assert vals[2] < 1e-6


def test_weyl_measured_with_scale_n4():
    out = CF.conformal_flatness_diagnostic(4, 16)
    assert out["kind"] == "weyl_norm"
    # the Riemann norm of the hyperbolic-block product is sqrt(12)
    assert out["scale"] == pytest.approx(np.sqrt(12.0), rel=1e-4)


def test_patch_too_coarse():
    with pytest.raises(PatchTooCoarse):
        CF.conformal_flatness_diagnostic(3, 4)
