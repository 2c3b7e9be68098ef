import math

import pytest

from wedgecmc.errors import DegenerateFit, InsufficientLadder
from wedgecmc.fitting import fit_convergence, fit_or_degenerate


def test_exact_power_law_recovery():
    samples = [(lam, 3.0 + 5.0 * lam**-2) for lam in (10.0, 20.0, 40.0, 80.0)]
    fit = fit_convergence(samples)
    assert fit.limit == pytest.approx(3.0, abs=1e-6)
    assert fit.rate == pytest.approx(2.0, abs=1e-6)
    assert fit.constant == pytest.approx(5.0, rel=1e-6)


def test_dominant_term_recovery():
    samples = [(lam, 1.0 + 1.0 / lam + lam**-2) for lam in (10.0, 30.0, 90.0, 270.0, 810.0)]
    fit = fit_convergence(samples)
    assert 0.9 <= fit.rate <= 1.1
    assert fit.limit == pytest.approx(1.0, abs=1e-3)


def test_decaying_to_zero():
    samples = [(lam, 7.0 * lam**-1.5) for lam in (10.0, 20.0, 40.0, 80.0, 160.0)]
    fit = fit_convergence(samples)
    assert fit.limit == pytest.approx(0.0, abs=1e-6)
    assert fit.rate == pytest.approx(1.5, abs=1e-3)


def test_constant_samples_degenerate():
    samples = [(lam, 4.25) for lam in (10.0, 20.0, 40.0, 80.0)]
    with pytest.raises(DegenerateFit):
        fit_convergence(samples)
    fit = fit_or_degenerate(samples)
    assert fit.degenerate
    assert fit.limit == 4.25
    assert math.isinf(fit.rate)


def test_insufficient_ladder():
    with pytest.raises(InsufficientLadder):
        fit_convergence([(10.0, 1.0), (20.0, 0.5), (40.0, 0.25)])


def test_requires_increasing_lambdas():
    with pytest.raises(ValueError):
        fit_convergence([(10.0, 1.0), (10.0, 1.0), (40.0, 1.0), (80.0, 1.0)])


def test_residual_rms_reported():
    samples = [(lam, 2.0 + lam**-1 + 0.01 * (-1) ** i) for i, lam in enumerate((10.0, 20.0, 40.0, 80.0, 160.0))]
    fit = fit_convergence(samples)
    assert fit.residual_rms > 0
