import numpy as np
import pytest

from wedgecmc import model as M
from wedgecmc import solver as S


@pytest.fixture(scope="session")
def wedge_model():
    return M.single_wedge_model(2, 1.0, 2.0, 3.0)


@pytest.fixture(scope="session")
def wedge_model_n3():
    return M.single_wedge_model(3, 1.0, 2.0, 3.0)


@pytest.fixture(scope="session")
def two_wedge_chain():
    return M.chain_model(2, [("W1", 0.5, 2.0), ("W2", 1.0, 2.0)], 2.0, 3.0)


@pytest.fixture(scope="session")
def kasner2():
    return M.kasner_model(2, 1.0, 2.0)


@pytest.fixture(scope="session")
def cone2():
    return M.pure_collar_model(2, 3.0, 2.0)


@pytest.fixture(scope="session")
def solved_wedge_10(wedge_model):
    return S.solve_cmc_leaf(wedge_model, -10.0, S.SolverConfig(points_per_unit=100.0))


@pytest.fixture(scope="session")
def kasner_ladder(wedge_model):
    """lambda in {10, 1e2, 1e3, 1e4} on the standard single-wedge model."""
    return S.solve_ladder(
        wedge_model, [10.0, 100.0, 1000.0, 10000.0], S.SolverConfig(points_per_unit=32.0)
    )


@pytest.fixture(scope="session")
def volume_ladder(wedge_model):
    return S.solve_ladder(
        wedge_model, [50.0, 150.0, 450.0, 1350.0], S.SolverConfig(points_per_unit=48.0)
    )


@pytest.fixture(scope="session")
def volume_ladder_n3(wedge_model_n3):
    return S.solve_ladder(
        wedge_model_n3, [50.0, 150.0, 450.0, 1350.0], S.SolverConfig(points_per_unit=48.0)
    )


@pytest.fixture(scope="session")
def distance_ladder(wedge_model):
    return S.solve_ladder(
        wedge_model, [100.0, 200.0, 400.0, 800.0], S.SolverConfig(points_per_unit=64.0)
    )


@pytest.fixture(scope="session")
def spectra_ladder(two_wedge_chain):
    return S.solve_ladder(
        two_wedge_chain, [10.0, 50.0, 250.0, 1250.0], S.SolverConfig(points_per_unit=48.0)
    )


def all_ladder_fields(*ladders):
    out = []
    for lad in ladders:
        out.extend(lad.values())
    return out


# --- acceptance reporting -------------------------------------------------

CRITERION_LINES = []


def criterion_line(number, ok, text):
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] acceptance criterion {number:2d}: {text}"
    CRITERION_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def kasner_ladder_smax4():
    m = M.single_wedge_model(2, 1.0, 2.0, 4.0)
    return S.solve_ladder(
        m, [10.0, 100.0, 1000.0, 10000.0], S.SolverConfig(points_per_unit=32.0)
    )


@pytest.fixture(scope="session")
def solved_wedge_10_fine(wedge_model):
    return S.solve_cmc_leaf(wedge_model, -10.0, S.SolverConfig(points_per_unit=200.0))
