import math

import numpy as np
import pytest

from wedgecmc import model as M
from wedgecmc import solver as S
from wedgecmc.errors import InsufficientLadder, NoConvergence, NonNegativeTau, NotSpacelike


def sup_dev(field, value):
    return max(float(np.max(np.abs(pf.u - value))) for pf in field.panels)


def test_reduced_operator_closed_forms():
    m = M.single_wedge_model(3, 1.0, 2.0, 3.0)
    # constants: wedge -(n-1)/c, collar -n/c, any warp position
    assert S.reduced_mean_curvature(m, "W1", 0.7, 0.0, 0.0, 0.5) == pytest.approx(
        -2.0 / 0.7, rel=1e-14
    )
    assert S.reduced_mean_curvature(m, "CL", 0.7, 0.0, 0.0, 1.3) == pytest.approx(
        -3.0 / 0.7, rel=1e-14
    )
    mk = M.kasner_model(2, 1.0, 2.0)
    assert S.reduced_mean_curvature(mk, "W1", 1.0, 0.0, 0.0, 0.5) == -1.0


def test_reduced_operator_rejects_null_graphs():
    m = M.single_wedge_model(2, 1.0, 2.0, 3.0)
    with pytest.raises(NotSpacelike):
        S.reduced_mean_curvature(m, "W1", 1.0, 1.0, 0.0, 0.5)
    with pytest.raises(NotSpacelike):
        S.reduced_mean_curvature(m, "CL", 0.5, 0.6, 0.0, 1.0)


def test_pure_collar_exact_cone_leaf(cone2):
    for tau in (-1.0, -4.0, -20.0):
        f = S.solve_cmc_leaf(cone2, tau)
        assert f.converged
        assert sup_dev(f, 2.0 / abs(tau)) < 1e-10


def test_all_wedge_exact_product_leaf(kasner2):
    f = S.solve_cmc_leaf(kasner2, -1.0)
    assert sup_dev(f, 1.0) < 1e-10
    m3 = M.kasner_model(3, 0.7, 1.5)
    f3 = S.solve_cmc_leaf(m3, -2.0)
    assert sup_dev(f3, 1.0) < 1e-10


def test_solved_wedge_field_lambda_100_oracle():
    m = M.single_wedge_model(2, 1.0, 2.0, 3.0)
    f = S.solve_cmc_leaf(
        m, -100.0, S.SolverConfig(points_per_unit=2500.0, tolerance=1e-7)
    )
    assert f.converged
    u = np.concatenate([pf.u for pf in f.panels])
    # strict interior bounds up to solver tolerance (the wedge middle sits on
    # the lower barrier to rounding)
    assert f.barrier_violations() == 0
    assert u.min() > 0.01 * (1 - 1e-6) and u.max() < 0.02
    res = S.fd_mean_curvature_oracle(f, step=5e-4)
    assert float(np.max(res)) < 1e-6  # 10x the cross-validation tolerance


def test_newton_jacobian_consistency():
    m = M.single_wedge_model(2, 1.0, 2.0, 3.0)
    cfg = S.SolverConfig(resolution=16, points_per_unit=4.0)
    grid = S.build_grid(m, 3.0, cfg)
    U = 1.35 + 0.1 * np.sin(np.linspace(0, 3, grid.size))
    _, (kind, ab) = S._assemble(grid, U, want_jacobian=True)
    assert kind == "banded"
    N = grid.size
    eps = 1e-7
    Jfd = np.zeros((N, N))
    for j in range(N):
        up, um = U.copy(), U.copy()
        up[j] += eps
        um[j] -= eps
        Jfd[:, j] = (S._assemble(grid, up, False)[0] - S._assemble(grid, um, False)[0]) / (
            2 * eps
        )
    J = np.zeros((N, N))
    for i in range(N):
        for j in range(max(0, i - 2), min(N, i + 3)):
            J[i, j] = ab[2 + i - j, j]
    assert np.max(np.abs(J - Jfd)) <= 1e-6 * max(1.0, np.max(np.abs(Jfd)))


def test_barriers_hold_strictly(solved_wedge_10):
    assert solved_wedge_10.barrier_violations() == 0
    lo, hi = solved_wedge_10.barrier_bounds()
    assert (lo, hi) == pytest.approx((0.1, 0.2))


def test_unreachable_tolerance_raises_with_diagnostics(wedge_model):
    with pytest.raises(NoConvergence) as exc:
        S.solve_cmc_leaf(wedge_model, -10.0, S.SolverConfig(tolerance=1e-30))
    assert "residual" in exc.value.diagnostics


def test_nonnegative_tau_rejected(wedge_model):
    with pytest.raises(NonNegativeTau):
        S.solve_cmc_leaf(wedge_model, 1.0)


def test_rescale_identities(solved_wedge_10):
    f = solved_wedge_10
    r = S.rescale(f)
    assert r.tau == -1.0
    assert r.lam == 1.0
    # u_lambda = lambda u, wedge width stretched
    iw, seg = r.model.segment_by_label("W1")
    assert seg.width == pytest.approx(10.0)
    # definitional exactness: the rescaled height is the stored rescaled profile
    for pf_r, pf in zip(r.panels, f.panels):
        assert np.array_equal(pf_r.u, pf.w)
        assert np.array_equal(pf_r.du, pf.dw)
    # rescale at lambda=1 is the identity
    m = M.kasner_model(2, 1.0, 2.0)
    f1 = S.solve_cmc_leaf(m, -1.0)
    assert S.rescale(f1) is f1


def test_rescale_of_cone_leaf_hits_upper_barrier(cone2):
    f = S.cone_field(cone2, -8.0)
    r = S.rescale(f)
    assert sup_dev(r, 2.0) == 0.0  # n/(n-1) = 2


def test_rescale_solve_commutation(wedge_model):
    cfg = S.SolverConfig(points_per_unit=100.0)
    f = S.solve_cmc_leaf(wedge_model, -10.0, cfg)
    r = S.rescale(f)
    direct = S.solve_cmc_leaf(r.model, -1.0, cfg)
    diff = max(np.max(np.abs(a.u - b.u)) for a, b in zip(r.panels, direct.panels))
    assert diff <= 10 * cfg.tolerance


def test_grid_refinement_second_order(wedge_model):
    fields = {
        ppu: S.solve_cmc_leaf(wedge_model, -10.0, S.SolverConfig(resolution=16, points_per_unit=ppu))
        for ppu in (40.0, 80.0, 160.0)
    }

    def diff(f_coarse, f_fine, stride):
        return max(
            float(np.max(np.abs(a.u - b.u[::stride])))
            for a, b in zip(f_coarse.panels, f_fine.panels)
        )

    e1 = diff(fields[40.0], fields[80.0], 2)
    e2 = diff(fields[80.0], fields[160.0], 2)
    order = math.log2(e1 / e2)
    assert 1.8 <= order <= 2.2


def test_wedge_solution_symmetric(solved_wedge_10):
    wpf = [pf for pf in solved_wedge_10.panels if pf.panel.kind == "wedge"][0]
    assert np.max(np.abs(wpf.u - wpf.u[::-1])) < 1e-12


def test_oracle_order_two_on_exact_fields(cone2, kasner2):
    fc = S.cone_field(cone2, -4.0)
    _, orders = S.oracle_order_study(fc, [(0, 1.5)], [0.2, 0.1, 0.05])
    assert all(1.8 <= o <= 2.2 for o in orders)
    fk = S.kasner_field(kasner2)
    _, orders = S.oracle_order_study(fk, [(0, 0.5)], [0.2, 0.1, 0.05])
    assert all(1.8 <= o <= 2.2 for o in orders)


def test_oracle_step_guard(kasner2):
    fk = S.kasner_field(kasner2)
    with pytest.raises(Exception):
        S.fd_mean_curvature_oracle(fk, [(0, 0.01)], step=0.2)


def test_continuation_ladder_and_insufficient(wedge_model):
    fields = S.solve_ladder(wedge_model, [10.0, 100.0], S.SolverConfig(points_per_unit=24.0))
    assert all(f.converged for f in fields.values())
    with pytest.raises(InsufficientLadder):
        S.kasner_limit_check(fields)


def test_kasner_limit_check_report(kasner_ladder):
    rep = S.kasner_limit_check(kasner_ladder)
    assert rep.wedge_label == "W1"
    assert all(rep.monotone.values())
    assert rep.sup_dev[-1] < 1e-2
    # derivative bound constant: lambda*eps*sup|du| bounded along the ladder
    for eps, vals in rep.derivative_bound_table.items():
        assert max(vals) <= max(vals[0], rep.floors[1])


def test_kasner_exact_model_sups_zero(kasner2):
    fields = {
        lam: S.solve_cmc_leaf(kasner2, -lam) for lam in (10.0, 100.0, 1000.0, 10000.0)
    }
    rep = S.kasner_limit_check(fields)
    assert max(rep.sup_dev) < 1e-9
    assert max(rep.sup_d1) < 1e-7
    assert all(rep.monotone.values())


def test_height_field_table(solved_wedge_10):
    rows = solved_wedge_10.to_table()
    assert set(rows[0]) == {"xi", "segment", "u", "du", "d2u", "residual"}
    xi = [r["xi"] for r in rows]
    assert xi == sorted(xi)
    assert {r["segment"] for r in rows} == {"CL", "W1", "CR"}


def test_solver_config_validation():
    with pytest.raises(ValueError):
        S.SolverConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        S.SolverConfig(resolution=8)
    with pytest.raises(ValueError):
        S.SolverConfig(initial_guess="zeros")


def test_seam_c1_matching(spectra_ladder):
    # u and its proper-length derivative are continuous across junctions:
    # at a collar|wedge seam, du/ds = u du/dr to grid tolerance
    f = spectra_ladder[sorted(spectra_ladder)[1]]
    htol = max(pf.h for pf in f.panels) ** 2
    for left, right in zip(f.panels[:-1], f.panels[1:]):
        u_l, u_r = left.u[-1], right.u[0]
        assert abs(u_l - u_r) <= 1e-12 * max(1.0, abs(u_l))
        kinds = (left.panel.kind, right.panel.kind)
        dl, dr = left.du[-1], right.du[0]
        if kinds == ("collar", "wedge"):
            resid = dl - u_l * dr
        elif kinds == ("wedge", "collar"):
            resid = dr - u_r * dl
        else:
            resid = dl - dr
        assert abs(resid) <= 50 * htol / f.lam
