"""Lambda-ladder experiment orchestration.

Solves every ladder point (optionally in parallel; results are merged by
lambda so worker scheduling cannot affect output), evaluates the enabled
diagnostics, fits the asymptotic limits, and emits the bit-stable report.
Per-point solver failures are recorded and the run continues; any failure
turns the exit code to 2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import energetics, leaf, spectra
from .conformal import conformal_flatness_diagnostic
from .errors import NoConvergence, WedgeCMCError
from .fitting import fit_or_degenerate
from .report import emit_report
from .solver import (
    fd_mean_curvature_oracle,
    kasner_limit_check,
    solve_cmc_leaf,
)


def _fit_dict(fit):
    if fit is None:
        return None
    return {
        "limit": fit.limit,
        "rate": fit.rate,
        "constant": fit.constant,
        "residual_rms": fit.residual_rms,
        "points": fit.points,
        "degenerate": fit.degenerate,
    }


def _solve_point(model, lam, solver_cfg):
    tau = -(model.n - 1) * lam
    return solve_cmc_leaf(model, tau, solver_cfg)


def run_sweep(config, jobs=1, out_dir=None, emit=None):
    """Execute the configured ladder; returns (exit_code, summary, paths)."""
    model = config.build_model()
    mc = config.multicurve()
    n = model.n
    out_dir = out_dir or config.output_dir
    emit = emit or config.emit
    solver_cfg = config.solver
    lams = list(config.ladder)

    fields = {}
    failures = {}

    def work(lam):
        try:
            return lam, _solve_point(model, lam, solver_cfg), None
        except (NoConvergence, WedgeCMCError) as exc:
            return lam, None, exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, lams))
    else:
        results = [work(lam) for lam in lams]
    for lam, fld, exc in sorted(results, key=lambda r: r[0]):
        if fld is not None:
            fields[lam] = fld
        else:
            failures[lam] = exc

    solves = []
    for lam in lams:
        if lam in fields:
            f = fields[lam]
            solves.append(
                {
                    "lambda": lam,
                    "converged": True,
                    "iterations": f.iterations,
                    "residual": f.residual_norm,
                }
            )
        else:
            exc = failures[lam]
            diag = getattr(exc, "diagnostics", {})
            solves.append(
                {
                    "lambda": lam,
                    "converged": False,
                    "iterations": int(diag.get("iterations", 0)),
                    "residual": float(diag.get("residual", math.inf)),
                    "error": str(exc),
                }
            )

    wedge_labels = list(model.wedge_labels)
    grid_tol = max(
        solver_cfg.tolerance,
        max((pf.h for f in fields.values() for pf in f.panels), default=0.0) ** 2,
    )

    tables = {}
    series = {}
    checks = {"grid_tolerance": grid_tol}
    fits = {}

    sorted_lams = sorted(fields)

    # volumes
    vol_rows = []
    scaled_w = []
    scaled_off = []
    for lam in sorted_lams:
        f = fields[lam]
        per_wedge = [leaf.leaf_volume(f, lab) for lab in wedge_labels]
        off = leaf.leaf_volume(f, "off_wedges")
        total = leaf.leaf_volume(f, "all")
        sw = lam ** (n - 1) * sum(per_wedge)
        so = lam ** (n - 1) * off
        scaled_w.append((lam, sw))
        scaled_off.append((lam, so))
        vol_rows.append([lam, *per_wedge, off, total, sw, so])
    tables["volumes"] = (
        ["lambda", *[f"vol_{lab}" for lab in wedge_labels], "vol_off", "vol_total",
         "scaled_vol_wedges", "scaled_vol_off"],
        vol_rows,
    )
    series["scaled_vol_wedges"] = scaled_w
    series["scaled_vol_off"] = scaled_off
    if len(scaled_w) >= 4:
        fits["scaled_vol_wedges"] = _fit_dict(fit_or_degenerate(scaled_w))
        fits["scaled_vol_wedges"]["target"] = sum(w * v for _, w, v in mc.entries)
        fits["scaled_vol_off"] = _fit_dict(fit_or_degenerate(scaled_off))
        fits["scaled_vol_off"]["target"] = 0.0

    # energetics
    energy_rows = [energetics.energy_row(fields[lam]) for lam in sorted_lams]
    tables["energy"] = (
        ["lambda", "tau", "energy", "energy_rescaled", "vol_total", "vol_wedges",
         "vol_off", "hamiltonian", "scaled_energy", "scaled_hamiltonian"],
        [
            [r.lam, r.tau, r.energy, r.energy_rescaled, r.volume, r.volume_wedges,
             r.volume_off, r.hamiltonian, r.scaled_energy, r.scaled_hamiltonian]
            for r in energy_rows
        ],
    )
    series["scaled_energy"] = [(r.lam, r.scaled_energy) for r in energy_rows]
    series["scaled_hamiltonian"] = [(r.lam, r.scaled_hamiltonian) for r in energy_rows]
    energy_summary = {}
    if len(energy_rows) >= 4:
        efits = energetics.asymptotic_energy_fit(energy_rows, mc)
        fits["scaled_energy"] = _fit_dict(efits.energy_fit)
        fits["scaled_energy"]["target"] = efits.candidate_energy
        fits["scaled_hamiltonian"] = _fit_dict(efits.hamiltonian_fit)
        fits["scaled_hamiltonian"]["candidate"] = efits.candidate_hamiltonian
        fits["scaled_hamiltonian"]["candidate_alt"] = efits.candidate_hamiltonian_alt
        energy_summary["hamiltonian_candidates"] = {
            "sum_ell_vol": efits.candidate_hamiltonian,
            "scaled_sum_ell_vol": efits.candidate_hamiltonian_alt,
            "measured_limit": efits.hamiltonian_fit.limit,
        }
    if fields:
        top = fields[sorted_lams[-1]]
        energy_summary["hamiltonian_lower_bound"] = energetics.hamiltonian_lower_bound_check(top)
        mid = fields[sorted_lams[len(sorted_lams) // 2]]
        energy_summary["gauss_identity_sup_rescaled"] = energetics.gauss_identity_residual(
            mid, rescaled=True
        )

    # barriers and convexity
    if fields:
        viol = {lam: fields[lam].barrier_violations() for lam in sorted_lams}
        checks["barrier_violations"] = int(sum(viol.values()))
        if wedge_labels:
            conv = {lam: leaf.embedded_height_convexity(fields[lam]) for lam in sorted_lams}
            worst = min(conv.values())
            checks["convexity_min"] = worst
            checks["convexity_ok"] = bool(worst >= -10.0 * grid_tol)

    # distances (n = 2 only)
    dist_rows = []
    if n == 2 and config.diagnostics.distances and wedge_labels and fields:
        skew_series = {lab: [] for lab in wedge_labels}
        for lam in sorted_lams:
            f = fields[lam]
            for lab in wedge_labels:
                si, seg = model.segment_by_label(lab)
                ell = seg.width
                full = leaf.clairaut_distance(f, (si, 0.0, 0.0), (si, ell, 0.0))
                skew = leaf.clairaut_distance(
                    f, (si, 0.1 * ell, 0.0), (si, 0.9 * ell, 0.25)
                )
                dist_rows.append([lam, lab, full, ell, skew, 0.8 * ell])
                skew_series[lab].append((lam, abs(skew - 0.8 * ell)))
        tables["distances"] = (
            ["lambda", "wedge", "full_crossing", "width", "interior_skew",
             "interior_reference"],
            dist_rows,
        )
        for lab in wedge_labels:
            series[f"distance_skew_dev_{lab}"] = skew_series[lab]
            if len(skew_series[lab]) >= 4:
                fits[f"distance_skew_dev_{lab}"] = _fit_dict(
                    fit_or_degenerate(skew_series[lab])
                )
        # mesh cross-check at the cheapest rung
        f0 = fields[sorted_lams[0]]
        si, seg = model.segment_by_label(wedge_labels[0])
        q = ((si, 0.1 * seg.width, 0.0), (si, 0.9 * seg.width, 0.25))
        d_c = leaf.clairaut_distance(f0, *q)
        d_m, info = leaf.mesh_dijkstra_distance(f0, *q, perturb=0.0, seed=config.seed)
        tol_cross = max(1e-4, 10.0 * max(info["cell"]))
        checks["distance_methods"] = {
            "clairaut": d_c,
            "mesh": d_m,
            "tolerance": tol_cross,
            "agree": bool(abs(d_c - d_m) <= tol_cross),
        }

    # spectra
    spectra_summary = {}
    if (
        n == 2
        and config.diagnostics.spectra
        and config.classes
        and len(fields) >= 4
    ):
        rep = spectra.spectrum_convergence_report(
            fields, mc, list(config.classes)
        )
        rows = []
        for ci, c in enumerate(config.classes):
            for li, lam in enumerate(rep.lambdas):
                rows.append(
                    [lam, c.label, rep.leaf_values[c.label][li], rep.tree_values[c.label],
                     rep.leaf_values[c.label][li] - rep.tree_values[c.label]]
                )
        tables["spectra"] = (
            ["lambda", "class", "leaf_length", "tree_length", "deviation"],
            rows,
        )
        for c in config.classes:
            series[f"spectrum_dev_{c.label}"] = [
                (lam, abs(rep.leaf_values[c.label][i] - rep.tree_values[c.label]))
                for i, lam in enumerate(rep.lambdas)
            ]
        spectra_summary = {
            "tree_values": rep.tree_values,
            "max_deviation": list(rep.max_deviation),
            "deviation_decreasing": rep.deviation_decreasing,
            "passed": rep.passed,
            "tolerance": rep.tolerance,
            "fits": {lab: _fit_dict(f) for lab, f in rep.fits.items()},
        }

    # monotonicity (n = 2)
    if n == 2 and config.diagnostics.monotonicity and len(fields) >= 2:
        areas = {abs(fields[lam].tau): leaf.leaf_volume(fields[lam], "all") for lam in sorted_lams}
        checks["area_monotonicity"] = energetics.area_monotonicity_check(areas)

    # kasner limit
    kasner_summary = {}
    if wedge_labels and len(fields) >= 4:
        rep = kasner_limit_check({lam: fields[lam] for lam in sorted_lams})
        kasner_summary = {
            "wedge": rep.wedge_label,
            "lambdas": list(rep.lambdas),
            "sup_dev": list(rep.sup_dev),
            "sup_d1": list(rep.sup_d1),
            "sup_d2": list(rep.sup_d2),
            "floors": list(rep.floors),
            "monotone": rep.monotone,
            "derivative_bound_constant": rep.derivative_bound_constant,
        }
        tables["kasner"] = (
            ["lambda", "sup_dev", "sup_d1", "sup_d2"],
            [
                [lam, rep.sup_dev[i], rep.sup_d1[i], rep.sup_d2[i]]
                for i, lam in enumerate(rep.lambdas)
            ],
        )
        series["kasner_sup_dev"] = list(zip(rep.lambdas, rep.sup_dev))

    # oracle cross-check
    if config.diagnostics.oracle and fields:
        mid = fields[sorted_lams[len(sorted_lams) // 2]]
        res = fd_mean_curvature_oracle(mid, step=2e-2)
        checks["oracle_residual_sup"] = float(np.max(res))
        checks["oracle_lambda"] = sorted_lams[len(sorted_lams) // 2]

    # conformal flatness
    conformal_summary = {}
    if config.diagnostics.conformal:
        steps = {}
        for res in (16, 32):
            out = conformal_flatness_diagnostic(n, res)
            steps[str(res)] = out
        conformal_summary = steps

    exit_code = 2 if failures else 0
    summary = {
        "schema_version": config.schema_version,
        "config": config.to_text(),
        "model_caveats": list(model.caveats),
        "ladder": lams,
        "exit_code": exit_code,
        "solves": solves,
        "fits": fits,
        "checks": checks,
        "spectra": spectra_summary,
        "energy": energy_summary,
        "kasner": kasner_summary,
        "conformal": conformal_summary,
    }
    paths = emit_report(summary, tables, series, out_dir, emit)
    return exit_code, summary, paths
