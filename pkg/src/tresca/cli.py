"""Command line driver: ``tresca --config run.cfg [--mode m] [--out dir] [--levels k]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys as _sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .assembly import build_system
from .benchmarks import energy_error, exact_1d, l2_error, p1_l2_norm
from .config import ConfigError, load_config
from .equivalence import (
    Check,
    CompareConfig,
    RangeError,
    compare_formulations,
    lambda_bar_from_residual,
    recover_multiplier,
)
from .expr import ExpressionError
from .linalg import ConvergenceError
from .mesh import MeshError, generate_unit_square, load_mesh, prolongate, refine
from .mixed_solver import solve_pdas, solve_uzawa
from .output import multiplier_csv, solution_csv, table_csv, vtk_unstructured, write_text
from .verify import friction_kkt, interior_residual, neumann_residual
from .vi_solver import RegularizationSchedule, solve_vi

__all__ = ["main", "run", "convergence_study", "build_mesh", "CONVERGENCE_COLUMNS"]

log = logging.getLogger("tresca")

CONVERGENCE_COLUMNS = [
    "level", "n", "h", "ndof", "l2_error", "energy_error", "l2_rate", "energy_rate", "lambda_error",
]


def _threads():
    try:
        return max(1, int(os.environ.get("TRESCA_THREADS", "1")))
    except ValueError:
        return 1


def build_mesh(cfg):
    if cfg.mesh is not None:
        with open(cfg.mesh) as fh:
            return load_mesh(fh.read())
    return generate_unit_square(cfg.n)


def schedule_of(cfg):
    return RegularizationSchedule(
        cfg.vi_eps_start, cfg.vi_eps_factor, cfg.vi_eps_min, cfg.vi_newton_tol, cfg.vi_max_newton_iter
    )


def compare_config_of(cfg):
    return CompareConfig(
        schedule=schedule_of(cfg),
        uzawa_rho=cfg.uzawa_rho,
        uzawa_tol=cfg.uzawa_tol,
        uzawa_max_iter=cfg.uzawa_max_iter,
        pdas_c=cfg.pdas_c,
        pdas_tol=cfg.pdas_tol,
        pdas_max_iter=cfg.pdas_max_iter,
        u_rel_tol=cfg.compare_u_tol,
        multiplier_tol=cfg.compare_multiplier_tol,
        kernel_tol=cfg.compare_kernel_tol,
        complementarity_tol=cfg.compare_complementarity_tol,
    )


def _solve_mixed(cfg, system, spec, solver):
    if solver == "uzawa":
        return solve_uzawa(system, spec, cfg.uzawa_rho, cfg.uzawa_tol, cfg.uzawa_max_iter)
    return solve_pdas(system, spec, cfg.pdas_c, cfg.pdas_tol, cfg.pdas_max_iter)


def _solve(cfg, system, spec, solver):
    """(u, lam) for any of the three solvers; the inequality multiplier comes from its residual."""
    if solver == "vi":
        u = solve_vi(system, spec, schedule_of(cfg)).u
        lam = recover_multiplier(lambda_bar_from_residual(system, u), system)
        return u, lam
    sol = _solve_mixed(cfg, system, spec, solver)
    return sol.u, sol.lam


def _write_fields(cfg, system, u, lam):
    m = system.mesh
    u_nodal = system.to_nodal(u)
    write_text(os.path.join(cfg.out, "solution.csv"), solution_csv(m, u_nodal))
    write_text(os.path.join(cfg.out, "multiplier.csv"), multiplier_csv(system, lam))
    if cfg.vtk:
        lam_nodal = np.zeros(m.num_nodes)
        lam_nodal[system.g3_nodes()] = lam
        write_text(os.path.join(cfg.out, "solution.vtk"), vtk_unstructured(m, u_nodal, lam_nodal))


def _checks_csv(checks):
    rows = [dict(name=c.name, value=float(c.value), tolerance=float(c.tolerance), **{"pass": str(c.passed).lower()})
            for c in checks]
    return table_csv(rows, ["name", "value", "tolerance", "pass"])


def _verify(cfg, m, system, spec):
    u, lam = _solve(cfg, system, spec, cfg.verify_solver)
    tol_u = cfg.verify_tol_u
    kkt = friction_kkt(system.trace(u), lam, spec.g, tol_u, dofs=system.g3_dofs,
                       coords=m.nodes[system.g3_nodes()])
    f0_nodes = spec.f0(m.nodes[:, 0], m.nodes[:, 1])
    f2_nodes = spec.f2(m.nodes[:, 0], m.nodes[:, 1])
    scale = max(1.0, float(np.max(np.abs(f0_nodes))), float(np.max(np.abs(f2_nodes))))
    res_tol = cfg.verify_residual_tol or 1e-9 * scale
    kkt_tol = cfg.verify_kkt_tol or (1e-8 * spec.g if spec.g > 0 else 1e-12)
    _, rho = interior_residual(m, system, u, spec)
    _, eta = neumann_residual(m, system, u, spec)
    checks = [
        Check("kkt_max_violation", kkt.max_violation, kkt_tol),
        Check("interior_residual_max", float(np.max(np.abs(rho), initial=0.0)), res_tol),
        Check("neumann_residual_max", float(np.max(np.abs(eta), initial=0.0)), res_tol),
    ]
    return u, lam, kkt, checks


def run(cfg):
    """Execute one configured run; returns the process exit status."""
    os.makedirs(cfg.out, exist_ok=True)
    spec = cfg.problem()
    if cfg.mode == "converge":
        rows, checks = convergence_study(cfg, cfg.levels, with_checks=True)
        write_text(os.path.join(cfg.out, "convergence.csv"), table_csv(rows, CONVERGENCE_COLUMNS))
        for r in rows:
            log.info("level %d  h=%.4g  L2=%.3e  energy=%.3e  rate=%s", r["level"], r["h"], r["l2_error"],
                     r["energy_error"], r.get("l2_rate"))
        if checks:
            write_text(os.path.join(cfg.out, "convergence_checks.csv"), _checks_csv(checks))
        return _status(checks)

    m = build_mesh(cfg)
    system = build_system(m, spec)
    if cfg.mode in ("vi", "uzawa", "pdas"):
        u, lam = _solve(cfg, system, spec, cfg.mode)
        _write_fields(cfg, system, u, lam)
        log.info("%s: |u|_A = %.6e", cfg.mode, system.energy_norm(u))
        return 0
    if cfg.mode == "compare":
        report = compare_formulations(m, spec, compare_config_of(cfg), sys=system)
        _write_fields(cfg, system, report.pdas.u, report.pdas.lam)
        write_text(os.path.join(cfg.out, "equivalence.csv"), report.to_csv())
        return _status(report.checks)
    u, lam, kkt, checks = _verify(cfg, m, system, spec)
    _write_fields(cfg, system, u, lam)
    write_text(os.path.join(cfg.out, "kkt.csv"), kkt.to_csv())
    write_text(os.path.join(cfg.out, "verify.csv"), _checks_csv(checks))
    log.info("verify: %s", kkt.counts)
    return _status(checks)


def _status(checks):
    failed = [c for c in checks if not c.passed]
    for c in checks:
        op = ">=" if c.lower_bound else "<="
        log.info("%-28s %.3e %s %.3e  %s", c.name, c.value, op, c.tolerance, "pass" if c.passed else "FAIL")
    return 1 if failed else 0


def _rate(e_prev, e, h_prev, h):
    if e_prev is None or e <= 0 or e_prev <= 0:
        return None
    return float(np.log(e_prev / e) / np.log(h_prev / h))


def convergence_study(cfg, levels=None, with_checks=False):
    """Errors and observed rates on ``levels`` uniformly refined meshes.

    The reference is the exact x-only solution when one applies (generated
    unit square, constant f0, zero f2), otherwise the solution on one further
    refinement of the finest level.
    """
    levels = cfg.levels if levels is None else levels
    if levels < 3:
        raise ConfigError("levels must be at least 3")
    spec = cfg.problem()
    exact = exact_1d(spec) if cfg.mesh is None else None
    if cfg.converge_reference == "exact" and exact is None:
        raise ConfigError("no closed-form solution for this configuration")
    if cfg.converge_reference == "finest":
        exact = None

    meshes = [build_mesh(cfg)]
    for _ in range(levels - (1 if exact is not None else 0)):
        meshes.append(refine(meshes[-1]))

    def solve_level(mesh):
        system = build_system(mesh, spec)
        sol = _solve_mixed(cfg, system, spec, "pdas")
        return system, sol

    with ThreadPoolExecutor(max_workers=min(_threads(), len(meshes))) as pool:
        results = list(pool.map(solve_level, meshes))

    rows = []
    ref_system = ref_nodal = None
    if exact is None:
        ref_system, ref_sol = results[-1]
        ref_nodal = ref_system.to_nodal(ref_sol.u)
    for k in range(levels):
        system, sol = results[k]
        mesh = meshes[k]
        u_nodal = system.to_nodal(sol.u)
        h = float(np.max(np.linalg.norm(mesh.nodes[mesh.triangles[:, [1, 2, 0]]] - mesh.nodes[mesh.triangles], axis=2)))
        row = dict(level=k, n=None if cfg.mesh is not None else cfg.n * 2**k, h=h, ndof=system.ndof)
        if exact is not None:
            row["l2_error"] = l2_error(mesh, u_nodal, exact.u)
            row["energy_error"] = energy_error(mesh, u_nodal, exact.grad, spec.xi)
            row["lambda_error"] = float(np.max(np.abs(sol.lam - exact.lam)))
        else:
            fine = u_nodal
            for j in range(k, levels):
                fine = prolongate(meshes[j], fine)
            diff = fine - ref_nodal
            row["l2_error"] = p1_l2_norm(ref_system.mesh, diff)
            row["energy_error"] = ref_system.energy_norm(diff[ref_system.free_nodes])
        if rows:
            prev = rows[-1]
            row["l2_rate"] = _rate(prev["l2_error"], row["l2_error"], prev["h"], h)
            row["energy_rate"] = _rate(prev["energy_error"], row["energy_error"], prev["h"], h)
        rows.append(row)
    if not with_checks:
        return rows
    checks = []
    for key, bound in (("l2_rate", cfg.converge_min_l2_rate), ("energy_rate", cfg.converge_min_energy_rate)):
        if bound is not None:
            worst = min(r[key] if r.get(key) is not None else -np.inf for r in rows[1:])
            checks.append(Check(f"min_{key}", worst, bound, lower_bound=True))
    return rows, checks


def main(argv=None):
    parser = argparse.ArgumentParser(prog="tresca", description=__doc__)
    parser.add_argument("--config", required=True, help="key = value configuration file")
    parser.add_argument("--mode", help="override the configured run mode")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--levels", help="number of refinement levels for mode=converge")
    parser.add_argument("-q", "--quiet", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")

    overrides = {k: v for k, v in (("mode", args.mode), ("out", args.out), ("levels", args.levels)) if v is not None}
    try:
        cfg = load_config(args.config, overrides)
        return run(cfg)
    except (ConfigError, MeshError, ExpressionError, RangeError, OSError) as exc:
        print(f"tresca: error: {exc}", file=_sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"tresca: solver failure: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    _sys.exit(main())
