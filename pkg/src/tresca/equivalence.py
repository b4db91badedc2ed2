"""Cross-formulation checks: primal inequality vs. the two multiplier formulations.

Functionals on the free-dof space are represented by their coefficient
vectors under the Euclidean pairing, so ``<l, v> = l @ v``. The residual
``f - A u0`` of the inequality solution is the dual-space multiplier; the
trace-space multiplier is recovered from it by dividing out the lumped G3
weights.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import build_system, eval_j
from .linalg import ConvergenceError, solve_spd
from .mixed_solver import solve_pdas, solve_uzawa
from .vi_solver import RegularizationSchedule, energy, solve_vi

__all__ = [
    "RangeError",
    "CompareConfig",
    "Check",
    "EquivalenceReport",
    "lambda_bar_from_residual",
    "apply_Bt",
    "check_kernel_polar",
    "recover_multiplier",
    "compare_formulations",
    "infsup_estimate",
    "trace_schur_complement",
]


class RangeError(ValueError):
    """A functional does not lie in the range of the transposed trace map."""

    def __init__(self, message, violation):
        super().__init__(message)
        self.violation = violation


def lambda_bar_from_residual(sys, u0):
    """Residual functional ``f - A u0``."""
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (sys.ndof,):
        raise ValueError(f"expected a field of length {sys.ndof}, got {u0.shape}")
    return sys.f - sys.A @ u0


def apply_Bt(lam, sys):
    """Functional ``v -> sum_i lam_i w_i v_i`` over the G3 dofs."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != sys.w.shape:
        raise ValueError(f"expected {len(sys.w)} multiplier values, got {lam.shape}")
    out = np.zeros(sys.ndof)
    out[sys.g3_dofs] = lam * sys.w
    return out


def _off_g3(sys):
    mask = np.ones(sys.ndof, dtype=bool)
    mask[sys.g3_dofs] = False
    return mask


def check_kernel_polar(r, sys):
    """Largest coefficient of ``r`` away from G3, i.e. its action on traceless fields."""
    r = np.asarray(r, dtype=float)
    return float(np.max(np.abs(r[_off_g3(sys)]), initial=0.0))


def recover_multiplier(r, sys, tol=None):
    """Unique trace multiplier whose image under :func:`apply_Bt` is ``r``.

    ``tol`` defaults to ``1e-9 * max(1, max|r|)``; a larger kernel-polar
    violation raises :class:`RangeError`.
    """
    r = np.asarray(r, dtype=float)
    violation = check_kernel_polar(r, sys)
    if tol is None:
        tol = 1e-9 * max(1.0, float(np.max(np.abs(r), initial=0.0)))
    if violation > tol:
        raise RangeError(
            f"functional is not in the range of the trace map (off-G3 magnitude {violation:.3e} > {tol:.3e})",
            violation,
        )
    return r[sys.g3_dofs] / sys.w


@dataclass
class CompareConfig:
    schedule: RegularizationSchedule = field(default_factory=RegularizationSchedule)
    uzawa_rho: float | None = None
    uzawa_tol: float = 1e-11
    uzawa_max_iter: int = 50000
    pdas_c: float | None = None
    pdas_tol: float = 1e-10
    pdas_max_iter: int = 100
    u_rel_tol: float | None = None
    multiplier_tol: float | None = None
    kernel_tol: float | None = None
    complementarity_tol: float = 1e-8

    def tolerances(self, sys, spec):
        """Resolved (u, multiplier, kernel-polar, complementarity) tolerances."""
        rel = max(1e-8, 10 * self.schedule.eps_min)
        wmax = float(np.max(sys.w, initial=0.0))
        fmax = float(np.max(np.abs(sys.f), initial=0.0))
        return (
            rel if self.u_rel_tol is None else self.u_rel_tol,
            rel * spec.g * wmax if self.multiplier_tol is None else self.multiplier_tol,
            1e-9 * fmax if self.kernel_tol is None else self.kernel_tol,
            self.complementarity_tol,
        )


@dataclass
class Check:
    """``value <= tolerance``, or ``value >= tolerance`` when ``lower_bound`` is set."""

    name: str
    value: float
    tolerance: float
    lower_bound: bool = False

    @property
    def passed(self):
        if self.lower_bound:
            return bool(self.value >= self.tolerance)
        return bool(self.value <= self.tolerance)


@dataclass
class EquivalenceReport:
    """Discrepancies between the three formulations.

    ``u_discrepancy_energy`` is ``||u0 - u||_A / ||u||_A`` (absolute when
    ``u = 0``); the multiplier and kernel-polar entries are max-norms of
    coefficient vectors.
    """

    u_discrepancy_energy: float
    multiplier_discrepancy: float
    kernel_polar_violation: float
    complementarity_gap: float
    checks: list
    u_vi: np.ndarray = field(repr=False, default=None)
    uzawa: object = field(repr=False, default=None)
    pdas: object = field(repr=False, default=None)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "value", "tolerance", "pass"])
        for c in self.checks:
            writer.writerow([c.name, f"{c.value:.17g}", f"{c.tolerance:.17g}", str(c.passed).lower()])
        return buf.getvalue()


def compare_formulations(m, spec, config=None, sys=None):
    """Solve all formulations on one mesh and report how closely they agree."""
    config = config or CompareConfig()
    sys = build_system(m, spec) if sys is None else sys
    try:
        vi = solve_vi(sys, spec, config.schedule)
    except ConvergenceError as exc:
        raise ConvergenceError(f"inequality solver: {exc}", exc.residual, exc.iterations) from exc
    try:
        uz = solve_uzawa(sys, spec, config.uzawa_rho, config.uzawa_tol, config.uzawa_max_iter)
    except ConvergenceError as exc:
        raise ConvergenceError(f"Uzawa solver: {exc}", exc.residual, exc.iterations) from exc
    try:
        pd = solve_pdas(sys, spec, config.pdas_c, config.pdas_tol, config.pdas_max_iter)
    except ConvergenceError as exc:
        raise ConvergenceError(f"active-set solver: {exc}", exc.residual, exc.iterations) from exc

    u0, u = vi.u, pd.u
    unorm = sys.energy_norm(u)
    du = sys.energy_norm(u0 - u)
    du_rel = du / unorm if unorm > 0 else du
    lam_bar = lambda_bar_from_residual(sys, u0)
    mult = float(np.max(np.abs(lam_bar - apply_Bt(pd.lam, sys)), initial=0.0))
    kernel = check_kernel_polar(lam_bar, sys)
    gap = abs(float(lam_bar @ u) - eval_j(sys.trace(u), spec.g, sys.w))
    u_tol, m_tol, k_tol, c_tol = config.tolerances(sys, spec)

    uz_norm = sys.energy_norm(uz.u - pd.u)
    checks = [
        Check("u_discrepancy_energy", du_rel, u_tol),
        Check("multiplier_discrepancy", mult, m_tol),
        Check("kernel_polar_violation", kernel, k_tol),
        Check("complementarity_gap", gap, c_tol),
        Check("uzawa_pdas_u_energy", uz_norm / unorm if unorm > 0 else uz_norm, u_tol),
        Check("uzawa_pdas_multiplier", float(np.max(np.abs(uz.lam - pd.lam), initial=0.0)),
              max(1e-8 * spec.g, 1e-14)),
    ]
    extras = {
        "energy_vi": energy(sys, spec.g, u0),
        "energy_pdas": energy(sys, spec.g, u),
    }
    return EquivalenceReport(du_rel, mult, kernel, gap, checks, u0, uz, pd, extras)


def trace_schur_complement(sys, tol=1e-12):
    """Symmetrized dense Schur complement ``W^1/2 R A^-1 R' W^1/2`` on the G3 dofs."""
    m = len(sys.g3_dofs)
    sw = np.sqrt(sys.w)
    S = np.empty((m, m))
    for k in range(m):
        rhs = np.zeros(sys.ndof)
        rhs[sys.g3_dofs[k]] = sw[k]
        S[:, k] = sw * solve_spd(sys.A, rhs, tol=tol)[sys.g3_dofs]
    return 0.5 * (S + S.T)


def infsup_estimate(sys, tol=1e-10, max_iter=10000):
    """Discrete inf-sup constant of the lumped trace pairing.

    Smallest eigenvalue of the trace Schur complement relative to the
    weighted multiplier norm, found by inverse power iteration; returns its
    square root. Converged when the eigen-residual is below ``tol`` times the
    Rayleigh quotient.
    """
    m = len(sys.g3_dofs)
    if m == 0:
        raise ValueError("system has no G3 dofs, so there is no multiplier space")
    S = trace_schur_complement(sys)
    factor = scipy.linalg.cho_factor(S)
    x = np.ones(m) / np.sqrt(m)
    # a deterministic non-symmetric start so the iteration is not trapped in a symmetric subspace
    x += 1e-3 * np.cos(np.arange(m) * 1.7)
    x /= np.linalg.norm(x)
    sigma = float(x @ S @ x)
    for _ in range(max_iter):
        y = scipy.linalg.cho_solve(factor, x)
        x = y / np.linalg.norm(y)
        Sx = S @ x
        sigma = float(x @ Sx)
        if np.linalg.norm(Sx - sigma * x) <= tol * sigma:
            return float(np.sqrt(sigma))
    raise ConvergenceError(
        f"inverse iteration stagnated after {max_iter} steps (sigma={sigma:.6e})", sigma, max_iter
    )
