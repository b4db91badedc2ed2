"""Saddle-point solvers for the mixed formulation with a box-constrained multiplier.

Discrete problem: find ``u`` over the free dofs and ``lam`` over the G3 dofs with

    A u + W lam = f,    |lam_i| <= g,    lam_i u_i = g |u_i|,

where ``(W lam)_i = w_i lam_i`` on G3 dofs and zero elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import ConvergenceError, solve_spd

__all__ = [
    "SaddleSolution",
    "CyclingError",
    "project_box",
    "apply_W",
    "saddle_residuals",
    "solve_uzawa",
    "solve_pdas",
    "default_rho",
    "default_c",
]

STICK, SLIP_POS, SLIP_NEG = 0, 1, -1
_INNER_TOL = 1e-12
_MAX_C_REDUCTIONS = 3


class CyclingError(ConvergenceError):
    """The active-set iteration revisited a partition without progress."""


@dataclass
class SaddleSolution:
    u: np.ndarray
    lam: np.ndarray
    iterations: int
    stationarity_residual: float
    feasibility_residual: float
    complementarity_gap: float
    history: list = field(default_factory=list)
    partition: np.ndarray | None = None
    rho: float | None = None
    c: float | None = None


def project_box(mu, g):
    """Clamp every multiplier entry to ``[-g, g]``."""
    return np.clip(np.asarray(mu, dtype=float), -g, g)


def apply_W(sys, lam):
    out = np.zeros(sys.ndof)
    out[sys.g3_dofs] = sys.w * lam
    return out


def saddle_residuals(sys, g, u, lam):
    """(relative stationarity, max bound excess, |<lam, u> - j(u)|)."""
    r = sys.A @ u + apply_W(sys, lam) - sys.f
    fnorm = np.linalg.norm(sys.f)
    stat = float(np.linalg.norm(r) / fnorm) if fnorm > 0 else float(np.linalg.norm(r))
    feas = float(np.max(np.abs(lam) - g, initial=0.0))
    feas = max(feas, 0.0)
    t = sys.trace(u)
    gap = float(abs(np.sum(sys.w * lam * t) - g * np.sum(sys.w * np.abs(t))))
    return stat, feas, gap


def default_rho(sys, spec):
    return spec.xi / sys.h_gamma


def default_c(sys, spec):
    return 100.0 * spec.xi / sys.h_gamma


def _wnorm(sys, v):
    return float(np.sqrt(np.sum(sys.w * v * v)))


def solve_uzawa(sys, spec, rho=None, tol=1e-11, max_iter=50000, lam0=None):
    """Projected Uzawa iteration.

    ``u^k = A^{-1}(f - W lam^k)``, ``lam^{k+1} = P(lam^k + rho u^k|G3)``. Stops
    when the multiplier update is below ``tol`` in the max norm and the
    stationarity, feasibility and complementarity residuals are below ``tol``;
    the last two carry units of ``g`` and are compared with ``tol * max(1, g)``.
    If the W-weighted update fails to contract by the margin
    ``0.05 * rho * h_gamma / xi`` for five consecutive steps, ``rho`` is halved
    and the iteration restarts from the last iterate that still contracted.
    The margin sits below the slowest stable contraction of the lumped trace
    Schur complement, whose smallest eigenvalue scales like ``h / xi``.
    """
    g = spec.g
    if len(sys.g3_dofs) == 0:
        raise ValueError("system has no G3 dofs")
    rho = default_rho(sys, spec) if rho is None else float(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    lam = project_box(np.zeros(len(sys.g3_dofs)) if lam0 is None else lam0, g)
    u = solve_spd(sys.A, sys.f - apply_W(sys, lam), tol=_INNER_TOL)
    stable_lam, stable_u = lam.copy(), u.copy()
    prev_change = np.inf
    streak = 0
    history = []
    for it in range(1, max_iter + 1):
        lam_new = project_box(lam + rho * sys.trace(u), g)
        delta = lam_new - lam
        change_inf = float(np.max(np.abs(delta)))
        change_w = _wnorm(sys, delta)
        history.append(change_inf)
        lam = lam_new
        u = solve_spd(sys.A, sys.f - apply_W(sys, lam), tol=_INNER_TOL, x0=u)
        if change_inf <= tol:
            stat, feas, gap = saddle_residuals(sys, g, u, lam)
            if stat <= tol and max(feas, gap) <= tol * max(1.0, g):
                return SaddleSolution(u, lam, it, stat, feas, gap, history, rho=rho)
        margin = 0.05 * rho * sys.h_gamma / spec.xi
        if change_inf > tol and change_w >= (1 - margin) * prev_change:
            streak += 1
        else:
            streak = 0
            stable_lam, stable_u = lam.copy(), u.copy()
        prev_change = change_w
        if streak >= 5:
            rho *= 0.5
            lam, u = stable_lam.copy(), stable_u.copy()
            prev_change = np.inf
            streak = 0
    stat, feas, gap = saddle_residuals(sys, g, u, lam)
    raise ConvergenceError(
        f"Uzawa did not converge in {max_iter} iterations (last update {history[-1]:.3e}, rho={rho:.3e})",
        history[-1],
        max_iter,
    )


def _classify(t, g):
    part = np.zeros(len(t), dtype=np.int8)
    part[t > g] = SLIP_POS
    part[t < -g] = SLIP_NEG
    return part


def solve_pdas(sys, spec, c=None, tol=1e-10, max_iter=100, lam0=None, u0=None):
    """Primal-dual active set method.

    With trial ``t = lam + c u`` the G3 dofs split into stick (``|t| <= g``,
    enforce ``u_i = 0``) and slip (``t > g`` or ``t < -g``, enforce
    ``lam_i = +-g``). Each step solves one SPD system on the dofs that are not
    stuck; stick multipliers are then read off the equilibrium residual.
    """
    g = spec.g
    m = len(sys.g3_dofs)
    if m == 0:
        raise ValueError("system has no G3 dofs")
    c = default_c(sys, spec) if c is None else float(c)
    if c <= 0:
        raise ValueError("c must be positive")
    lam = np.zeros(m) if lam0 is None else np.array(lam0, dtype=float)
    u = np.zeros(sys.ndof) if u0 is None else np.array(u0, dtype=float)
    seen = {}
    history = []
    prev_part = None
    reductions = 0
    for it in range(1, max_iter + 1):
        part = _classify(lam + c * sys.trace(u), g)
        key = part.tobytes()
        stat, feas, gap = saddle_residuals(sys, g, u, lam)
        kkt = max(stat, max(feas, gap) / max(1.0, g))
        if prev_part is not None and np.array_equal(part, prev_part) and kkt <= tol:
            return SaddleSolution(u, lam, it - 1, stat, feas, gap, history, partition=part, c=c)
        if key in seen and (prev_part is None or not np.array_equal(part, prev_part)):
            if kkt >= seen[key]:
                if reductions == _MAX_C_REDUCTIONS:
                    raise CyclingError(
                        f"active-set cycling after {it} iterations (KKT residual {kkt:.3e}, c={c:.3e})", kkt, it
                    )
                reductions += 1
                c /= 10.0
                seen.clear()
                part = _classify(lam + c * sys.trace(u), g)
                key = part.tobytes()
        seen[key] = kkt
        history.append(kkt)
        prev_part = part

        stick = sys.g3_dofs[part == STICK]
        keep = np.ones(sys.ndof, dtype=bool)
        keep[stick] = False
        lam_slip = np.where(part == STICK, 0.0, g * part)
        rhs = sys.f - apply_W(sys, lam_slip)
        idx = np.flatnonzero(keep)
        u = np.zeros(sys.ndof)
        if len(idx):
            u[idx] = solve_spd(sys.A[idx][:, idx], rhs[idx], tol=_INNER_TOL)
        resid = sys.f - sys.A @ u
        lam = np.where(part == STICK, resid[sys.g3_dofs] / sys.w, lam_slip)
    stat, feas, gap = saddle_residuals(sys, g, u, lam)
    raise ConvergenceError(
        f"PDAS did not converge in {max_iter} iterations (KKT residual {max(stat, feas, gap):.3e})",
        max(stat, feas, gap),
        max_iter,
    )
