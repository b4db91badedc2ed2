"""Variational inequality of the second kind, solved by smoothing the friction term.

For ``eps > 0`` the regularized energy

    E_eps(v) = 1/2 v'Av + j_eps(v) - f'v

is strictly convex and C^2; it is minimized by Newton's method with a halving
line search. A decreasing ladder of ``eps`` values, each warm-started from the
previous minimizer, approaches the solution of the unregularized inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .assembly import eval_j, eval_j_eps
from .linalg import CG_TOL, ConvergenceError, solve_spd

__all__ = [
    "RegularizationSchedule",
    "RegularizedSolve",
    "VISolution",
    "energy",
    "regularized_energy",
    "solve_vi_regularized",
    "solve_vi",
]

_MAX_HALVINGS = 60


@dataclass(frozen=True)
class RegularizationSchedule:
    """Continuation ladder ``eps_start, eps_start*eps_factor, ...`` down to ``eps_min``.

    ``eps_start=None`` selects ``0.1 * max|u_init| + 1e-3``.
    """

    eps_start: float | None = None
    eps_factor: float = 0.1
    eps_min: float = 1e-8
    newton_tol: float = 1e-12
    max_newton_iter: int = 100

    def __post_init__(self):
        if not 0 < self.eps_factor < 1:
            raise ValueError("eps_factor must lie in (0, 1)")
        if self.eps_min <= 0:
            raise ValueError("eps_min must be positive")
        if self.eps_start is not None and self.eps_start <= self.eps_min:
            raise ValueError("eps_start must exceed eps_min")
        if self.newton_tol <= 0 or self.max_newton_iter < 1:
            raise ValueError("newton_tol and max_newton_iter must be positive")

    def ladder(self, u_init=None):
        start = self.eps_start
        if start is None:
            umax = 0.0 if u_init is None else float(np.max(np.abs(u_init), initial=0.0))
            start = 0.1 * umax + 1e-3
        eps = [start]
        while eps[-1] * self.eps_factor > self.eps_min * (1 + 1e-9):
            eps.append(eps[-1] * self.eps_factor)
        if eps[-1] > self.eps_min:
            eps.append(self.eps_min)
        return eps


@dataclass
class RegularizedSolve:
    u: np.ndarray
    eps: float
    iterations: int
    grad_norm: float
    energies: list = field(default_factory=list)


@dataclass
class VISolution:
    u: np.ndarray
    stages: list

    @property
    def eps_values(self):
        return [s.eps for s in self.stages]

    @property
    def energies(self):
        """Final regularized energy of every stage."""
        return [s.energies[-1] for s in self.stages]


def energy(sys, g, u):
    """Nonsmooth discrete energy ``1/2 a(u,u) + j(u) - (f,u)``."""
    return float(0.5 * u @ (sys.A @ u) + eval_j(sys.trace(u), g, sys.w) - sys.f @ u)


def regularized_energy(sys, g, u, eps):
    return float(0.5 * u @ (sys.A @ u) + eval_j_eps(sys.trace(u), g, sys.w, eps) - sys.f @ u)


def _gradient(sys, g, u, eps):
    grad = sys.A @ u - sys.f
    t = sys.trace(u)
    grad[sys.g3_dofs] += g * sys.w * t / np.hypot(t, eps)
    return grad


def _hessian(sys, g, u, eps):
    if g == 0:
        return sys.A
    t = sys.trace(u)
    d = np.zeros(sys.ndof)
    d[sys.g3_dofs] = g * sys.w * eps**2 / np.hypot(t, eps) ** 3
    return (sys.A + sp.diags_array(d)).tocsr()


def solve_vi_regularized(sys, spec, eps, tol=1e-12, max_iter=100, u0=None):
    """Minimize the smoothed energy for one value of ``eps``.

    Converged when ``||grad E_eps(u)|| <= tol * max(1, ||f||)``. Every
    accepted Newton step does not increase the energy (up to a few ulps).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    g = spec.g
    u = np.zeros(sys.ndof) if u0 is None else np.array(u0, dtype=float)
    target = tol * max(1.0, float(np.linalg.norm(sys.f)))
    E = regularized_energy(sys, g, u, eps)
    energies = [E]
    grad = _gradient(sys, g, u, eps)
    gnorm = float(np.linalg.norm(grad))
    for it in range(max_iter + 1):
        if gnorm <= target:
            return RegularizedSolve(u, eps, it, gnorm, energies)
        if it == max_iter:
            break
        step = solve_spd(_hessian(sys, g, u, eps), -grad, tol=CG_TOL, x0=None)
        t = 1.0
        slack = 8 * np.finfo(float).eps * max(abs(E), 1.0)
        for _ in range(_MAX_HALVINGS):
            trial = u + t * step
            E_trial = regularized_energy(sys, g, trial, eps)
            if E_trial <= E + slack:
                break
            t *= 0.5
        else:
            raise ConvergenceError(
                f"line search failed at eps={eps:.1e}, Newton iteration {it} (|grad|={gnorm:.3e})",
                gnorm,
                it,
            )
        u, E = trial, E_trial
        energies.append(E)
        grad = _gradient(sys, g, u, eps)
        gnorm = float(np.linalg.norm(grad))
    raise ConvergenceError(
        f"Newton did not converge in {max_iter} iterations at eps={eps:.1e} (|grad|={gnorm:.3e})",
        gnorm,
        max_iter,
    )


def solve_vi(sys, spec, schedule=None, u_init=None):
    """Solve the discrete variational inequality by eps-continuation."""
    schedule = schedule or RegularizationSchedule()
    u = np.zeros(sys.ndof) if u_init is None else np.array(u_init, dtype=float)
    stages = []
    for k, eps in enumerate(schedule.ladder(u_init)):
        try:
            stage = solve_vi_regularized(
                sys, spec, eps, schedule.newton_tol, schedule.max_newton_iter, u0=u
            )
        except ConvergenceError as exc:
            raise ConvergenceError(f"stage {k} (eps={eps:.1e}): {exc}", exc.residual, exc.iterations) from exc
        stages.append(stage)
        u = stage.u
    return VISolution(u, stages)
