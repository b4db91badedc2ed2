"""Closed-form reference solutions and discretization error norms.

On the unit square with G1 = {x = 0}, G2 = {y = 0, 1}, G3 = {x = 1}, constant
body force ``c`` and zero G2 traction, the solution depends on x only:
``-xi u'' = c``, ``u(0) = 0`` and the Tresca condition at ``x = 1``. It sticks
when ``|c| / 2 <= g`` and slips otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Exact1D", "exact_1d", "SLIP", "STICK", "l2_error", "energy_error", "p1_l2_norm"]

SLIP = dict(xi=1.0, g=0.5, f0="2", f2="0")
STICK = dict(xi=1.0, g=1.0, f0="1", f2="0")

# degree-5, 7-point rule on the reference triangle (barycentric points, weights sum to 1)
_A1, _B1, _W1 = 0.059715871789770, 0.470142064105115, 0.132394152788506
_A2, _B2, _W2 = 0.797426985353087, 0.101286507323456, 0.125939180544827
_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
_WEIGHTS = np.array([0.225, _W1, _W1, _W1, _W2, _W2, _W2])


@dataclass(frozen=True)
class Exact1D:
    """``u(x) = -c x^2 / (2 xi) + a x`` with G3 multiplier ``lam``."""

    xi: float
    c: float
    a: float
    lam: float
    sticking: bool

    def u(self, x, y=None):
        x = np.asarray(x, dtype=float)
        return -self.c * x * x / (2 * self.xi) + self.a * x

    def grad(self, x, y=None):
        x = np.asarray(x, dtype=float)
        return np.stack([-self.c * x / self.xi + self.a, np.zeros_like(x)], axis=-1)


def exact_1d(spec):
    """Exact solution for constant ``f0`` and ``f2 = 0``; None otherwise."""
    if not (spec.f0.is_constant and spec.f2.is_constant) or spec.f2.constant_value() != 0.0:
        return None
    c = spec.f0.constant_value()
    if abs(c) / 2 <= spec.g:
        return Exact1D(spec.xi, c, c / (2 * spec.xi), c / 2, True)
    lam = spec.g * np.sign(c)
    return Exact1D(spec.xi, c, (c - lam) / spec.xi, float(lam), False)


def _quadrature(mesh):
    p = mesh.nodes[mesh.triangles]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    pts = np.einsum("qk,tkd->tqd", _BARY, p)
    return area, pts


def l2_error(mesh, u_nodal, exact):
    """``||u_h - u||_L2`` with a degree-5 rule (exact for quadratic ``u``)."""
    area, pts = _quadrature(mesh)
    uh = np.einsum("qk,tk->tq", _BARY, np.asarray(u_nodal)[mesh.triangles])
    diff = uh - exact(pts[..., 0], pts[..., 1])
    return float(np.sqrt(np.sum(area * (diff**2 @ _WEIGHTS))))


def energy_error(mesh, u_nodal, grad_exact, xi=1.0):
    """``sqrt(xi) ||grad(u_h - u)||_L2``."""
    from .assembly import _gradients

    area, grads = _gradients(mesh)
    _, pts = _quadrature(mesh)
    gh = np.einsum("tkd,tk->td", grads, np.asarray(u_nodal)[mesh.triangles])
    diff = gh[:, None, :] - grad_exact(pts[..., 0], pts[..., 1])
    return float(np.sqrt(xi * np.sum(area * (np.sum(diff**2, axis=-1) @ _WEIGHTS))))


def p1_l2_norm(mesh, u_nodal):
    """Exact L2 norm of a P1 field (consistent mass)."""
    area, _ = _quadrature(mesh)
    v = np.asarray(u_nodal)[mesh.triangles]
    # int over T of a P1 function squared = area/6 * (sum v_i^2 + sum_{i<j} v_i v_j)
    s = np.sum(v * v, axis=1) + v[:, 0] * v[:, 1] + v[:, 1] * v[:, 2] + v[:, 2] * v[:, 0]
    return float(np.sqrt(np.sum(area * s / 6.0)))
