"""Pointwise recovery checks for the strong form of the friction problem.

The multiplier is the negative friction traction, ``lam = -xi du/dnu`` on G3,
so the friction law reads ``|lam| <= g`` where ``u = 0`` and ``lam = g sgn(u)``
where ``u != 0``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .assembly import boundary_weights, lumped_mass

__all__ = [
    "KKTRecord",
    "KKTReport",
    "interior_residual",
    "neumann_residual",
    "friction_kkt",
    "sgn",
    "F_plus",
    "F_minus",
    "sign_probe_residuals",
]

STICK, SLIP_POS, SLIP_NEG = "stick", "slip+", "slip-"


def sgn(r):
    """Sign with ``sgn(0) = 0``."""
    return np.sign(np.asarray(r, dtype=float))


def F_plus(r):
    """1 at zero, sgn(r) elsewhere."""
    r = np.asarray(r, dtype=float)
    return np.where(r == 0, 1.0, np.sign(r))


def F_minus(r):
    """1 at zero, -sgn(r) elsewhere."""
    r = np.asarray(r, dtype=float)
    return np.where(r == 0, 1.0, -np.sign(r))


def _boundary_node_mask(m):
    mask = np.zeros(m.num_nodes, dtype=bool)
    mask[np.unique(m.edges)] = True
    return mask


def _equilibrium_residual(sys, u):
    return sys.A @ np.asarray(u, dtype=float) - sys.f


def interior_residual(m, sys, u, spec=None):
    """Equilibrium residual per unit area at interior nodes.

    Returns ``(nodes, rho)`` with ``rho_i = (A u - f)_i / m_i``, which
    approximates ``-xi lap u - f0``.
    """
    mass = lumped_mass(m)
    nodes = np.flatnonzero(~_boundary_node_mask(m))
    dofs = sys.node_to_dof[nodes]
    rho = _equilibrium_residual(sys, u)[dofs] / mass[nodes]
    return nodes, rho


def neumann_residual(m, sys, u, spec=None):
    """Equilibrium residual per unit length at G2 dofs, approximating ``xi du/dnu - f2``.

    Nodes shared with G1 or G3 are excluded. Returns ``(nodes, eta)``.
    """
    w2 = boundary_weights(m, "G2")
    excluded = np.zeros(m.num_nodes, dtype=bool)
    excluded[m.tag_nodes("G1")] = True
    excluded[m.tag_nodes("G3")] = True
    nodes = np.array([i for i in m.tag_nodes("G2") if not excluded[i]], dtype=np.int64)
    dofs = sys.node_to_dof[nodes]
    eta = _equilibrium_residual(sys, u)[dofs] / w2[nodes]
    return nodes, eta


@dataclass(frozen=True)
class KKTRecord:
    dof: int
    u: float
    lam: float
    classification: str
    violation: float


@dataclass
class KKTReport:
    records: list
    coords: np.ndarray | None = None

    @property
    def max_violation(self):
        return max((r.violation for r in self.records), default=0.0)

    @property
    def counts(self):
        out = {STICK: 0, SLIP_POS: 0, SLIP_NEG: 0}
        for r in self.records:
            out[r.classification] += 1
        return out

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["dof", "x", "y", "u", "lambda", "class", "violation"])
        for k, r in enumerate(self.records):
            x, y = (np.nan, np.nan) if self.coords is None else self.coords[k]
            writer.writerow([r.dof, f"{x:.17g}", f"{y:.17g}", f"{r.u:.17g}", f"{r.lam:.17g}",
                             r.classification, f"{r.violation:.17g}"])
        return buf.getvalue()


def friction_kkt(u_g3, lam, g, tol_u=None, dofs=None, coords=None):
    """Classify every G3 dof as stick / slip+ / slip- and measure the friction-law excess.

    Stick (``|u_i| <= tol_u``): violation ``max(0, |lam_i| - g)``.
    Slip: violation ``|lam_i - g sgn(u_i)|``.
    ``tol_u`` defaults to ``1e-8 * max(1, max|u|)``.
    """
    u = np.asarray(u_g3, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if u.shape != lam.shape:
        raise ValueError(f"length mismatch: {u.shape} displacements vs {lam.shape} multipliers")
    if tol_u is None:
        tol_u = 1e-8 * max(1.0, float(np.max(np.abs(u), initial=0.0)))
    if tol_u <= 0:
        raise ValueError("tol_u must be positive")
    dofs = np.arange(len(u)) if dofs is None else np.asarray(dofs)
    records = []
    for k in range(len(u)):
        if abs(u[k]) <= tol_u:
            cls, viol = STICK, max(0.0, abs(lam[k]) - g)
        else:
            s = float(sgn(u[k]))
            cls = SLIP_POS if s > 0 else SLIP_NEG
            viol = abs(lam[k] - g * s)
        records.append(KKTRecord(int(dofs[k]), float(u[k]), float(lam[k]), cls, float(viol)))
    return KKTReport(records, None if coords is None else np.asarray(coords))


def sign_probe_residuals(u_g3, lam, g, w, probes, tol_u=0.0):
    """Largest probe values of ``sum (lam - g F+(u)) w phi`` and ``sum (-lam - g F-(u)) w phi``.

    For nonnegative probe traces ``phi`` both should be nonpositive. ``probes``
    has shape (k, n_g3). Displacements with ``|u| <= tol_u`` count as zero.
    """
    u = np.asarray(u_g3, dtype=float)
    u = np.where(np.abs(u) <= tol_u, 0.0, u)
    lam = np.asarray(lam, dtype=float)
    phi = np.atleast_2d(probes)
    plus = phi @ ((lam - g * F_plus(u)) * w)
    minus = phi @ ((-lam - g * F_minus(u)) * w)
    return float(plus.max()), float(minus.max())
