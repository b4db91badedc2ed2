"""P1 finite element discretization of the antiplane Tresca problem.

The discrete space is P1 on the mesh with the G1 nodes eliminated. The
friction functional and the multiplier pairing on G3 are mass-lumped:
``<mu, v> ~ sum_i mu_i v_i w_i`` with ``w_i`` the half-sum of incident G3 edge
lengths, so the discrete multiplier set is the box ``|mu_i| <= g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .expr import Expression, parse_expression
from .linalg import as_csr
from .mesh import MIN_AREA, Mesh, MeshError

__all__ = [
    "ProblemSpec",
    "DiscreteSystem",
    "assemble_stiffness",
    "assemble_load",
    "build_system",
    "eval_j",
    "eval_j_eps",
    "lumped_mass",
    "boundary_weights",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Material and data of the antiplane problem.

    ``g = 0`` is accepted as the frictionless limit (pure traction-free G3);
    negative values are rejected.
    """

    xi: float = 1.0
    g: float = 1.0
    f0: Expression | str = "0"
    f2: Expression | str = "0"

    def __post_init__(self):
        if not np.isfinite(self.xi) or self.xi <= 0:
            raise ValueError(f"xi must be positive (got {self.xi!r})")
        if not np.isfinite(self.g) or self.g < 0:
            raise ValueError(f"g must be positive (got {self.g!r})")
        for name in ("f0", "f2"):
            value = getattr(self, name)
            if isinstance(value, str):
                object.__setattr__(self, name, parse_expression(value))
            elif not isinstance(value, Expression):
                object.__setattr__(self, name, parse_expression(repr(float(value))))

    def negated(self):
        """Same problem with both loads negated."""
        return ProblemSpec(self.xi, self.g, f"-({self.f0.source})", f"-({self.f2.source})")

    def with_g(self, g):
        return ProblemSpec(self.xi, g, self.f0, self.f2)


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Assembled system over the free (non-G1) degrees of freedom.

    Attributes
    ----------
    A : csr_array
        Stiffness matrix over free dofs.
    f : ndarray
        Load vector over free dofs.
    g3_dofs : ndarray
        Free-dof indices on G3, increasing node order.
    w : ndarray
        Lumped G3 weights, one per entry of ``g3_dofs``.
    free_nodes : ndarray
        Node index of every free dof.
    node_to_dof : ndarray
        Free-dof index of every node, -1 on G1.
    """

    mesh: Mesh
    A: sp.csr_array
    f: np.ndarray
    g3_dofs: np.ndarray
    w: np.ndarray
    free_nodes: np.ndarray
    node_to_dof: np.ndarray
    h_gamma: float = field(default=0.0)

    @property
    def ndof(self):
        return len(self.f)

    def g3_nodes(self):
        return self.free_nodes[self.g3_dofs]

    def to_nodal(self, u):
        """Expand a free-dof vector to all nodes (zero on G1)."""
        out = np.zeros(self.mesh.num_nodes)
        out[self.free_nodes] = u
        return out

    def trace(self, u):
        return np.asarray(u)[self.g3_dofs]

    def energy_norm(self, u):
        u = np.asarray(u, dtype=float)
        return float(np.sqrt(max(u @ (self.A @ u), 0.0)))


def _gradients(m):
    """Per-triangle areas and P1 basis gradients, shape (T,) and (T, 3, 2)."""
    p = m.nodes[m.triangles]
    area = 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                  - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
    bad = np.flatnonzero(area < MIN_AREA)
    if len(bad):
        raise MeshError(f"degenerate triangle {bad[0]} (area {area[bad[0]]:.3e})")
    # grad phi_k = rot90(opposite edge) / (2 area)
    grads = np.empty((len(area), 3, 2))
    for k in range(3):
        a, b = p[:, (k + 1) % 3], p[:, (k + 2) % 3]
        grads[:, k, 0] = (a[:, 1] - b[:, 1]) / (2 * area)
        grads[:, k, 1] = (b[:, 0] - a[:, 0]) / (2 * area)
    return area, grads


def assemble_stiffness(m, xi):
    """Global stiffness ``xi * int grad phi_i . grad phi_j`` over all nodes."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    area, grads = _gradients(m)
    local = xi * area[:, None, None] * np.einsum("tid,tjd->tij", grads, grads)
    rows = np.repeat(m.triangles, 3, axis=1).ravel()
    cols = np.tile(m.triangles, (1, 3)).ravel()
    n = m.num_nodes
    return as_csr(sp.coo_array((local.ravel(), (rows, cols)), shape=(n, n)))


def lumped_mass(m):
    """Row-sum lumped area mass per node (area / 3 from every adjacent triangle)."""
    area, _ = _gradients(m)
    return np.bincount(m.triangles.ravel(), weights=np.repeat(area / 3.0, 3), minlength=m.num_nodes)


def boundary_weights(m, tag):
    """Per-node lumped weight of the ``tag`` edges (half-sum of incident lengths)."""
    mask = m.tags == tag
    e = m.edges[mask]
    half = np.repeat(m.edge_lengths(tag) / 2.0, 2)
    return np.bincount(e.ravel(), weights=half, minlength=m.num_nodes)


def assemble_load(m, spec):
    """Load vector over all nodes with centroid / edge-midpoint quadrature."""
    area, _ = _gradients(m)
    c = m.nodes[m.triangles].mean(axis=1)
    vol = area / 3.0 * spec.f0(c[:, 0], c[:, 1])
    load = np.bincount(m.triangles.ravel(), weights=np.repeat(vol, 3), minlength=m.num_nodes)
    e = m.edges[m.tags == "G2"]
    if len(e):
        mid = 0.5 * (m.nodes[e[:, 0]] + m.nodes[e[:, 1]])
        surf = m.edge_lengths("G2") / 2.0 * spec.f2(mid[:, 0], mid[:, 1])
        load += np.bincount(e.ravel(), weights=np.repeat(surf, 2), minlength=m.num_nodes)
    return load


def build_system(m, spec):
    """Assemble and eliminate the G1 nodes."""
    K = assemble_stiffness(m, spec.xi)
    load = assemble_load(m, spec)
    dirichlet = np.zeros(m.num_nodes, dtype=bool)
    dirichlet[m.tag_nodes("G1")] = True
    free_nodes = np.flatnonzero(~dirichlet)
    node_to_dof = np.full(m.num_nodes, -1, dtype=np.int64)
    node_to_dof[free_nodes] = np.arange(len(free_nodes))

    A = as_csr(K[free_nodes][:, free_nodes])
    f = load[free_nodes]

    g3_nodes = np.array([i for i in m.tag_nodes("G3") if not dirichlet[i]], dtype=np.int64)
    w = boundary_weights(m, "G3")[g3_nodes]
    g3_dofs = node_to_dof[g3_nodes]
    h_gamma = float(m.edge_lengths("G3").max()) if m.edge_count("G3") else 0.0
    for a in (f, g3_dofs, w, free_nodes, node_to_dof):
        a.setflags(write=False)
    return DiscreteSystem(m, A, f, g3_dofs, w, free_nodes, node_to_dof, h_gamma)


def eval_j(u_on_g3, g, w):
    """Lumped friction functional ``sum g w_i |u_i|``."""
    return float(g * np.sum(np.asarray(w) * np.abs(u_on_g3)))


def eval_j_eps(u_on_g3, g, w, eps):
    """Smoothed friction functional ``sum g w_i (sqrt(u_i^2 + eps^2) - eps)``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    u = np.asarray(u_on_g3, dtype=float)
    if eps == 0:
        return eval_j(u, g, w)
    # sqrt(u^2+e^2)-e written without cancellation
    return float(g * np.sum(np.asarray(w) * u * u / (np.hypot(u, eps) + eps)))
