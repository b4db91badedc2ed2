"""Conforming triangulations with a tagged boundary partition G1 / G2 / G3.

G1 carries the homogeneous Dirichlet condition, G2 the prescribed traction and
G3 the Tresca friction condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TAGS",
    "Mesh",
    "MeshError",
    "generate_unit_square",
    "load_mesh",
    "dump_mesh",
    "refine",
    "prolongate",
    "unique_edges",
]

TAGS = ("G1", "G2", "G3")
MIN_AREA = 1e-14


class MeshError(ValueError):
    """Raised when mesh input cannot be parsed or violates a mesh invariant."""


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation.

    Attributes
    ----------
    nodes : (N, 2) float array
    triangles : (T, 3) int array, counterclockwise
    edges : (E, 2) int array of tagged boundary edges
    tags : (E,) array of tag strings from ``TAGS``
    """

    nodes: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    tags: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes, float).reshape(-1, 2))
        object.__setattr__(self, "triangles", _frozen(self.triangles, np.int64).reshape(-1, 3))
        object.__setattr__(self, "edges", _frozen(self.edges, np.int64).reshape(-1, 2))
        object.__setattr__(self, "tags", _frozen(self.tags, "<U2").reshape(-1))

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.triangles, other.triangles)
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.tags, other.tags)
        )

    __hash__ = None

    @property
    def num_nodes(self):
        return len(self.nodes)

    @property
    def num_triangles(self):
        return len(self.triangles)

    def signed_areas(self):
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_lengths(self, tag=None):
        e = self.edges if tag is None else self.edges[self.tags == tag]
        return np.linalg.norm(self.nodes[e[:, 1]] - self.nodes[e[:, 0]], axis=1)

    def boundary_measure(self, tag):
        return float(self.edge_lengths(tag).sum())

    def tag_nodes(self, tag):
        """Sorted node indices touched by edges carrying ``tag``."""
        return np.unique(self.edges[self.tags == tag])

    def edge_count(self, tag):
        return int(np.count_nonzero(self.tags == tag))

    def boundary_normals(self):
        """Outward unit normal of every tagged boundary edge, shape (E, 2)."""
        owner = {}
        for t, tri in enumerate(self.triangles):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                owner[(min(a, b), max(a, b))] = t
        normals = np.empty((len(self.edges), 2))
        for k, (i, j) in enumerate(self.edges):
            tri = self.triangles[owner[(min(i, j), max(i, j))]]
            opposite = [v for v in tri if v != i and v != j][0]
            d = self.nodes[j] - self.nodes[i]
            n = np.array([d[1], -d[0]]) / np.hypot(*d)
            if np.dot(n, self.nodes[opposite] - self.nodes[i]) > 0:
                n = -n
            normals[k] = n
        return normals


def unique_edges(triangles):
    """Sorted unique undirected edges of ``triangles`` and their multiplicity."""
    t = np.asarray(triangles)
    all_edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    all_edges.sort(axis=1)
    edges, counts = np.unique(all_edges, axis=0, return_counts=True)
    return edges, counts


def validate(m):
    """Check every Mesh invariant; raise MeshError with a diagnostic."""
    nv = m.num_nodes
    if m.num_triangles == 0:
        raise MeshError("mesh has no triangles")
    for name, idx in (("triangle", m.triangles), ("edge", m.edges)):
        bad = np.flatnonzero(np.any((idx < 0) | (idx >= nv), axis=1))
        if len(bad):
            raise MeshError(f"{name} {bad[0]} has node index out of range [0, {nv})")
    areas = m.signed_areas()
    bad = np.flatnonzero(areas <= MIN_AREA)
    if len(bad):
        raise MeshError(f"triangle {bad[0]} has non-positive or degenerate area {areas[bad[0]]:.3e}")
    bad = np.flatnonzero(~np.isin(m.tags, TAGS))
    if len(bad):
        raise MeshError(f"edge {bad[0]} has unknown tag {m.tags[bad[0]]!r}")

    edges, counts = unique_edges(m.triangles)
    if np.any(counts > 2):
        i, j = edges[np.argmax(counts > 2)]
        raise MeshError(f"edge ({i}, {j}) is shared by more than two triangles")
    boundary = {tuple(e) for e in edges[counts == 1]}
    interior = {tuple(e) for e in edges[counts == 2]}

    seen = set()
    for k, (i, j) in enumerate(m.edges):
        key = (min(i, j), max(i, j))
        if key in seen:
            raise MeshError(f"boundary edge ({i}, {j}) is tagged more than once")
        if key in interior:
            raise MeshError(f"tagged edge ({i}, {j}) is an interior edge")
        if key not in boundary:
            raise MeshError(f"tagged edge ({i}, {j}) is not an edge of any triangle")
        seen.add(key)
    missing = sorted(boundary - seen)
    if missing:
        raise MeshError(f"untagged boundary edge {missing[0]}")
    for tag in TAGS:
        if m.edge_count(tag) == 0:
            raise MeshError(f"boundary part {tag} has no edges")
    return m


def generate_unit_square(n):
    """Structured triangulation of (0, 1)^2 with n x n cells.

    Cells are split along the lower-left to upper-right diagonal. x = 0 is
    tagged G1, y = 0 and y = 1 are G2 and x = 1 is G3.
    """
    if int(n) != n or n < 1:
        raise MeshError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    s = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(s, s)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def idx(i, j):
        return j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            ll, lr, ul, ur = idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)
            tris.append((ll, lr, ur))
            tris.append((ll, ur, ul))

    edges, tags = [], []
    for j in range(n):  # x = 0, traversed downward to keep the boundary counterclockwise
        edges.append((idx(0, n - j), idx(0, n - j - 1)))
        tags.append("G1")
    for i in range(n):
        edges.append((idx(i, 0), idx(i + 1, 0)))
        tags.append("G2")
    for i in range(n):
        edges.append((idx(n - i, n), idx(n - i - 1, n)))
        tags.append("G2")
    for j in range(n):
        edges.append((idx(n, j), idx(n, j + 1)))
        tags.append("G3")
    return Mesh(nodes, tris, edges, tags)


def load_mesh(text):
    """Parse the line-oriented mesh format and validate the result.

    Records are ``node <x> <y>``, ``tri <i> <j> <k>`` and ``edge <i> <j> <tag>``
    with 0-based indices; ``#`` starts a comment. Clockwise triangles are
    reoriented, all other invariant violations raise :class:`MeshError`.
    """
    nodes, tris, edges, tags = [], [], [], []
    index_lines = []  # (line number, indices) of every tri and edge record
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        try:
            if kind == "node" and len(args) == 2:
                nodes.append((float(args[0]), float(args[1])))
            elif kind == "tri" and len(args) == 3:
                tris.append(tuple(int(a) for a in args))
                index_lines.append((lineno, tris[-1]))
            elif kind == "edge" and len(args) == 3:
                if args[2] not in TAGS:
                    raise MeshError(f"line {lineno}: unknown boundary tag {args[2]!r}")
                edges.append((int(args[0]), int(args[1])))
                tags.append(args[2])
                index_lines.append((lineno, edges[-1]))
            else:
                raise MeshError(f"line {lineno}: cannot parse record {line!r}")
        except ValueError as exc:
            if isinstance(exc, MeshError):
                raise
            raise MeshError(f"line {lineno}: bad number in record {line!r}") from None
    if not nodes:
        raise MeshError("mesh file has no nodes")
    for lineno, idx in index_lines:
        if min(idx) < 0 or max(idx) >= len(nodes):
            raise MeshError(f"line {lineno}: node index out of range [0, {len(nodes)})")
    tris = np.array(tris, dtype=np.int64).reshape(-1, 3)
    nodes_arr = np.array(nodes, dtype=float)
    if len(tris):
        p = nodes_arr[tris]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        cw = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
        tris[cw] = tris[cw][:, [0, 2, 1]]
    return validate(Mesh(nodes_arr, tris, np.array(edges, dtype=np.int64).reshape(-1, 2), tags))


def dump_mesh(m):
    """Serialize ``m`` in the format read by :func:`load_mesh` (lossless floats)."""
    lines = [f"# {m.num_nodes} nodes, {m.num_triangles} triangles, {len(m.edges)} boundary edges"]
    lines += [f"node {x!r} {y!r}" for x, y in m.nodes.tolist()]
    lines += [f"tri {i} {j} {k}" for i, j, k in m.triangles.tolist()]
    lines += [f"edge {i} {j} {t}" for (i, j), t in zip(m.edges.tolist(), m.tags.tolist())]
    return "\n".join(lines) + "\n"


def refine(m):
    """Uniform red refinement: every triangle is split into four at edge midpoints.

    New node ``N_v + k`` is the midpoint of ``unique_edges(m.triangles)[0][k]``.
    """
    edges, _ = unique_edges(m.triangles)
    nv = m.num_nodes
    lookup = {(int(a), int(b)): nv + k for k, (a, b) in enumerate(edges)}

    def mid(a, b):
        return lookup[(a, b) if a < b else (b, a)]

    nodes = np.vstack([m.nodes, 0.5 * (m.nodes[edges[:, 0]] + m.nodes[edges[:, 1]])])
    tris = []
    for a, b, c in m.triangles.tolist():
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        tris += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    new_edges, new_tags = [], []
    for (i, j), t in zip(m.edges.tolist(), m.tags.tolist()):
        k = mid(i, j)
        new_edges += [(i, k), (k, j)]
        new_tags += [t, t]
    return Mesh(nodes, tris, new_edges, new_tags)


def prolongate(m, values):
    """Interpolate nodal P1 values on ``m`` onto the nodes of ``refine(m)``."""
    edges, _ = unique_edges(m.triangles)
    values = np.asarray(values, dtype=float)
    return np.concatenate([values, 0.5 * (values[edges[:, 0]] + values[edges[:, 1]])])
