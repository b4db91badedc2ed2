"""CSV and legacy VTK writers. Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
import io

import numpy as np

__all__ = ["solution_csv", "multiplier_csv", "table_csv", "vtk_unstructured", "write_text"]


def _fmt(v):
    return f"{float(v):.17g}"


def solution_csv(mesh, u_nodal):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "x", "y", "u"])
    for i, ((x, y), u) in enumerate(zip(mesh.nodes, u_nodal)):
        w.writerow([i, _fmt(x), _fmt(y), _fmt(u)])
    return buf.getvalue()


def multiplier_csv(sys, lam):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dof", "node", "x", "y", "weight", "lambda"])
    nodes = sys.g3_nodes()
    for dof, node, wi, li in zip(sys.g3_dofs, nodes, sys.w, lam):
        x, y = sys.mesh.nodes[node]
        w.writerow([int(dof), int(node), _fmt(x), _fmt(y), _fmt(wi), _fmt(li)])
    return buf.getvalue()


def table_csv(rows, columns):
    """Rows of dicts to CSV; floats at full precision, missing values empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        out = []
        for c in columns:
            v = row.get(c)
            if v is None:
                out.append("")
            elif isinstance(v, (float, np.floating)):
                out.append(_fmt(v))
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()


def vtk_unstructured(mesh, u_nodal, lam_nodal=None, title="tresca solution"):
    """Legacy ASCII UNSTRUCTURED_GRID with point scalars ``u`` and ``lambda``.

    ``lambda`` is zero at points without a multiplier.
    """
    n, t = mesh.num_nodes, mesh.num_triangles
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {n} double"]
    lines += [f"{_fmt(x)} {_fmt(y)} 0" for x, y in mesh.nodes]
    lines.append(f"CELLS {t} {4 * t}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    lines.append(f"CELL_TYPES {t}")
    lines += ["5"] * t
    lines += [f"POINT_DATA {n}", "SCALARS u double 1", "LOOKUP_TABLE default"]
    lines += [_fmt(v) for v in u_nodal]
    if lam_nodal is not None:
        lines += ["SCALARS lambda double 1", "LOOKUP_TABLE default"]
        lines += [_fmt(v) for v in lam_nodal]
    return "\n".join(lines) + "\n"


def write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)
