import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tresca.assembly import ProblemSpec, build_system
from tresca.benchmarks import SLIP
from tresca.mesh import generate_unit_square
from tresca.mixed_solver import solve_pdas
from tresca.verify import (
    F_minus,
    F_plus,
    friction_kkt,
    interior_residual,
    neumann_residual,
    sgn,
    sign_probe_residuals,
)


def test_sign_functions():
    r = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_array_equal(sgn(r), [-1, 0, 1])
    np.testing.assert_array_equal(F_plus(r), [-1, 1, 1])
    np.testing.assert_array_equal(F_minus(r), [1, 1, -1])


def test_interior_residual_of_zero_field():
    m = generate_unit_square(6)
    sys = build_system(m, ProblemSpec())
    nodes, rho = interior_residual(m, sys, np.zeros(sys.ndof))
    assert len(nodes) == 25 and not np.any(rho)


@pytest.mark.parametrize("xi", [1.0, 3.0])
def test_interior_residual_of_x_squared(xi):
    # on the structured grid the P1 stencil is the five-point Laplacian, exact on quadratics
    m = generate_unit_square(10)
    sys = build_system(m, ProblemSpec(xi=xi))
    u = m.nodes[sys.free_nodes, 0] ** 2
    _, rho = interior_residual(m, sys, u)
    np.testing.assert_allclose(rho, -2 * xi, rtol=1e-10)


def test_interior_residual_excludes_boundary():
    m = generate_unit_square(4)
    sys = build_system(m, ProblemSpec())
    nodes, _ = interior_residual(m, sys, np.zeros(sys.ndof))
    p = m.nodes[nodes]
    assert np.all((p > 0) & (p < 1))


def test_neumann_residual_nodes():
    m = generate_unit_square(4)
    sys = build_system(m, ProblemSpec())
    nodes, _ = neumann_residual(m, sys, np.zeros(sys.ndof))
    p = m.nodes[nodes]
    assert len(nodes) == 6
    assert np.all((p[:, 0] > 0) & (p[:, 0] < 1))


def test_neumann_residual_of_exact_slip_interpolant():
    # the x-only solution has zero normal derivative on G2; the discrete rows see it exactly
    for n in (4, 8, 16, 32):
        m = generate_unit_square(n)
        sys = build_system(m, ProblemSpec(**SLIP))
        x = m.nodes[sys.free_nodes, 0]
        _, eta = neumann_residual(m, sys, -x**2 + 1.5 * x)
        assert np.max(np.abs(eta)) <= 1e-12


def test_residuals_vanish_at_discrete_solution(bench16):
    m, spec, sys, pd = bench16
    _, rho = interior_residual(m, sys, pd.u, spec)
    _, eta = neumann_residual(m, sys, pd.u, spec)
    assert np.max(np.abs(rho)) <= 1e-9 * 2
    assert np.max(np.abs(eta)) <= 1e-9 * 2


def test_neumann_residual_pinned_traction_problem():
    spec = ProblemSpec(g=1e6, f0="0", f2="1")
    m = generate_unit_square(8)
    sys = build_system(m, spec)
    u = solve_pdas(sys, spec).u
    _, eta = neumann_residual(m, sys, u, spec)
    assert np.max(np.abs(eta)) <= 1e-9


def test_kkt_all_zero():
    rep = friction_kkt(np.zeros(4), np.zeros(4), 1.0)
    assert rep.counts == {"stick": 4, "slip+": 0, "slip-": 0}
    assert rep.max_violation == 0.0


def test_kkt_classification_and_violation():
    u = np.array([0.0, 1.0, -2.0, 1e-12, 0.5])
    lam = np.array([1.2, 1.0, -0.7, 0.3, 0.9])
    rep = friction_kkt(u, lam, 1.0)
    assert [r.classification for r in rep.records] == ["stick", "slip+", "slip-", "stick", "slip+"]
    np.testing.assert_allclose([r.violation for r in rep.records], [0.2, 0.0, 0.3, 0.0, 0.1], atol=1e-15)
    assert rep.max_violation == pytest.approx(0.3)


def test_kkt_rejects_bad_input():
    with pytest.raises(ValueError):
        friction_kkt(np.zeros(3), np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        friction_kkt(np.zeros(3), np.zeros(3), 1.0, tol_u=0.0)


@given(hnp.arrays(float, 9, elements=st.floats(-10, 10)), hnp.arrays(float, 9, elements=st.floats(-10, 10)),
       st.floats(0.01, 5))
def test_kkt_counts_exhaustive(u, lam, g):
    rep = friction_kkt(u, lam, g)
    assert sum(rep.counts.values()) == 9
    assert all(r.violation >= 0 for r in rep.records)


def test_slip_kkt(slip16):
    m, spec, sys, pd = slip16
    rep = friction_kkt(sys.trace(pd.u), pd.lam, spec.g)
    assert rep.counts["slip+"] == len(sys.g3_dofs)
    assert rep.max_violation <= 1e-8 * spec.g
    for r in rep.records:
        assert r.lam * r.u == pytest.approx(spec.g * abs(r.u), rel=1e-12)


def test_stick_kkt(stick16):
    m, spec, sys, pd = stick16
    rep = friction_kkt(sys.trace(pd.u), pd.lam, spec.g)
    assert rep.counts["stick"] == len(sys.g3_dofs)
    assert rep.max_violation == 0.0
    assert np.all(np.abs(pd.lam) < spec.g)


def test_sign_probes(bench16, rng):
    m, spec, sys, pd = bench16
    probes = rng.random((50, len(sys.w)))
    probes[:len(sys.w)] = np.eye(len(sys.w))[: min(50, len(sys.w))]
    plus, minus = sign_probe_residuals(sys.trace(pd.u), pd.lam, spec.g, sys.w, probes, tol_u=1e-8)
    assert plus <= 1e-10 and minus <= 1e-10


def test_sign_probes_detect_wrong_sign(slip16):
    m, spec, sys, pd = slip16
    plus, minus = sign_probe_residuals(sys.trace(pd.u), -pd.lam, spec.g, sys.w, np.eye(len(sys.w)))
    assert minus > 0


def test_kkt_csv(slip16):
    m, spec, sys, pd = slip16
    rep = friction_kkt(sys.trace(pd.u), pd.lam, spec.g, dofs=sys.g3_dofs, coords=m.nodes[sys.g3_nodes()])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "dof,x,y,u,lambda,class,violation"
    assert len(lines) == len(sys.g3_dofs) + 1
    first = lines[1].split(",")
    assert int(first[0]) == sys.g3_dofs[0]
    assert float(first[1]) == 1.0 and first[5] == "slip+"
    assert float(first[3]) == sys.trace(pd.u)[0]
