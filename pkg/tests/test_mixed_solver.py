import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tresca import mixed_solver
from tresca.assembly import ProblemSpec, build_system
from tresca.benchmarks import SLIP, STICK
from tresca.linalg import ConvergenceError, solve_spd
from tresca.mesh import generate_unit_square
from tresca.mixed_solver import (
    CyclingError,
    apply_W,
    default_c,
    default_rho,
    project_box,
    saddle_residuals,
    solve_pdas,
    solve_uzawa,
)


def pinned_solve(sys):
    """Linear solve with the G3 dofs pinned to zero as well."""
    keep = np.ones(sys.ndof, dtype=bool)
    keep[sys.g3_dofs] = False
    idx = np.flatnonzero(keep)
    u = np.zeros(sys.ndof)
    u[idx] = solve_spd(sys.A[idx][:, idx], sys.f[idx])
    return u


def test_project_box_example():
    np.testing.assert_array_equal(project_box([2.0, -3.0, 0.5], 1.0), [1.0, -1.0, 0.5])


def test_project_box_feasible_unchanged():
    mu = np.array([0.3, -1.0, 1.0])
    np.testing.assert_array_equal(project_box(mu, 1.0), mu)


mus = hnp.arrays(float, 7, elements=st.floats(-1e6, 1e6))


@given(mus, st.floats(0, 1e3))
def test_project_box_idempotent(mu, g):
    p = project_box(mu, g)
    np.testing.assert_array_equal(project_box(p, g), p)
    assert np.all(np.abs(p) <= g)


@given(mus, mus, hnp.arrays(float, 7, elements=st.floats(0.01, 1.0)), st.floats(0, 1e3))
def test_project_box_nonexpansive(a, b, w, g):
    d = project_box(a, g) - project_box(b, g)
    assert np.sum(w * d * d) <= np.sum(w * (a - b) ** 2) * (1 + 1e-12)


def test_defaults_scale_with_mesh():
    sys = build_system(generate_unit_square(8), ProblemSpec(xi=2.0))
    spec = ProblemSpec(xi=2.0)
    assert default_rho(sys, spec) == pytest.approx(2.0 * 8)
    assert default_c(sys, spec) == pytest.approx(100 * 2.0 * 8)


@pytest.mark.parametrize("solver", [solve_uzawa, solve_pdas])
def test_zero_data(solver):
    spec = ProblemSpec(g=1.0)
    sys = build_system(generate_unit_square(4), spec)
    sol = solver(sys, spec)
    assert not np.any(sol.u) and not np.any(sol.lam)
    assert sol.iterations <= 1


def test_uzawa_zero_data_one_iteration():
    spec = ProblemSpec(g=1.0)
    sys = build_system(generate_unit_square(4), spec)
    assert solve_uzawa(sys, spec).iterations == 1


@pytest.mark.parametrize("solver", [solve_uzawa, solve_pdas])
def test_large_g_matches_pinned_solve(solver):
    spec = ProblemSpec(g=1e6, f0="1 + x", f2="y")
    sys = build_system(generate_unit_square(8), spec)
    u = solver(sys, spec).u
    ref = pinned_solve(sys)
    assert sys.energy_norm(u - ref) <= 1e-8 * sys.energy_norm(ref)


def test_slip_benchmark(slip16):
    m, spec, sys, pd = slip16
    uz = solve_uzawa(sys, spec)
    for sol in (uz, pd):
        np.testing.assert_allclose(sol.lam, 0.5, atol=1e-10)
        assert np.all(sys.trace(sol.u) > 0)
        assert np.max(np.abs(sys.trace(sol.u) - 0.5)) < 5e-3
    np.testing.assert_array_equal(pd.partition, mixed_solver.SLIP_POS)


def test_stick_benchmark(stick16):
    m, spec, sys, pd = stick16
    np.testing.assert_array_equal(pd.partition, mixed_solver.STICK)
    assert np.max(np.abs(sys.trace(pd.u))) == 0.0
    assert np.all(np.abs(pd.lam) < spec.g)
    # interior G3 dofs carry the exact traction, corners are O(h) off
    np.testing.assert_allclose(pd.lam[1:-1], 0.5, atol=1e-9)
    assert np.max(np.abs(pd.lam - 0.5)) < 1 / 16


def test_stick_multiplier_converges_with_h():
    errs = []
    for n in (8, 16, 32):
        spec = ProblemSpec(**STICK)
        sys = build_system(generate_unit_square(n), spec)
        errs.append(np.max(np.abs(solve_pdas(sys, spec).lam - 0.5)))
    assert errs[0] > errs[1] > errs[2]


def test_solvers_agree(bench16):
    m, spec, sys, pd = bench16
    uz = solve_uzawa(sys, spec)
    assert sys.energy_norm(uz.u - pd.u) <= 1e-8 * sys.energy_norm(pd.u)
    assert np.max(np.abs(uz.lam - pd.lam)) <= 1e-8 * spec.g


def test_recorded_residuals_are_achieved(bench16):
    m, spec, sys, pd = bench16
    for sol, tol in ((pd, 1e-10), (solve_uzawa(sys, spec), 1e-11)):
        stat, feas, gap = saddle_residuals(sys, spec.g, sol.u, sol.lam)
        assert (stat, feas, gap) == (sol.stationarity_residual, sol.feasibility_residual, sol.complementarity_gap)
        assert max(stat, feas, gap) <= tol
        assert np.all(np.abs(sol.lam) <= spec.g + 1e-12)
        r = sys.A @ sol.u + apply_W(sys, sol.lam) - sys.f
        assert np.linalg.norm(r) <= tol * np.linalg.norm(sys.f)


def test_inequality_on_extreme_points(bench16):
    m, spec, sys, pd = bench16
    t = sys.trace(pd.u)
    k = len(t)
    for mu in (np.zeros(k), np.full(k, spec.g), np.full(k, -spec.g), spec.g * np.sign(t)):
        assert np.sum((mu - pd.lam) * t * sys.w) <= 1e-10


def test_uniqueness_from_different_starts(bench16):
    m, spec, sys, pd = bench16
    k = len(sys.g3_dofs)
    for solver in (solve_uzawa, solve_pdas):
        a = solver(sys, spec, lam0=np.zeros(k))
        b = solver(sys, spec, lam0=np.full(k, spec.g))
        assert sys.energy_norm(a.u - b.u) <= 1e-8 * sys.energy_norm(a.u)
        assert np.max(np.abs(a.lam - b.lam)) <= 1e-8


def test_uzawa_recovers_from_oversized_step():
    spec = ProblemSpec(**STICK)
    sys = build_system(generate_unit_square(8), spec)
    sol = solve_uzawa(sys, spec, rho=50 * default_rho(sys, spec))
    assert sol.rho < 50 * default_rho(sys, spec)
    ref = solve_pdas(sys, spec)
    assert np.max(np.abs(sol.lam - ref.lam)) <= 1e-8


def test_uzawa_max_iter():
    spec = ProblemSpec(**STICK)
    sys = build_system(generate_unit_square(8), spec)
    with pytest.raises(ConvergenceError, match="Uzawa"):
        solve_uzawa(sys, spec, max_iter=3)


def test_pdas_max_iter():
    spec = ProblemSpec(g=0.3, f0="2*sin(4*y)", f2="0")
    sys = build_system(generate_unit_square(8), spec)
    with pytest.raises(ConvergenceError):
        solve_pdas(sys, spec, max_iter=1)


def test_pdas_mixed_partition():
    # a load that changes sign along G3 gives slip+, slip- and stick dofs together
    spec = ProblemSpec(g=0.3, f0="4*cos(3.14159265358979*y)", f2="0")
    sys = build_system(generate_unit_square(16), spec)
    pd = solve_pdas(sys, spec)
    assert set(np.unique(pd.partition)) == {mixed_solver.STICK, mixed_solver.SLIP_POS, mixed_solver.SLIP_NEG}
    uz = solve_uzawa(sys, spec)
    assert sys.energy_norm(uz.u - pd.u) <= 1e-8 * sys.energy_norm(pd.u)


@pytest.mark.parametrize("f2", ["0.2*x", "0.3*x", "0.5*x - 0.2"])
def test_pdas_reduces_c_when_cycling(f2):
    # the default c flips the dofs next to the stick point back and forth on these loads
    spec = ProblemSpec(g=0.3, f0="4*cos(3.14159265358979*y)", f2=f2)
    sys = build_system(generate_unit_square(16), spec)
    pd = solve_pdas(sys, spec)
    assert pd.c < mixed_solver.default_c(sys, spec)
    assert set(np.unique(pd.partition)) == {mixed_solver.STICK, mixed_solver.SLIP_POS, mixed_solver.SLIP_NEG}
    uz = solve_uzawa(sys, spec)
    assert sys.energy_norm(uz.u - pd.u) <= 1e-8 * sys.energy_norm(pd.u)
    assert np.max(np.abs(uz.lam - pd.lam)) <= 1e-8 * spec.g


def test_pdas_keeps_default_c_without_cycling():
    spec = ProblemSpec(**SLIP)
    sys = build_system(generate_unit_square(8), spec)
    assert solve_pdas(sys, spec).c == mixed_solver.default_c(sys, spec)


def test_pdas_cycling_reported(monkeypatch):
    spec = ProblemSpec(**SLIP)
    sys = build_system(generate_unit_square(4), spec)
    k = len(sys.g3_dofs)
    parts = iter([np.zeros(k, np.int8), np.ones(k, np.int8)] * 100)
    monkeypatch.setattr(mixed_solver, "_classify", lambda t, g: next(parts))
    with pytest.raises(CyclingError, match="cycling") as exc:
        solve_pdas(sys, spec)
    # cycling persisted through every reduction of c
    c_final = mixed_solver.default_c(sys, spec) / 10**mixed_solver._MAX_C_REDUCTIONS
    assert f"c={c_final:.3e}" in str(exc.value)


@pytest.mark.parametrize("solver, kw", [(solve_uzawa, "rho"), (solve_pdas, "c")])
def test_rejects_nonpositive_parameters(solver, kw):
    spec = ProblemSpec(**SLIP)
    sys = build_system(generate_unit_square(2), spec)
    with pytest.raises(ValueError):
        solver(sys, spec, **{kw: 0.0})
