import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plandis.errors import (
    DivergentExhaustion,
    InvalidDegree,
    InvalidExponent,
    NoConvergence,
    PreconditionViolated,
)
from plandis.graph import build_graph
from plandis.model import (
    antitree_spec,
    green0_profile,
    path_spec,
    radial_graph,
    realize,
    spherical_flux_solve,
    tree_spec,
)
from plandis.operators import SchrodingerOperator, energy, operator_values
from plandis.solvers import (
    SolveConfig,
    ball_green,
    dirichlet_solve,
    green_function,
    shoot_green,
    tree_beta,
    tree_beta_residual,
    weak_comparison_check,
)

from conftest import random_connected_graph


def quadratic_beta(d):
    return ((d + 2) - math.sqrt(d * d + 4)) / (2 * d)


def linear_oracle(g, V, data, source=None):
    """Dense solve of the p = 2 Dirichlet problem, independent of the solver."""
    L = np.zeros((g.n, g.n))
    for x, y, b in zip(g.edge_x, g.edge_y, g.edge_b):
        L[x, x] += b
        L[y, y] += b
        L[x, y] -= b
        L[y, x] -= b
    A = L + np.diag(g.measure * V)
    rhs = np.zeros(g.n) if source is None else g.measure * source
    inner = g.interior_mask
    out = data.astype(float).copy()
    rhs = rhs[inner] - A[np.ix_(inner, ~inner)] @ data[~inner]
    out[inner] = np.linalg.solve(A[np.ix_(inner, inner)], rhs)
    return out


def test_config_validation():
    with pytest.raises(PreconditionViolated):
        SolveConfig(max_sweeps=0)
    with pytest.raises(PreconditionViolated):
        SolveConfig(damping=1.5)
    assert SolveConfig().to_dict()["sweep_order"] == "symmetric"


@given(st.integers(5, 60), st.integers(0, 2 ** 31 - 1))
def test_p2_matches_linear_oracle(n, seed):
    rng = np.random.default_rng(seed)
    nb = max(1, n // 5)
    g = random_connected_graph(rng, n, boundary=range(n - nb, n))
    V = rng.uniform(0, 1, n)
    data = rng.normal(size=n)
    sol = dirichlet_solve(SchrodingerOperator(g, 2.0, V), data)
    assert sol.converged
    assert np.allclose(sol.u, linear_oracle(g, V, data), atol=1e-8)


def test_p2_oracle_with_source_200_vertices(rng):
    g = random_connected_graph(rng, 200, boundary=range(180, 200))
    V = rng.uniform(0, 0.5, 200)
    src = rng.uniform(0, 1, 200)
    data = rng.normal(size=200)
    sol = dirichlet_solve(SchrodingerOperator(g, 2.0, V), data, source=src)
    assert np.allclose(sol.u, linear_oracle(g, V, data, src), atol=1e-8)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.5])
def test_constant_boundary_data(p, rng):
    g = random_connected_graph(rng, 30, boundary=range(24, 30))
    sol = dirichlet_solve(SchrodingerOperator(g, p), np.full(30, 2.5))
    assert np.allclose(sol.u, 2.5)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_residual_and_boundary(p, rng):
    g = random_connected_graph(rng, 40, boundary=range(32, 40))
    V = rng.uniform(0, 2, 40)
    data = rng.normal(size=40)
    cfg = SolveConfig(residual_tol=1e-11)
    sol = dirichlet_solve(SchrodingerOperator(g, p, V), data, cfg)
    res = operator_values(SchrodingerOperator(g, p, V), sol.u)[g.interior_mask]
    assert np.max(np.abs(res)) <= cfg.residual_tol
    assert np.array_equal(sol.u[32:], data[32:])


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("d", [2, 3])
def test_tree_beta_dirichlet(p, d):
    R = 5
    g = realize(tree_spec(d, R))
    beta = tree_beta(p, d)
    data = beta ** g.depth.astype(float)
    # the root equation carries the missing parent edge, so fix o as data too
    g = g.with_boundary(set(g.boundary) | {g.root})
    sol = dirichlet_solve(SchrodingerOperator(g, p, np.ones(g.n)), data)
    assert np.allclose(sol.u, data, atol=1e-8)


def test_negative_potential_nearest_root():
    # V < 0 is allowed; the solver returns a solution, not the solution
    g = build_graph([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], [1.0] * 4,
                    boundary=[0, 3])
    op = SchrodingerOperator(g, 3.0, [0.0, -0.3, -0.3, 0.0])
    sol = dirichlet_solve(op, np.array([1.0, 0, 0, 1.0]))
    res = operator_values(op, sol.u)[g.interior_mask]
    assert np.max(np.abs(res)) <= 1e-10


def test_sweep_budget_exhausted(rng):
    g = random_connected_graph(rng, 40, boundary=range(35, 40))
    with pytest.raises(NoConvergence):
        dirichlet_solve(SchrodingerOperator(g, 3.0), rng.normal(size=40),
                        SolveConfig(max_sweeps=1), initial=np.zeros(40))


def test_energy_descends_along_sweeps(rng):
    # with V >= 0, every Gauss-Seidel sweep lowers the Dirichlet energy
    g = random_connected_graph(rng, 30, boundary=range(25, 30))
    V = rng.uniform(0, 1, 30)
    p = 3.0
    op = SchrodingerOperator(g, p, V)
    data = np.zeros(30)
    data[25:] = rng.normal(size=5)

    def total(u):
        grad = np.abs(u[g.edge_x] - u[g.edge_y]) ** p
        return float(np.sum(g.edge_b * grad) + np.sum((g.measure * V * np.abs(u) ** p)[:25]))

    u = np.zeros(30)
    u[25:] = data[25:]
    prev = total(u)
    # huge tolerances make the solver return after exactly one sweep
    cfg = SolveConfig(max_sweeps=1, sweep_order="forward",
                      per_vertex_tol=1e300, residual_tol=1e300)
    for _ in range(6):
        u = dirichlet_solve(op, data, cfg, initial=u).u
        cur = total(u)
        assert cur <= prev + 1e-12
        prev = cur


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("d", [2, 3])
def test_tree_green_exhaustion_matches_closed_form(p, d):
    spec = tree_spec(d, 14)
    res = green_function(spec, p, 0.0, list(range(7, 15)))
    assert res.converged
    closed = green0_profile(spec, p).value
    assert np.allclose(res.limit[:7], closed[:7], rtol=1e-6, atol=0)


def test_realized_exhaustion_small():
    spec = tree_spec(2, 8)
    res = green_function(spec, 2.0, 0.0, [3, 4, 5, 6, 7, 8], realized=True,
                         reference_radius=2)
    g = realize(spec.truncate(3))
    closed = green0_profile(spec, 2.0).value[g.depth]
    assert res.monotone
    assert np.allclose(res.limit[:g.n], closed, rtol=1e-8)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_exhaustion_monotone_in_radius(p):
    res = green_function(tree_spec(3, 14), p, 0.0, list(range(6, 15)))
    assert res.monotone and not res.monotonicity_violations
    roots = [a[0] for a in res.approximants]
    assert all(b >= a for a, b in zip(roots, roots[1:]))


def test_path_exhaustion_diverges():
    with pytest.raises(DivergentExhaustion):
        green_function(path_spec(40), 2.0, 0.0, list(range(10, 41, 5)))


def test_custom_family_callable():
    def family(R):
        return realize(tree_spec(3, R))

    res = green_function(family, 2.0, 0.0, [3, 4, 5, 6],
                         config=SolveConfig(residual_tol=1e-4), reference_radius=1)
    assert res.limit[0] == pytest.approx(green0_profile(tree_spec(3, 6), 2.0).value[0],
                                         rel=1e-3)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("d", [2, 3])
def test_alpha_one_decays_like_beta(p, d):
    g = radial_graph(tree_spec(d, 30))
    G1 = ball_green(g, p, 1.0).u
    ratios = G1[11:26] / G1[10:25]
    assert np.allclose(ratios, tree_beta(p, d), rtol=1e-3)


@pytest.mark.parametrize("d", [2, 3, 4, 7])
def test_beta_quadratic_oracle(d):
    assert tree_beta(2.0, d) == pytest.approx(quadratic_beta(d), abs=1e-12)


@given(st.floats(1.05, 6.0), st.integers(2, 12))
def test_beta_root(p, d):
    beta = tree_beta(p, d)
    assert 0 < beta < 1
    assert abs(tree_beta_residual(beta, p, d)) <= 1e-12


def test_beta_errors():
    with pytest.raises(InvalidDegree):
        tree_beta(2.0, 1)
    with pytest.raises(InvalidExponent):
        tree_beta(1.0, 2)


def test_shooting_short_range():
    spec = tree_spec(2, 30)
    g0, traj, valid = shoot_green(spec, 2.0, 1.0)
    assert valid >= 8
    exact = ball_green(radial_graph(spec), 2.0, 1.0).u
    assert traj[0] == pytest.approx(exact[0], rel=1e-8)
    zero = shoot_green(spec, 2.0, 0.0)[0]
    # the truncation misses the tail beyond R, which is 2^-30
    assert zero == pytest.approx(1.0, rel=1e-8)


def test_shooting_alpha_zero_consistent():
    spec = antitree_spec(2.0, 20)
    G0 = green0_profile(spec, 2.0).value
    traj = spherical_flux_solve(spec, 2.0, 0.0, G0[0])
    assert np.allclose(traj, G0, rtol=1e-12)


def _tree_annulus(d=2, R=6):
    g = realize(tree_spec(d, R))
    region = [x for x in g.interior if 1 <= g.depth[x]]
    return g, region


def test_weak_comparison_beta_plus_eps():
    g, region = _tree_annulus()
    p = 2.0
    beta = tree_beta(p, 2)
    op = SchrodingerOperator(g, p, np.ones(g.n))
    u = beta ** g.depth.astype(float)
    ok, where = weak_comparison_check(op, u, u + 1e-3, region)
    assert ok and where is None
    assert weak_comparison_check(op, u, u, region)[0]


def test_weak_comparison_precondition():
    g, region = _tree_annulus()
    op = SchrodingerOperator(g, 2.0, np.ones(g.n))
    u = tree_beta(2.0, 2) ** g.depth.astype(float)
    v = u.copy()
    v[g.root] -= 0.5
    with pytest.raises(PreconditionViolated):
        weak_comparison_check(op, u, v, region)
    with pytest.raises(PreconditionViolated):
        weak_comparison_check(op, u, -np.ones(g.n), region)


@pytest.mark.parametrize("p", [1.3, 1.7])
def test_newton_polish_matches_plain_relaxation(p):
    rng = np.random.default_rng(21)
    g = random_connected_graph(rng, 18, boundary=[15, 16, 17])
    op = SchrodingerOperator(g, p, rng.uniform(0, 1, 18))
    data = np.zeros(18)
    data[15:] = rng.normal(size=3)
    fast = dirichlet_solve(op, data)
    slow = dirichlet_solve(op, data, SolveConfig(newton_every=0))
    assert fast.sweeps < slow.sweeps
    assert np.allclose(fast.u, slow.u, rtol=0, atol=1e-10)
    with pytest.raises(PreconditionViolated):
        SolveConfig(newton_every=-1)
