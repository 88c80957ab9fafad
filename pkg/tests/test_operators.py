import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plandis.errors import (
    BoundaryVertex,
    InvalidExponent,
    NonpositiveExponent,
    NonpositiveGroundFunction,
    SupportTouchesBoundary,
)
from plandis.graph import build_graph
from plandis.model import antitree_spec, green0_profile, radial_graph, realize, tree_spec
from plandis.operators import (
    SchrodingerOperator,
    abs_part,
    apply_operator,
    apply_p_laplacian,
    classify,
    energy,
    ground_state_excess,
    negative_part,
    operator_values,
    p_laplacian,
    positive_part,
    signed_power,
    simplified_energy,
)
from plandis.solvers import dirichlet_solve, tree_beta

from conftest import random_connected_graph

finite = st.floats(-1e6, 1e6, allow_nan=False)


@pytest.mark.parametrize("a,r,expected", [(-2, 3, -8), (0, 0.5, 0), (3, 1, 3)])
def test_signed_power_examples(a, r, expected):
    assert signed_power(a, r) == expected


def test_signed_power_rejects_nonpositive_exponent():
    with pytest.raises(NonpositiveExponent):
        signed_power(1.0, 0.0)


@given(finite, st.floats(0.05, 5))
def test_signed_power_odd(a, r):
    assert signed_power(-a, r) == -signed_power(a, r)


def test_p_laplacian_hand_values(path3):
    f = [0.0, 1.0, 0.0]
    assert apply_p_laplacian(path3, 2, f, 1) == 2.0
    assert apply_p_laplacian(path3, 3, f, 1) == 2.0
    assert apply_p_laplacian(path3, 3, f, 0) == -1.0


@given(st.integers(2, 30), st.integers(0, 2 ** 31 - 1), st.floats(1.1, 4),
       st.floats(-5, 5))
def test_constants_are_p_harmonic(n, seed, p, c):
    g = random_connected_graph(np.random.default_rng(seed), n)
    assert np.allclose(p_laplacian(g, p, np.full(n, c)), 0.0)


def test_boundary_vertex_rejected():
    g = build_graph([(0, 1, 1.0)], [1.0, 1.0], boundary=[1])
    with pytest.raises(BoundaryVertex):
        apply_p_laplacian(g, 2, [0.0, 1.0], 1)
    op = SchrodingerOperator(g, 2.0)
    with pytest.raises(BoundaryVertex):
        classify(op, [0.0, 1.0], region=[1])


def test_p_must_exceed_one(path3):
    with pytest.raises(InvalidExponent):
        SchrodingerOperator(path3, 1.0)


def test_operator_reduces_to_laplacian(rng):
    g = random_connected_graph(rng, 20)
    f = rng.normal(size=20)
    op = SchrodingerOperator(g, 2.5)
    for x in range(g.n):
        assert apply_operator(op, f, x) == pytest.approx(apply_p_laplacian(g, 2.5, f, x))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("d", [2, 3])
def test_beta_power_harmonic_off_root(p, d):
    g = realize(tree_spec(d, 5))
    beta = tree_beta(p, d)
    op = SchrodingerOperator(g, p, np.ones(g.n))
    f = beta ** g.depth.astype(float)
    vals = operator_values(op, f)
    off_root = g.interior_mask.copy()
    off_root[g.root] = False
    assert np.max(np.abs(vals[off_root])) <= 1e-10
    region = np.flatnonzero(off_root)
    assert classify(op, f, region).is_harmonic


def test_constant_with_potential(rng):
    g = random_connected_graph(rng, 15)
    op = SchrodingerOperator(g, 3.0, np.full(15, 0.7))
    assert np.allclose(operator_values(op, np.ones(15)), 0.7)
    assert classify(SchrodingerOperator(g, 3.0), np.ones(15)).is_harmonic


def test_energy_single_edge():
    g = build_graph([(0, 1, 1.0)], [1.0, 1.0], boundary=[1])
    assert energy(SchrodingerOperator(g, 2.0), [1.0, 0.0]) == 1.0
    assert energy(SchrodingerOperator(g, 2.0), [0.0, 0.0]) == 0.0
    with pytest.raises(SupportTouchesBoundary):
        energy(SchrodingerOperator(g, 2.0), [1.0, 1.0])


@given(st.integers(2, 30), st.integers(0, 2 ** 31 - 1), st.floats(1.1, 4),
       st.floats(-3, 3))
def test_energy_nonnegative_and_homogeneous(n, seed, p, t):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, n)
    op = SchrodingerOperator(g, p)
    phi = rng.uniform(-1, 1, n)
    q = energy(op, phi)
    assert q >= 0
    assert energy(op, t * phi) == pytest.approx(abs(t) ** p * q, rel=1e-9, abs=1e-12)


def test_simplified_energy_examples():
    g = build_graph([(0, 1, 1.0)], [1.0, 1.0], boundary=[1])
    assert simplified_energy(g, 2, [1.0, 1.0], [1.0, 0.0]) == 1.0
    assert simplified_energy(g, 1.5, [1.0, 2.0], [0.0, 0.0]) == 0.0
    with pytest.raises(NonpositiveGroundFunction):
        simplified_energy(g, 2, [1.0, 0.0], [1.0, 0.0])


def test_simplified_energy_zero_times_infinity():
    # constant u and a gradient-free edge give an empty bracket at p < 2
    g = build_graph([(0, 1, 1.0), (1, 2, 1.0)], [1.0] * 3, boundary=[2])
    assert simplified_energy(g, 1.5, [1.0, 1.0, 1.0], [1.0, 1.0, 0.0]) == 1.0


def test_ground_state_transform_at_p2(rng):
    g = random_connected_graph(rng, 25, boundary=[24])
    u = rng.uniform(0.5, 2.0, 25)
    op = SchrodingerOperator(g, 2.0, rng.uniform(-1, 1, 25))
    for _ in range(20):
        phi = rng.uniform(-1, 1, 25)
        phi[24] = 0.0
        e = simplified_energy(g, 2.0, u, phi)
        assert ground_state_excess(op, u, phi) == pytest.approx(e, rel=1e-10)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=20))
def test_positive_negative_parts(values):
    f = np.asarray(values)
    assert np.array_equal(positive_part(f) - negative_part(f), f)
    assert np.array_equal(positive_part(f) + negative_part(f), abs_part(f))


def test_parts_example():
    f = np.array([1.0, -2.0, 0.0])
    assert positive_part(f).tolist() == [1, 0, 0]
    assert negative_part(f).tolist() == [0, 2, 0]
    assert np.array_equal(positive_part(np.abs(f)), np.abs(f))


@given(st.integers(2, 40), st.integers(0, 2 ** 31 - 1), st.floats(1.1, 4))
def test_divergence_theorem_closed_graph(n, seed, p):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, n)
    f = rng.normal(size=n)
    lap = p_laplacian(g, p, f)
    assert abs(np.sum(g.measure * lap)) <= 1e-9 * max(1.0, np.sum(np.abs(g.measure * lap)))


@given(st.integers(2, 50), st.integers(0, 2 ** 31 - 1),
       st.sampled_from([1.3, 2.0, 2.7]))
def test_positive_part_subharmonic_pointwise(n, seed, p):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, n)
    op = SchrodingerOperator(g, p, rng.uniform(-2, 2, n))
    u = rng.normal(size=n)
    hu = operator_values(op, u)
    hup = operator_values(op, positive_part(u))
    sel = (u <= 0) | (hu <= 0)
    assert np.all(hup[sel] <= 1e-10)


def test_abs_of_harmonic_is_subharmonic(rng):
    g = random_connected_graph(rng, 30, boundary=[25, 26, 27, 28, 29])
    op = SchrodingerOperator(g, 2.7, rng.uniform(0, 1, 30))
    data = np.zeros(30)
    data[25:] = rng.normal(size=5)
    u = dirichlet_solve(op, data).u
    habs = operator_values(op, np.abs(u))
    assert np.all(habs[g.interior_mask] <= 1e-8)


def test_green_zero_superharmonic_at_root():
    spec = antitree_spec(2.0, 12)
    g = radial_graph(spec)
    G0 = green0_profile(spec, 2.0).value
    cls = classify(SchrodingerOperator(g, 2.0), G0)
    assert cls.values[0] == pytest.approx(1.0, rel=1e-12)
    assert cls.aggregate == "superharmonic"
    assert all(cls.tags[x] == "harmonic" for x in cls.values if x != 0)
