import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plandis.criticality import hardy_weight
from plandis.errors import (
    DegenerateData,
    EmptyAnnulus,
    ExponentOutOfRange,
    InvalidDegree,
    NotHarmonic,
    NotSubcritical,
    NotSubharmonic,
    PotentialBoundViolated,
)
from plandis.landis import (
    FORCES_ZERO,
    INCONCLUSIVE,
    NOT_TRIGGERED,
    decay_fit,
    landis_check_general,
    landis_check_model,
    landis_check_negative_potential,
    landis_check_recurrent,
    landis_check_tree,
    liminf_estimate,
)
from plandis.model import (
    antitree_spec,
    green0_profile,
    lift,
    path_spec,
    radial_graph,
    realize,
    tree_spec,
)
from plandis.operators import SchrodingerOperator
from plandis.solvers import ball_green, tree_beta

RANK = {NOT_TRIGGERED: 0, INCONCLUSIVE: 1, FORCES_ZERO: 2}


def tree_setup(p, d, R=30):
    spec = tree_spec(d, R)
    g = radial_graph(spec)
    pkg = hardy_weight(g, p, green0_profile(spec, p).value)
    H = SchrodingerOperator(g, p, np.ones(g.n))
    G1 = ball_green(g, p, 1.0).u
    region = [x for x in g.interior if x != g.root]
    return g, pkg, H, G1, region


# -- annulus statistics ------------------------------------------------------

def test_liminf_of_reference_itself():
    g = radial_graph(tree_spec(2, 20))
    ref = 0.3 ** g.depth.astype(float)
    est = liminf_estimate(g, ref, ref, range(5, 20))
    assert np.allclose(est.minima, 1.0)
    assert est.trend == "bounded_away_from_zero"


@pytest.mark.parametrize("d", [2, 3])
def test_liminf_fast_decay_on_tree(d):
    g = radial_graph(tree_spec(d, 30))
    beta = tree_beta(2.0, d)
    r = g.depth.astype(float)
    est = liminf_estimate(g, float(d) ** (-2 * r), beta ** r, range(10, 30))
    assert est.trend == "decreasing_to_zero"
    assert np.allclose(est.minima, (d ** -2.0 / beta) ** np.arange(10, 30), rtol=1e-12)


def test_liminf_with_zero_per_annulus():
    g = realize(tree_spec(2, 8))
    u = np.ones(g.n)
    for r in range(g.radius + 1):
        u[g.sphere(r)[0]] = 0.0
    est = liminf_estimate(g, u, np.ones(g.n), range(0, 9))
    assert est.minima == [0.0] * 9
    assert est.trend == "decreasing_to_zero"


def test_empty_annulus():
    g = radial_graph(tree_spec(2, 5))
    with pytest.raises(EmptyAnnulus):
        liminf_estimate(g, np.ones(6), np.ones(6), [3, 9])


def test_decay_fit_examples():
    g = radial_graph(path_spec(40))
    r = g.depth.astype(float)
    fit = decay_fit(g, 2.0 ** -r, range(1, 41))
    assert fit.rate_per_step == pytest.approx(math.log(2))
    assert fit.geometric_goodness == pytest.approx(1.0)
    fit = decay_fit(g, np.where(r > 0, 1 / np.maximum(r, 1), 1.0), range(1, 41))
    assert fit.power_exponent == pytest.approx(-1.0)
    fit = decay_fit(g, (-1.0) ** r * 3.0 ** -r, range(0, 41))
    assert fit.rate_per_step == pytest.approx(math.log(3))
    with pytest.raises(DegenerateData):
        decay_fit(g, np.zeros(41), range(1, 41))


# -- general and negative-potential regimes ---------------------------------

def test_general_beta_not_triggered():
    g, pkg, H, G1, region = tree_setup(2.0, 2)
    u = tree_beta(2.0, 2) ** g.depth.astype(float)
    rep = landis_check_general(H, u, pkg, G1, range(15, 30), region)
    assert rep.verdict == NOT_TRIGGERED
    assert rep.conditions["decay"].flag is False
    assert rep.conditions["comparison_ratios"].flag is True
    assert rep.conditions["reference_critical"].flag is True
    json.dumps(rep.to_dict())


def test_general_nonpositive_u():
    g, pkg, H, G1, region = tree_setup(2.0, 2, R=12)
    u = -tree_beta(2.0, 2) ** g.depth.astype(float)
    rep = landis_check_general(H, u, pkg, G1, range(4, 12), region)
    assert rep.verdict == NOT_TRIGGERED
    assert any("u+ vanishes" in r for r in rep.reasons)


def test_general_potential_bound_and_harmonicity():
    g, pkg, H, G1, region = tree_setup(2.0, 2, R=12)
    V = np.ones(g.n)
    V[3] = 1.0 + 1e-6
    u = tree_beta(2.0, 2) ** g.depth.astype(float)
    with pytest.raises(PotentialBoundViolated):
        landis_check_general(H.with_potential(V), u, pkg, G1, range(4, 12), region)
    with pytest.raises(NotHarmonic):
        landis_check_general(H, 2.0 ** -g.depth, pkg, G1, range(4, 12), region)
    rep = landis_check_general(H, 2.0 ** -g.depth, pkg, G1, range(4, 12), region,
                               check_harmonic=False)
    assert rep.config["hypothesis_check"] == "assumed"


def test_general_also_negative_kept_separate():
    g, pkg, H, G1, region = tree_setup(2.0, 2, R=20)
    u = tree_beta(2.0, 2) ** g.depth.astype(float)
    rep = landis_check_general(H, u, pkg, G1, range(10, 20), region, also_negative=True)
    assert rep.negative is not None
    assert rep.negative.verdict == NOT_TRIGGERED
    assert rep.verdict == NOT_TRIGGERED
    assert "negative" in rep.to_dict()


def negative_setup(p=2.0, gamma=2.0, R=40):
    spec = antitree_spec(gamma, R)
    g = radial_graph(spec)
    G0 = green0_profile(spec, p).value
    pkg = hardy_weight(g, p, G0)
    region = [x for x in g.interior if x != g.root]
    return g, G0, pkg, SchrodingerOperator(g, p), region


def test_negative_faster_decay_satisfies_decay():
    g, G0, pkg, H, region = negative_setup()
    rep = landis_check_negative_potential(H, G0 ** 2, pkg, G0, range(20, 40), region)
    assert rep.conditions["decay"].flag is True


def test_negative_u_equals_g():
    g, G0, pkg, H, region = negative_setup()
    rep = landis_check_negative_potential(H, G0, pkg, G0, range(20, 40), region)
    assert rep.verdict == NOT_TRIGGERED
    assert rep.conditions["decay"].flag is False


def test_negative_errors():
    g, G0, pkg, H, region = negative_setup()
    with pytest.raises(PotentialBoundViolated):
        landis_check_negative_potential(H.with_potential(np.full(g.n, 0.5)), G0 ** 2,
                                        pkg, G0, range(20, 40), region)
    with pytest.raises(NotSubharmonic):
        landis_check_negative_potential(H, -(G0 ** 2), pkg, G0, range(20, 40), region)


# -- model graphs and trees --------------------------------------------------

@pytest.mark.parametrize("p,gamma", [(2.0, 1.0), (2.0, 2.0), (3.0, 2.0)])
def test_model_antitree_forces_zero(p, gamma):
    spec = antitree_spec(gamma, 60)
    G0 = green0_profile(spec, p).value
    rep = landis_check_model(spec, p, 0.0, G0 ** 2, n_samples=50)
    assert rep.verdict == FORCES_ZERO


def test_model_green_itself_not_triggered():
    spec = antitree_spec(2.0, 60)
    G0 = green0_profile(spec, 2.0).value
    rep = landis_check_model(spec, 2.0, 0.0, G0, n_samples=50)
    assert rep.conditions["growth"].flag is True
    assert rep.conditions["decay"].flag is False
    assert rep.verdict == NOT_TRIGGERED


def test_model_realized_matches_radial():
    spec = antitree_spec(2.0, 20)
    G0 = green0_profile(spec, 2.0).value
    g = realize(spec)
    radial = landis_check_model(spec, 2.0, 0.0, G0 ** 2, n_samples=20)
    full = landis_check_model(spec, 2.0, 0.0, lift(g, G0 ** 2), n_samples=20)
    assert radial.verdict == full.verdict
    assert {k: c.flag for k, c in radial.conditions.items()} == \
        {k: c.flag for k, c in full.conditions.items()}


def test_model_errors():
    with pytest.raises(NotSubcritical):
        landis_check_model(antitree_spec(0.4, 20), 2.0, 0.0, np.ones(21))
    spec = antitree_spec(2.0, 20)
    with pytest.raises(PotentialBoundViolated):
        landis_check_model(spec, 2.0, 0.1, np.ones(21))


def test_model_same_sphere_edges_flagged():
    spec = antitree_spec(2.0, 12)
    g = realize(spec)
    G0 = green0_profile(spec, 2.0).value
    u = lift(g, G0 ** 2)
    # the radial data never differs within a sphere, so the check passes
    rep = landis_check_model(spec, 2.0, 0.0, u, n_samples=10)
    assert rep.conditions["same_sphere_gradient"].flag is True


@pytest.mark.parametrize("p", [2.0, 3.0])
@pytest.mark.parametrize("d", [2, 3])
def test_tree_forces_zero(p, d):
    r = np.arange(31.0)
    assert landis_check_tree(p, d, float(d) ** (-2 * r)).verdict == FORCES_ZERO
    rep = landis_check_tree(p, d, tree_beta(p, d) ** r)
    assert rep.verdict == NOT_TRIGGERED
    assert np.allclose([t["min"] for t in rep.conditions["decay"].trace], 1.0)


def test_tree_p_below_two_reports_gradient_lower_bound():
    r = np.arange(31.0)
    rep = landis_check_tree(1.5, 2, 4.0 ** -r)
    # the gradient of d^{-2|x|} decays faster than d^{-|x|/p}
    assert rep.conditions["gradient"].flag is False


def test_tree_zero_gradient_edges_reported():
    r = np.arange(31.0)
    u = 2.0 ** (-2 * r)
    u[20:] = u[20]
    rep = landis_check_tree(1.5, 2, u)
    assert "zero-gradient edges" in rep.conditions["gradient"].detail


def test_tree_realized_input():
    d, R = 2, 9
    g = realize(tree_spec(d, R))
    u = float(d) ** (-2.0 * g.depth)
    full = landis_check_tree(2.0, d, u, annuli=range(1, 10), radial=False)
    radial = landis_check_tree(2.0, d, float(d) ** (-2.0 * np.arange(R + 1)),
                               annuli=range(1, 10))
    assert full.verdict == radial.verdict == FORCES_ZERO


def test_tree_errors():
    with pytest.raises(DegenerateData):
        landis_check_tree(2.0, 2, np.ones(10), radial=False)
    with pytest.raises(InvalidDegree):
        landis_check_tree(2.0, 1, np.ones(10))
    with pytest.raises(PotentialBoundViolated):
        landis_check_tree(2.0, 2, np.ones(10), V=2.0)


@pytest.mark.parametrize("p,d", [(2.0, 2), (3.0, 3)])
def test_regime_consistency_on_trees(p, d):
    g, pkg, H, G1, region = tree_setup(p, d)
    r = g.depth.astype(float)
    u = float(d) ** (-2 * r)
    general = landis_check_general(H, u, pkg, G1, range(15, 30), region,
                                   check_harmonic=False)
    assert general.verdict == landis_check_tree(p, d, u).verdict


@given(st.floats(0.01, 100))
def test_scale_invariance(t):
    r = np.arange(31.0)
    for u in (4.0 ** -r, tree_beta(2.0, 2) ** r):
        assert landis_check_tree(2.0, 2, t * u).verdict == landis_check_tree(2.0, 2, u).verdict


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_verdict_monotone_in_decay(p):
    r = np.arange(31.0)
    beta = tree_beta(p, 2)
    ranks = [RANK[landis_check_tree(p, 2, 4.0 ** -r * beta ** (-eps * r)).verdict]
             for eps in np.linspace(0, 1.2, 13)]
    assert all(b <= a for a, b in zip(ranks, ranks[1:]))
    assert ranks[0] == 2 and ranks[-1] == 0


def test_harmonic_classification_implies_positive_part_property():
    g, pkg, H, G1, region = tree_setup(3.0, 2, R=20)
    u = tree_beta(3.0, 2) ** g.depth.astype(float) - 0.01
    rep = landis_check_general(H, u, pkg, G1, range(10, 20), region,
                               check_harmonic=False)
    assert not any("pointwise" in r for r in rep.reasons)


# -- recurrent regime ----------------------------------------------------------

@pytest.mark.parametrize("p", [1.5, 2.0])
def test_recurrent_path(p):
    spec = path_spec(40)
    r = np.arange(41.0)
    rep = landis_check_recurrent(spec, p, 0.0, 1 / (1 + r), compact_set=[0])
    assert rep.verdict == FORCES_ZERO
    assert rep.conditions["recurrence"].flag is True
    assert landis_check_recurrent(spec, p, 0.0, np.ones(41)).verdict == NOT_TRIGGERED


def test_recurrent_errors_and_caller_evidence():
    spec = path_spec(20)
    with pytest.raises(ExponentOutOfRange):
        landis_check_recurrent(spec, 3.0, 0.0, np.ones(21))
    V = np.zeros(21)
    V[5] = 1.0
    with pytest.raises(PotentialBoundViolated):
        landis_check_recurrent(spec, 2.0, V, np.ones(21), compact_set=[0])
    rep = landis_check_recurrent(spec, 2.0, V, 1 / (1 + np.arange(21.0)),
                                 compact_set=[5])
    assert rep.verdict == FORCES_ZERO
    g = radial_graph(spec)
    rep = landis_check_recurrent(g, 2.0, 0.0, 1 / (1 + np.arange(21.0)))
    assert rep.verdict == INCONCLUSIVE
    assert landis_check_recurrent(g, 2.0, 0.0, 1 / (1 + np.arange(21.0)),
                                  recurrent=True).verdict == FORCES_ZERO


def test_report_csv_rows():
    r = np.arange(31.0)
    rep = landis_check_tree(2.0, 2, 4.0 ** -r)
    rows = rep.csv_rows()
    assert {row[0] for row in rows} == {"growth", "gradient", "decay"}
    assert all(len(row) == 5 for row in rows)


def test_recurrent_oscillating_minima_inconclusive():
    # one vertex per sphere: the minima are u itself and scatter in log scale
    r = np.arange(61.0)
    rep = landis_check_recurrent(path_spec(60), 2.0, 0.0, (1 + np.cos(r)) / (1 + r),
                                 compact_set=[0])
    assert rep.conditions["decay"].trend == "inconclusive"
    assert rep.verdict == INCONCLUSIVE
