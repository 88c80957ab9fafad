"""Landis-type uniqueness criteria evaluated on finite truncations.

Each checker gathers the hypotheses of one uniqueness theorem, turns the
asymptotic ones (``O(·)`` bounds, ``liminf = 0``) into per-radius traces
with a trend verdict, and combines them:

* ``FORCES_ZERO``: every checked condition holds, so ``u`` must vanish.
* ``NOT_TRIGGERED``: some condition demonstrably fails.
* ``INCONCLUSIVE``: the truncation does not decide at least one condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .criticality import (
    ComparisonReport,
    Reference,
    liouville_conditions,
    nonnegativity_probe,
)
from .errors import (
    DegenerateData,
    EmptyAnnulus,
    ExponentOutOfRange,
    InvalidDegree,
    NotHarmonic,
    NotSubcritical,
    NotSubharmonic,
    PotentialBoundViolated,
)
from .graph import WeightedGraph, vertex_function
from .model import (
    ModelGraphSpec,
    boundary_weights,
    green0_profile,
    is_subcritical,
    radial_graph,
    realize,
    tree_spec,
)
from .operators import SchrodingerOperator, classify, operator_values, positive_part
from .solvers import tree_beta
from .trends import (
    MIN_ANNULI,
    SLOPE_TOL,
    flag_from_trend,
    is_bounded,
    jsonable,
    line_fit,
    to_zero_trend,
)

__all__ = [
    "Condition",
    "LandisReport",
    "LiminfEstimate",
    "DecayFit",
    "liminf_estimate",
    "decay_fit",
    "landis_check_general",
    "landis_check_negative_potential",
    "landis_check_model",
    "landis_check_tree",
    "landis_check_recurrent",
    "FORCES_ZERO",
    "NOT_TRIGGERED",
    "INCONCLUSIVE",
]

FORCES_ZERO = "FORCES_ZERO"
NOT_TRIGGERED = "NOT_TRIGGERED"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class Condition:
    name: str
    flag: bool | None
    trend: str = ""
    detail: str = ""
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return jsonable({"flag": self.flag, "trend": self.trend,
                         "detail": self.detail, "trace": self.trace})


@dataclass
class LandisReport:
    regime: str
    conditions: dict
    verdict: str
    potential_bound_ok: bool = True
    positivity_evidence: dict | None = None
    comparison: ComparisonReport | None = None
    reasons: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    negative: "LandisReport | None" = None

    @property
    def decay_ok(self):
        c = self.conditions.get("decay")
        return None if c is None else c.flag

    @property
    def gradient_ok(self):
        c = self.conditions.get("gradient")
        return None if c is None else c.flag

    def to_dict(self) -> dict:
        out = {
            "regime": self.regime,
            "verdict": self.verdict,
            "potential_bound_ok": self.potential_bound_ok,
            "positivity_evidence": self.positivity_evidence,
            "conditions": {k: c.to_dict() for k, c in self.conditions.items()},
            "reasons": self.reasons,
            "provenance": self.provenance,
            "config": self.config,
        }
        if self.comparison is not None:
            out["comparison"] = self.comparison.to_dict(traces=False)
        if self.negative is not None:
            out["negative"] = self.negative.to_dict()
        return jsonable(out)

    def csv_rows(self):
        """``(condition, radius, sup, min, ratio)`` rows for plotting."""
        rows = []
        for name, c in self.conditions.items():
            for t in c.trace:
                rows.append((name, t.get("radius"), t.get("sup"), t.get("min"),
                             t.get("ratio")))
        return rows


def _verdict(conditions: dict, reasons: list) -> str:
    flags = [c.flag for c in conditions.values()]
    for c in conditions.values():
        if c.flag is False:
            reasons.append(f"{c.name} fails: {c.detail}".rstrip(": "))
        elif c.flag is None:
            reasons.append(f"{c.name} undecided: {c.detail}".rstrip(": "))
    if all(f is True for f in flags):
        return FORCES_ZERO
    if any(f is False for f in flags):
        return NOT_TRIGGERED
    return INCONCLUSIVE


# -- annulus statistics --------------------------------------------------------

def _annuli(g: WeightedGraph, annuli) -> list:
    radii = [int(r) for r in annuli]
    for r in radii:
        if not np.any(g.depth == r):
            raise EmptyAnnulus(f"no vertices at radius {r}")
    return radii


@dataclass
class LiminfEstimate:
    radii: list
    minima: list
    trend: str
    surrogate: float
    info: dict

    @property
    def flag(self):
        return flag_from_trend(self.trend)

    def trace(self) -> list:
        return [{"radius": r, "min": m} for r, m in zip(self.radii, self.minima)]


def liminf_estimate(g: WeightedGraph, u, ref, annuli,
                    slope_tol: float = SLOPE_TOL,
                    min_annuli: int = MIN_ANNULI) -> LiminfEstimate:
    """Per-annulus minima of ``u₊ / ref`` and their trend toward zero."""
    u = vertex_function(g, u)
    ref = np.asarray(ref, dtype=float)
    radii = _annuli(g, annuli)
    up = positive_part(u)
    minima = []
    for r in radii:
        sel = g.depth == r
        if np.any(~(ref[sel] > 0)):
            raise DegenerateData(f"reference is not positive at radius {r}")
        minima.append(float(np.min(up[sel] / ref[sel])))
    trend, info = to_zero_trend(radii, minima, slope_tol, min_annuli)
    surrogate = float(min(minima[-3:]))
    return LiminfEstimate(radii, minima, trend, surrogate, info)


@dataclass(frozen=True)
class DecayFit:
    rate_per_step: float
    power_exponent: float
    geometric_goodness: float
    power_goodness: float
    geometric_residual: float
    power_residual: float


def decay_fit(g: WeightedGraph, u, annuli) -> DecayFit:
    """Fit ``log max_{S_r}|u|`` against ``r`` and against ``log r``.

    ``rate_per_step`` is the decay rate ``-slope`` of the geometric fit;
    ``power_exponent`` is the slope of the power-law fit (``r > 0`` only).
    """
    u = vertex_function(g, u)
    radii = _annuli(g, annuli)
    sups = np.array([np.max(np.abs(u[g.depth == r])) for r in radii])
    if np.any(sups <= 0) or len(radii) < 2:
        raise DegenerateData("need at least two annuli with nonzero values")
    r = np.asarray(radii, dtype=float)
    y = np.log(sups)
    geo = line_fit(r, y)
    pos = r > 0
    if pos.sum() >= 2:
        pw = line_fit(np.log(r[pos]), y[pos])
    else:
        pw = None
    return DecayFit(
        rate_per_step=-geo.slope,
        power_exponent=pw.slope if pw else float("nan"),
        geometric_goodness=geo.goodness,
        power_goodness=pw.goodness if pw else float("nan"),
        geometric_residual=geo.residual,
        power_residual=pw.residual if pw else float("nan"),
    )


def _bounded_ratio(g, num, den, radii, name, slope_tol) -> Condition:
    """``num ∈ O(den)`` judged from per-annulus sups of ``num/den``."""
    sups = []
    for r in radii:
        sel = g.depth == r
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(num[sel] == 0, 0.0, num[sel] / den[sel])
        sups.append(float(np.max(ratio)))
    ok = is_bounded(radii, sups, slope_tol)
    return Condition(name, ok, "bounded" if ok else "growing",
                     f"max ratio {max(sups):.3e}",
                     [{"radius": r, "sup": s} for r, s in zip(radii, sups)])


def _liminf_condition(g, num, ref, radii, name, slope_tol) -> Condition:
    est = liminf_estimate(g, num, ref, radii, slope_tol)
    return Condition(name, est.flag, est.trend,
                     f"liminf surrogate {est.surrogate:.3e}", est.trace())


def _edge_gradient_condition(g, up, ref_edge, p_exponent, radii, name,
                             slope_tol, skip_zero_pairs=True) -> Condition:
    """Bound ``(|∇u₊| / ref)^{e}`` along radial edges, per outer radius.

    ``ref_edge(x, y)`` gives the reference gradient for the edge with
    ``|x| > |y|``.  A zero gradient with ``e < 0`` is an infinite ratio
    and is reported edge by edge.
    """
    wanted = set(radii)
    per_radius: dict = {}
    zero_edges = []
    for x, y in zip(g.edge_x.tolist(), g.edge_y.tolist()):
        if g.depth[x] < g.depth[y]:
            x, y = y, x
        r = int(g.depth[x])
        if r == g.depth[y] or r not in wanted:
            continue
        if skip_zero_pairs and up[x] == 0 and up[y] == 0:
            continue
        du = abs(up[x] - up[y])
        ref = ref_edge(x, y)
        if p_exponent == 0:
            val = 1.0
        elif du == 0:
            val = 0.0 if p_exponent > 0 else np.inf
            if p_exponent < 0:
                zero_edges.append((x, y))
        else:
            val = (du / ref) ** p_exponent
        per_radius[r] = max(per_radius.get(r, 0.0), val)
    rs = sorted(per_radius)
    sups = [per_radius[r] for r in rs]
    ok = is_bounded(rs, sups, slope_tol)
    detail = f"max ratio {max(sups, default=0.0):.3e}"
    if zero_edges:
        detail += f"; {len(zero_edges)} zero-gradient edges, first {zero_edges[0]}"
    return Condition(name, ok, "bounded" if ok else "growing", detail,
                     [{"radius": r, "sup": s} for r, s in zip(rs, sups)])


def _positivity(op, n_samples, seed, tol=1e-8):
    probe = nonnegativity_probe(op, n_samples, seed)
    return probe, Condition("positivity", probe.nonnegative(tol),
                            "probed", f"min sampled energy {probe.min_value:.3e}")


def _lemma_u_plus(op, u, tol) -> bool:
    """Pointwise: ``H[u₊] <= tol`` wherever ``u <= 0`` or ``H[u] <= 0``."""
    hu = operator_values(op, u)
    hup = operator_values(op, positive_part(u))
    sel = op.graph.interior_mask & ((u <= 0) | (hu <= 0))
    return bool(np.all(hup[sel] <= tol))


def _comparison_conditions(rep: ComparisonReport) -> dict:
    c = rep.conditions
    return {
        "reference_critical": Condition(
            "reference_critical", c["a_reference_critical"],
            rep.criticality_evidence),
        "subharmonic_positive_part": Condition(
            "subharmonic_positive_part", c["b_subharmonic_positive_part"], "",
            "" if c["b_subharmonic_positive_part"] else "H[u+] > 0 somewhere"),
        "comparison_ratios": Condition(
            "comparison_ratios", c["c_bounded_ratios"],
            "bounded" if c["c_bounded_ratios"] else "growing",
            f"sup1 {rep.sup1:.3e}, sup2 {rep.sup2:.3e}",
            [{"radius": r, "sup": max(a, b), "ratio": a}
             for r, a, b in zip(rep.radii, rep.sup1_by_radius,
                                rep.sup2_by_radius)]),
    }


# -- general and negative-potential regimes ------------------------------------

def _as_reference(reference) -> Reference:
    if isinstance(reference, Reference):
        return reference
    if hasattr(reference, "reference"):
        return reference.reference()
    op, ground, evidence = reference
    return Reference(op, np.asarray(ground, dtype=float), evidence)


def _comparison_regime(regime, H, u, reference, decay_ref, decay_label, annuli,
                       region, check, bound, n_samples, seed, slope_tol, tol,
                       provenance):
    g = H.graph
    u = vertex_function(g, u)
    V = H.potential[g.interior_mask]
    if np.any(V > bound):
        raise PotentialBoundViolated(
            f"potential exceeds {bound} (max {V.max():.6g})")
    if check is not None:
        cls = classify(H, u, region, tol)
        if check == "harmonic" and not cls.is_harmonic:
            raise NotHarmonic(f"H[u] != 0 at vertex {cls.first_violation('harmonic')}")
        if check == "subharmonic" and not cls.is_subharmonic:
            raise NotSubharmonic(
                f"H[u] > 0 at vertex {cls.first_violation('subharmonic')}")
    ref = _as_reference(reference)
    config = {"p": H.p, "annuli": list(annuli), "slope_tol": slope_tol,
              "tol": tol, "n_samples": n_samples, "seed": seed,
              "region": None if region is None else sorted(int(x) for x in region),
              "hypothesis_check": check or "assumed", "potential_bound": bound}
    reasons = []
    if not np.any(u > 0):
        conditions = {"nontrivial_positive_part": Condition(
            "nontrivial_positive_part", False, "", "u+ vanishes identically")}
        return LandisReport(regime, conditions, _verdict(conditions, reasons),
                            True, None, None, reasons, provenance, config)

    probe, positivity = _positivity(H, n_samples, seed)
    rep = liouville_conditions(H, ref.operator, u, ref.ground, ref.evidence,
                               region, slope_tol, tol)
    conditions = {"positivity": positivity}
    conditions.update(_comparison_conditions(rep))
    decay = _liminf_condition(g, u, decay_ref, annuli, "decay", slope_tol)
    decay.detail = f"liminf u+/{decay_label}: " + decay.detail
    conditions["decay"] = decay
    if check is not None and not _lemma_u_plus(H, u, tol):
        reasons.append("u+ fails the pointwise subharmonicity property")
    verdict = _verdict(conditions, reasons)
    return LandisReport(regime, conditions, verdict, True, probe.to_dict(), rep,
                        reasons, provenance, config)


def landis_check_general(H: SchrodingerOperator, u, reference, G1, annuli,
                         region=None, check_harmonic: bool = True,
                         also_negative: bool = False, n_samples: int = 200,
                         seed: int = 0, slope_tol: float = SLOPE_TOL,
                         tol: float = 1e-9,
                         provenance: dict | None = None) -> LandisReport:
    """Harmonic ``u`` of a positive ``H`` with ``V <= 1``, decay against ``G_1``.

    ``reference`` is a :class:`Reference`, a Hardy package, or a tuple
    ``(operator, ground_state, evidence)``.  With ``check_harmonic=False``
    harmonicity is recorded as assumed rather than verified.
    """
    check = "harmonic" if check_harmonic else None
    prov = {"G1": "caller", **(provenance or {})}
    rep = _comparison_regime("general", H, u, reference, G1, "G1", annuli,
                             region, check, 1.0, n_samples, seed, slope_tol,
                             tol, prov)
    if also_negative:
        rep.negative = _comparison_regime(
            "general", H, -np.asarray(u, dtype=float), reference, G1, "G1",
            annuli, region, check, 1.0, n_samples, seed, slope_tol, tol, prov)
    return rep


def landis_check_negative_potential(H: SchrodingerOperator, u, reference, g_ref,
                                    annuli, region=None,
                                    check_subharmonic: bool = True,
                                    n_samples: int = 200, seed: int = 0,
                                    slope_tol: float = SLOPE_TOL,
                                    tol: float = 1e-9,
                                    provenance: dict | None = None) -> LandisReport:
    """Subharmonic ``u`` with ``V <= 0``, decay against a minimal-growth p-harmonic ``g``."""
    check = "subharmonic" if check_subharmonic else None
    prov = {"g": "caller", **(provenance or {})}
    return _comparison_regime("negative_potential", H, u, reference, g_ref, "g",
                              annuli, region, check, 0.0, n_samples, seed,
                              slope_tol, tol, prov)


# -- model graphs and trees ----------------------------------------------------

def _model_graph(spec: ModelGraphSpec, u):
    u = np.asarray(u, dtype=float)
    if u.shape == (spec.R + 1,):
        return radial_graph(spec), u, True
    if u.shape == (spec.n_vertices,):
        return realize(spec), u, False
    raise DegenerateData(
        f"u must have {spec.R + 1} radial or {spec.n_vertices} vertex values")


def _potential(V, g):
    if V is None:
        return np.zeros(g.n)
    V = np.asarray(V, dtype=float)
    if V.ndim == 0:
        return np.full(g.n, float(V))
    if V.shape == (g.radius + 1,) and g.n != g.radius + 1:
        return V[g.depth]
    return vertex_function(g, V)


def _default_annuli(R):
    return list(range(max(1, R // 2), R + 1))


def landis_check_model(spec: ModelGraphSpec, p: float, V, u, annuli=None,
                       n_samples: int = 200, seed: int = 0,
                       slope_tol: float = SLOPE_TOL) -> LandisReport:
    """Decay and gradient conditions on a subcritical model graph with ``V <= 0``.

    ``u`` is either radial (``R + 1`` values, checked on the radial
    quotient) or a vertex function on the realised ball.  The gradient
    reference for an edge ``x ~ y`` with ``|x| > |y|`` is
    ``G_0(z)^{-1/p} (∂_b B_{|y|})^{-1/(p-1)}`` with ``z = x`` for ``p < 2``
    and ``z = y`` otherwise; ``∂_b B_{|y|}`` is the weight of the shell the
    edge belongs to.
    """
    if not is_subcritical(spec, p):
        raise NotSubcritical("the model graph is not subcritical for this p")
    g, u, radial = _model_graph(spec, u)
    Vv = _potential(V, g)
    if np.any(Vv[g.interior_mask] > 0):
        raise PotentialBoundViolated("model regime needs V <= 0")
    G0r = green0_profile(spec, p).value
    G0 = G0r[g.depth]
    phi = G0 ** ((p - 1) / p)
    bw = boundary_weights(spec)
    radii = _default_annuli(spec.R) if annuli is None else _annuli(g, annuli)
    up = positive_part(u)

    conditions = {}
    probe, conditions["positivity"] = _positivity(
        SchrodingerOperator(g, p, Vv), n_samples, seed)
    conditions["growth"] = _bounded_ratio(g, np.abs(u), phi, radii, "growth",
                                          slope_tol)

    def ref_edge(x, y):
        z = x if p < 2 else y
        return G0[z] ** (-1 / p) * bw[g.depth[y]] ** (-1 / (p - 1))

    grad = _edge_gradient_condition(g, up, ref_edge, p - 2, radii, "gradient",
                                    slope_tol)
    conditions["gradient"] = grad
    if p >= 2:
        same = [(x, y) for x, y in zip(g.edge_x.tolist(), g.edge_y.tolist())
                if g.depth[x] == g.depth[y] and up[x] > 0 and up[y] > 0
                and up[x] != up[y]]
        conditions["same_sphere_gradient"] = Condition(
            "same_sphere_gradient", not same, "",
            f"{len(same)} same-sphere edges with nonzero gradient")
    conditions["decay"] = _liminf_condition(g, np.abs(u), G0, radii, "decay",
                                            slope_tol)
    reasons = []
    verdict = _verdict(conditions, reasons)
    config = {"p": p, "spec": spec.to_dict(), "annuli": radii,
              "slope_tol": slope_tol, "n_samples": n_samples, "seed": seed,
              "radial": radial}
    prov = {"G0": "closed form" + ("" if spec.law and spec.law[0] == "geometric"
                                   else " with power-law tail estimate")}
    return LandisReport("model", conditions, verdict, True, probe.to_dict(),
                        None, reasons, prov, config)


def landis_check_tree(p: float, d: int, u, V=None, annuli=None,
                      slope_tol: float = SLOPE_TOL,
                      radial: bool = True) -> LandisReport:
    """Decay and gradient conditions on the ``d``-regular tree with ``V <= 1``.

    ``u`` holds ``R + 1`` radial values, or, with ``radial=False``, values
    on every vertex of the realised ball of radius ``R``.  Every length is a
    valid radial length, so vertex data must be flagged explicitly.  Growth is measured in ``|u|`` and
    gradients in ``u₊``, as in the theorem.  For ``p < 2`` the gradient
    condition is a lower bound and a zero gradient between vertices not
    both outside ``{u > 0}`` violates it.
    """
    if int(d) != d or d < 2:
        raise InvalidDegree(f"d must be an integer >= 2, got {d}")
    d = int(d)
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise DegenerateData("u must be one-dimensional")
    R = u.size - 1 if radial else _tree_radius(d, u.size)
    spec = tree_spec(d, R)
    g, u, radial = _model_graph(spec, u)
    if V is not None:
        Vv = _potential(V, g)
        if np.any(Vv[g.interior_mask] > 1):
            raise PotentialBoundViolated("tree regime needs V <= 1")
    beta = tree_beta(p, d)
    radii = _default_annuli(R) if annuli is None else _annuli(g, annuli)
    up = positive_part(u)
    decay_rate = float(d) ** (-g.depth / p)

    conditions = {"growth": _bounded_ratio(g, np.abs(u), decay_rate, radii,
                                           "growth", slope_tol)}

    # p >= 2: |∇u+| / d^{-|x|/p} bounded; p < 2: the reciprocal bounded.
    sign = 1.0 if p >= 2 else -1.0
    conditions["gradient"] = _edge_gradient_condition(
        g, up, lambda x, y: decay_rate[x], sign, radii, "gradient", slope_tol)
    conditions["decay"] = _liminf_condition(g, np.abs(u), beta ** g.depth, radii,
                                            "decay", slope_tol)
    reasons = []
    verdict = _verdict(conditions, reasons)
    config = {"p": p, "d": d, "R": R, "annuli": radii, "slope_tol": slope_tol,
              "radial": radial}
    prov = {"beta": {"value": beta, "source": "bisection on the tree equation"}}
    return LandisReport("tree", conditions, verdict, True, None, None, reasons,
                        prov, config)


def _tree_radius(d, size):
    # vertex data on the ball of radius R has (d^{R+1} - 1)/(d - 1) entries
    total, R = 1, 0
    while total < size:
        R += 1
        total += d ** R
    if total != size:
        raise DegenerateData(f"{size} values match no ball of the {d}-regular tree")
    return R


def landis_check_recurrent(g, p: float, V, u, compact_set=(), recurrent=None,
                           annuli=None,
                           slope_tol: float = SLOPE_TOL) -> LandisReport:
    """Bounded ``u`` with ``liminf u = 0`` on a recurrent graph, ``p <= 2``.

    ``g`` is a :class:`WeightedGraph` or a :class:`ModelGraphSpec`.  For a
    model spec, recurrence is read off the failure of subcriticality;
    otherwise pass ``recurrent`` explicitly.  ``V`` must be nonpositive
    outside ``compact_set``.
    """
    if p > 2:
        raise ExponentOutOfRange(f"recurrent regime needs p <= 2, got {p}")
    provenance = {}
    if isinstance(g, ModelGraphSpec):
        spec = g
        if recurrent is None:
            recurrent = not is_subcritical(spec, p)
            provenance["recurrence"] = "model graph: Green series diverges"
        g, u, _ = _model_graph(spec, u)
    else:
        provenance["recurrence"] = "caller" if recurrent is not None else "unknown"
    u = vertex_function(g, u)
    Vv = _potential(V, g)
    outside = g.interior_mask.copy()
    outside[list(int(x) for x in compact_set)] = False
    if np.any(Vv[outside] > 0):
        raise PotentialBoundViolated("V must be <= 0 outside the compact set")
    radii = _default_annuli(g.radius) if annuli is None else _annuli(g, annuli)

    conditions = {
        "recurrence": Condition("recurrence", recurrent, "",
                                provenance["recurrence"]),
        "bounded": _bounded_ratio(g, np.abs(u), np.ones(g.n), radii, "bounded",
                                  slope_tol),
    }
    est = liminf_estimate(g, u, np.ones(g.n), radii, slope_tol)
    # liminf of u itself, not of u+: negative minima also witness liminf <= 0
    minima = [float(np.min(u[g.depth == r])) for r in radii]
    if min(minima[-3:]) <= 0:
        trend, flag = "decreasing_to_zero", True
    else:
        trend, flag = est.trend, est.flag
    conditions["decay"] = Condition(
        "decay", flag, trend, f"min over outer annuli {min(minima[-3:]):.3e}",
        [{"radius": r, "min": m} for r, m in zip(radii, minima)])
    reasons = []
    verdict = _verdict(conditions, reasons)
    config = {"p": p, "annuli": radii, "slope_tol": slope_tol,
              "compact_set": sorted(int(x) for x in compact_set)}
    return LandisReport("recurrent", conditions, verdict, True, None, None,
                        reasons, provenance, config)
