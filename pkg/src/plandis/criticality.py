"""Hardy weights, positivity probes, null sequences and the Liouville comparison check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MeasureMismatch,
    NonpositiveGreen,
    NonpositiveReference,
    SupportTouchesBoundary,
)
from .graph import WeightedGraph, vertex_function
from .operators import (
    SchrodingerOperator,
    classify,
    energy,
    operator_values,
    p_laplacian,
    positive_part,
)
from .trends import SLOPE_TOL, is_bounded, jsonable, line_fit

__all__ = [
    "HardyPackage",
    "Reference",
    "ProbeResult",
    "NullSequenceTrace",
    "ComparisonReport",
    "hardy_weight",
    "nonnegativity_probe",
    "null_sequence_experiment",
    "radial_cutoff",
    "liouville_conditions",
    "EVIDENCE_LEVELS",
]

EVIDENCE_LEVELS = ("confirmed-by-construction", "probed", "unknown")


@dataclass(frozen=True)
class Reference:
    """A reference operator with positive ground state for comparison."""

    operator: SchrodingerOperator
    ground: np.ndarray
    evidence: str = "unknown"

    def __post_init__(self):
        if self.evidence not in EVIDENCE_LEVELS:
            raise ValueError(f"evidence must be one of {EVIDENCE_LEVELS}")


@dataclass(frozen=True, eq=False)
class HardyPackage:
    """``Φ = G_0^{(p-1)/p}`` and ``W = Δ_p Φ / Φ^{p-1}`` on the interior.

    ``W`` is set to 0 on boundary vertices, where it is never used.
    """

    graph: WeightedGraph
    p: float
    phi: np.ndarray
    weight: np.ndarray
    residual: float

    def operator(self) -> SchrodingerOperator:
        """``Δ_p - W``, critical with ground state ``Φ``."""
        return SchrodingerOperator(self.graph, self.p, -self.weight)

    def reference(self) -> Reference:
        return Reference(self.operator(), self.phi, "confirmed-by-construction")


def hardy_weight(g: WeightedGraph, p: float, G0) -> HardyPackage:
    G0 = vertex_function(g, G0)
    if np.any(G0 <= 0):
        raise NonpositiveGreen("G0 must be strictly positive")
    phi = G0 ** ((p - 1.0) / p)
    lap = p_laplacian(g, p, phi)
    W = np.where(g.interior_mask, lap / phi ** (p - 1.0), 0.0)
    package = HardyPackage(g, p, phi, W, 0.0)
    res = operator_values(package.operator(), phi)[g.interior_mask]
    residual = float(np.max(np.abs(res))) if res.size else 0.0
    return HardyPackage(g, p, phi, W, residual)


@dataclass(frozen=True)
class ProbeResult:
    min_value: float
    argmin: str
    n_samples: int
    seed: int

    def nonnegative(self, tol: float = 1e-8) -> bool:
        return self.min_value >= -tol

    def to_dict(self) -> dict:
        return jsonable(self.__dict__)


def nonnegativity_probe(op: SchrodingerOperator, n_samples: int = 500,
                        seed: int = 0, support=None) -> ProbeResult:
    """Minimum of ``Q`` over random test functions and all vertex indicators.

    Test functions have i.i.d. uniform(-1, 1) entries on ``support``
    (default: the interior).  A negative minimum certifies that ``Q`` is
    not nonnegative; a nonnegative one is evidence only.
    """
    g = op.graph
    if support is None:
        support = g.interior
    support = np.asarray(sorted(int(x) for x in support), dtype=np.int64)
    rng = np.random.default_rng(seed)
    best, where = np.inf, "none"
    for x in support:
        phi = np.zeros(g.n)
        phi[x] = 1.0
        val = energy(op, phi)
        if val < best:
            best, where = val, f"indicator:{int(x)}"
    for i in range(n_samples):
        phi = np.zeros(g.n)
        phi[support] = rng.uniform(-1.0, 1.0, size=support.size)
        val = energy(op, phi)
        if val < best:
            best, where = val, f"sample:{i}"
    return ProbeResult(float(best), where, n_samples, seed)


def radial_cutoff(g: WeightedGraph, n: int) -> np.ndarray:
    """``ψ_n(x) = min(1, max(0, (2n - |x|)/n))``."""
    return np.clip((2.0 * n - g.depth) / n, 0.0, 1.0)


@dataclass
class NullSequenceTrace:
    ns: list
    energies: list
    phi_at_root: list
    nonincreasing: bool
    decay_exponent: float

    def to_dict(self) -> dict:
        return jsonable(self.__dict__)


def null_sequence_experiment(op: SchrodingerOperator, ground, ns,
                             rtol: float = 1e-12) -> NullSequenceTrace:
    """Energies of ``Φ ψ_n`` for the radial cutoffs ``ψ_n``.

    ``decay_exponent`` is the log-log slope of ``Q`` against ``n``.
    """
    g = op.graph
    ground = vertex_function(g, ground)
    energies, at_root = [], []
    for n in ns:
        phi_n = ground * radial_cutoff(g, n)
        if any(phi_n[v] != 0 for v in g.boundary):
            raise SupportTouchesBoundary(
                f"cutoff n={n} reaches the boundary at radius {g.radius}")
        energies.append(energy(op, phi_n))
        at_root.append(float(phi_n[g.root]))
    e = np.asarray(energies)
    nonincreasing = bool(np.all(np.diff(e) <= rtol * np.abs(e[:-1]) + 1e-300))
    pos = e > 0
    exponent = (line_fit(np.log(np.asarray(ns, dtype=float)[pos]),
                         np.log(e[pos])).slope if pos.sum() >= 2 else float("nan"))
    return NullSequenceTrace(list(ns), energies, at_root, nonincreasing, exponent)


@dataclass
class ComparisonReport:
    """Edgewise comparison ratios on ``{u > 0} × {u > 0}``."""

    p: float
    edges: list
    ratio1: list
    ratio2: list
    radii: list
    sup1_by_radius: list
    sup2_by_radius: list
    sup1: float
    sup2: float
    bounded1: bool
    bounded2: bool
    criticality_evidence: str
    subharmonic_positive_part: bool
    positive_part_nonzero: bool
    support_mismatch: dict = field(default_factory=dict)

    @property
    def conditions(self) -> dict:
        a = {"confirmed-by-construction": True}.get(self.criticality_evidence)
        return {
            "a_reference_critical": a,
            "b_subharmonic_positive_part": (self.positive_part_nonzero
                                            and self.subharmonic_positive_part),
            "c_bounded_ratios": self.bounded1 and self.bounded2,
        }

    @property
    def satisfied(self):
        flags = list(self.conditions.values())
        if all(f is True for f in flags):
            return True
        if any(f is False for f in flags):
            return False
        return None

    def to_dict(self, traces: bool = True) -> dict:
        out = {
            "p": self.p,
            "sup1": self.sup1,
            "sup2": self.sup2,
            "bounded1": self.bounded1,
            "bounded2": self.bounded2,
            "criticality_evidence": self.criticality_evidence,
            "conditions": self.conditions,
            "support_mismatch": self.support_mismatch,
            "per_radius": [{"radius": r, "sup1": s1, "sup2": s2}
                           for r, s1, s2 in zip(self.radii, self.sup1_by_radius,
                                                self.sup2_by_radius)],
        }
        if traces:
            out["edges"] = [{"x": x, "y": y, "ratio1": r1, "ratio2": r2}
                            for (x, y), r1, r2 in zip(self.edges, self.ratio1,
                                                      self.ratio2)]
        return jsonable(out)


def _ratio2(p, b, bt, du, dv):
    """``b^{1-2/p}|∇u+|^{p-2} / (b̃^{1-2/p}|∇v|^{p-2})`` with the 0·∞ policies."""
    if p == 2:
        return 1.0
    e = 1.0 - 2.0 / p
    if p < 2:
        if dv == 0:
            return 0.0
        if du == 0:
            return np.inf
    else:
        if du == 0:
            return 0.0
        if dv == 0:
            return np.inf
    return (b / bt) ** e * (du / dv) ** (p - 2.0)


def liouville_conditions(H: SchrodingerOperator, Ht: SchrodingerOperator, u, v,
                         evidence: str = "unknown", region=None,
                         slope_tol: float = SLOPE_TOL,
                         tol: float = 1e-9) -> ComparisonReport:
    """Evaluate the hypotheses of the Liouville comparison principle.

    Pairs joined in ``b`` but not in ``b̃`` get ratio ∞; pairs joined only
    in ``b̃`` contribute nothing to the energy of ``H`` and get ratio 0.
    Both cases are counted in ``support_mismatch``.  Subharmonicity of
    ``u₊`` is checked on ``region`` (default: the interior).
    """
    g, gt = H.graph, Ht.graph
    if g.n != gt.n or not np.array_equal(g.measure, gt.measure):
        raise MeasureMismatch("both operators must live over the same (X, m)")
    if H.p != Ht.p:
        raise MeasureMismatch("both operators must share p")
    p = H.p
    u = vertex_function(g, u)
    v = vertex_function(g, v)
    if np.any(v <= 0):
        raise NonpositiveReference("reference ground state must be strictly positive")
    up = positive_part(u)

    pairs = {}
    for x, y, b in zip(g.edge_x.tolist(), g.edge_y.tolist(), g.edge_b.tolist()):
        pairs[(x, y)] = [b, 0.0]
    for x, y, b in zip(gt.edge_x.tolist(), gt.edge_y.tolist(), gt.edge_b.tolist()):
        pairs.setdefault((x, y), [0.0, 0.0])[1] = b

    edges, r1s, r2s, rad = [], [], [], []
    only_b = only_bt = 0
    for (x, y) in sorted(pairs):
        if not (u[x] > 0 and u[y] > 0):
            continue
        b, bt = pairs[(x, y)]
        if b == 0:
            only_bt += 1
            r1, r2 = 0.0, 0.0
        elif bt == 0:
            only_b += 1
            r1, r2 = np.inf, np.inf
        else:
            r1 = (b / bt) ** (2.0 / p) * (up[x] * up[y]) / (v[x] * v[y])
            r2 = _ratio2(p, b, bt, abs(up[x] - up[y]), abs(v[x] - v[y]))
        edges.append((x, y))
        r1s.append(float(r1))
        r2s.append(float(r2))
        rad.append(int(max(g.depth[x], g.depth[y])))

    radii = sorted(set(rad))
    sup1_r, sup2_r = [], []
    rad_arr = np.asarray(rad)
    for r in radii:
        sel = rad_arr == r
        sup1_r.append(float(np.max(np.asarray(r1s)[sel])))
        sup2_r.append(float(np.max(np.asarray(r2s)[sel])))

    cls = classify(H, up, region, tol)
    return ComparisonReport(
        p=p, edges=edges, ratio1=r1s, ratio2=r2s, radii=radii,
        sup1_by_radius=sup1_r, sup2_by_radius=sup2_r,
        sup1=max(r1s, default=0.0), sup2=max(r2s, default=0.0),
        bounded1=is_bounded(radii, sup1_r, slope_tol),
        bounded2=is_bounded(radii, sup2_r, slope_tol),
        criticality_evidence=evidence,
        subharmonic_positive_part=cls.is_subharmonic,
        positive_part_nonzero=bool(np.any(up > 0)),
        support_mismatch={"only_in_b": only_b, "only_in_b_tilde": only_bt},
    )
