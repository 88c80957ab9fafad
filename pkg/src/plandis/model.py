"""Spherically symmetric (model) graphs.

A :class:`ModelGraphSpec` fixes sphere sizes ``#S_r``, a per-edge weight
between consecutive spheres and a per-vertex measure on each sphere.  It
can be realised as a concrete :class:`~plandis.graph.WeightedGraph`, or
collapsed to its *radial quotient*: the weighted half-line with vertex
``r`` of measure ``m_r #S_r`` and edge weight ``∂_b B_r`` between ``r``
and ``r+1``.  For spherically symmetric functions the p-Laplacian, the
potential term and the energy on the quotient coincide with those on the
realised graph, which is what makes radius 30 trees tractable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidSpec,
    NonpositiveInitial,
    RadiusOutOfRange,
    SeriesDivergent,
    UnknownAsymptotics,
)
from .graph import WeightedGraph, build_graph
from .operators import signed_power

__all__ = [
    "ModelGraphSpec",
    "tree_spec",
    "antitree_spec",
    "path_spec",
    "spec_from_dict",
    "realize",
    "radial_graph",
    "lift",
    "spherical_values",
    "boundary_weight",
    "boundary_weights",
    "sphere_measures",
    "curvatures",
    "Green0",
    "green0_profile",
    "green0_closed_form",
    "is_subcritical",
    "spherical_flux_solve",
    "first_sign_change",
]


@dataclass(frozen=True)
class ModelGraphSpec:
    """Description of a model graph truncated at radius ``R``.

    Parameters
    ----------
    sphere_sizes : tuple of int
        ``#S_r`` for ``r = 0..R``; ``#S_0`` must be 1.
    weights : tuple of float
        Weight of every edge between ``S_r`` and ``S_{r+1}``, ``r = 0..R-1``.
    measures : tuple of float
        Measure of every vertex in ``S_r``.
    wiring : {"complete", "tree"}
        ``"complete"`` joins consecutive spheres by a complete bipartite
        graph; ``"tree"`` gives each vertex of ``S_r`` its own block of
        ``#S_{r+1} / #S_r`` children.
    law : tuple or None
        Declared growth of ``∂_b B_k``: ``("geometric", ratio)`` or
        ``("power", exponent)``.  Used for tail sums beyond ``R``.
    """

    sphere_sizes: tuple
    weights: tuple
    measures: tuple
    wiring: str = "complete"
    law: tuple | None = None
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sphere_sizes)
        object.__setattr__(self, "sphere_sizes", sizes)
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "measures", tuple(float(m) for m in self.measures))
        if len(sizes) < 2:
            raise InvalidSpec("need at least radius 1")
        if sizes[0] != 1:
            raise InvalidSpec(f"#S_0 must be 1, got {sizes[0]}")
        if any(s < 1 for s in sizes):
            raise InvalidSpec("sphere sizes must be positive")
        if len(self.weights) != len(sizes) - 1:
            raise InvalidSpec("need one weight per pair of consecutive spheres")
        if len(self.measures) != len(sizes):
            raise InvalidSpec("need one measure per sphere")
        if any(not (w > 0 and math.isfinite(w)) for w in self.weights):
            raise InvalidSpec("weights must be positive")
        if any(not (m > 0 and math.isfinite(m)) for m in self.measures):
            raise InvalidSpec("measures must be positive")
        if self.wiring not in ("complete", "tree"):
            raise InvalidSpec(f"unknown wiring {self.wiring!r}")
        if self.wiring == "tree":
            for a, b in zip(sizes, sizes[1:]):
                if b % a:
                    raise InvalidSpec("tree wiring needs #S_{r+1} divisible by #S_r")
        if self.law is not None:
            kind, value = self.law
            if kind not in ("geometric", "power"):
                raise InvalidSpec(f"unknown asymptotic law {kind!r}")
            object.__setattr__(self, "law", (kind, float(value)))

    @property
    def R(self) -> int:
        return len(self.sphere_sizes) - 1

    @property
    def n_vertices(self) -> int:
        return sum(self.sphere_sizes)

    def truncate(self, R: int) -> "ModelGraphSpec":
        if not 1 <= R <= self.R:
            raise RadiusOutOfRange(f"cannot truncate radius {self.R} spec to {R}")
        return ModelGraphSpec(self.sphere_sizes[:R + 1], self.weights[:R],
                              self.measures[:R + 1], self.wiring, self.law,
                              self.kind, dict(self.params, R=R))

    def to_dict(self) -> dict:
        if self.kind in ("tree", "antitree", "path"):
            return {"kind": self.kind, **self.params}
        return {"kind": "custom", "R": self.R,
                "sphere_sizes": list(self.sphere_sizes),
                "weights": list(self.weights), "measures": list(self.measures),
                "wiring": self.wiring,
                "law": list(self.law) if self.law else None}


def tree_spec(d: int, R: int) -> ModelGraphSpec:
    """``d``-regular tree: every vertex has ``d`` children, standard weights."""
    if d < 1:
        raise InvalidSpec("tree degree must be at least 1")
    return ModelGraphSpec(tuple(d ** r for r in range(R + 1)), (1.0,) * R,
                          (1.0,) * (R + 1), wiring="tree",
                          law=("geometric", float(d)), kind="tree",
                          params={"d": d, "R": R})


def antitree_sizes(gamma: float, R: int) -> tuple:
    """``#S_0 = 1`` and ``#S_{r+1} = ceil(r^γ)``, floored at 1 so ``#S_1 = 1``."""
    return (1,) + tuple(max(1, math.ceil(r ** gamma)) for r in range(R))


def antitree_spec(gamma: float, R: int) -> ModelGraphSpec:
    if not gamma > 0:
        raise InvalidSpec("anti-tree exponent must be positive")
    return ModelGraphSpec(antitree_sizes(gamma, R), (1.0,) * R, (1.0,) * (R + 1),
                          wiring="complete", law=("power", 2.0 * gamma),
                          kind="antitree", params={"gamma": gamma, "R": R})


def path_spec(R: int) -> ModelGraphSpec:
    """The half-line rooted at its end."""
    return ModelGraphSpec((1,) * (R + 1), (1.0,) * R, (1.0,) * (R + 1),
                          law=("power", 0.0), kind="path", params={"R": R})


def spec_from_dict(doc: dict) -> ModelGraphSpec:
    kind = doc.get("kind", "custom")
    try:
        if kind == "tree":
            return tree_spec(int(doc["d"]), int(doc["R"]))
        if kind == "antitree":
            return antitree_spec(float(doc["gamma"]), int(doc["R"]))
        if kind == "path":
            return path_spec(int(doc["R"]))
        if kind == "custom":
            sizes = doc["sphere_sizes"]
            R = len(sizes) - 1
            weights = doc.get("weights", [1.0] * R)
            measures = doc.get("measures", [1.0] * (R + 1))
            law = doc.get("law")
            return ModelGraphSpec(tuple(sizes), tuple(weights), tuple(measures),
                                  wiring=doc.get("wiring", "complete"),
                                  law=tuple(law) if law else None)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSpec):
            raise
        raise InvalidSpec(f"malformed model spec: {exc!r}") from exc
    raise InvalidSpec(f"unknown model kind {kind!r}")


# -- radial bookkeeping ------------------------------------------------------

def boundary_weights(spec: ModelGraphSpec) -> np.ndarray:
    """``∂_b B_k`` for ``k = 0..R-1``."""
    s = np.asarray(spec.sphere_sizes, dtype=float)
    w = np.asarray(spec.weights)
    if spec.wiring == "tree":
        return s[1:] * w
    return s[:-1] * s[1:] * w


def boundary_weight(spec: ModelGraphSpec, k: int) -> float:
    """Total weight of the edges between ``S_k`` and ``S_{k+1}``."""
    if not 0 <= k < spec.R:
        raise RadiusOutOfRange(f"k={k} outside 0..{spec.R - 1}")
    return float(boundary_weights(spec)[k])


def sphere_measures(spec: ModelGraphSpec) -> np.ndarray:
    """``m(S_r)`` for ``r = 0..R``."""
    return np.asarray(spec.sphere_sizes, dtype=float) * np.asarray(spec.measures)


def curvatures(spec: ModelGraphSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-radius ``(k_+, k_-)``; ``k_+`` at ``R`` and ``k_-`` at 0 are zero."""
    bw = boundary_weights(spec)
    s = np.asarray(spec.sphere_sizes, dtype=float)
    m = np.asarray(spec.measures)
    kplus = np.zeros(spec.R + 1)
    kminus = np.zeros(spec.R + 1)
    kplus[:-1] = bw / (s[:-1] * m[:-1])
    kminus[1:] = bw / (s[1:] * m[1:])
    return kplus, kminus


def realize(spec: ModelGraphSpec) -> WeightedGraph:
    """Concrete graph ``B_R(o)`` for ``spec`` with the outer sphere as boundary."""
    offsets = np.concatenate([[0], np.cumsum(spec.sphere_sizes)])
    edges = []
    for r in range(spec.R):
        inner = range(offsets[r], offsets[r + 1])
        outer_start = offsets[r + 1]
        w = spec.weights[r]
        if spec.wiring == "tree":
            k = spec.sphere_sizes[r + 1] // spec.sphere_sizes[r]
            for i, x in enumerate(inner):
                for j in range(k):
                    edges.append((x, outer_start + i * k + j, w))
        else:
            for x in inner:
                for y in range(outer_start, offsets[r + 2]):
                    edges.append((x, y, w))
    measures = np.repeat(spec.measures, spec.sphere_sizes)
    boundary = range(offsets[spec.R], offsets[spec.R + 1])
    return build_graph(edges, measures, root=0, boundary=boundary)


def radial_graph(spec: ModelGraphSpec) -> WeightedGraph:
    """The radial quotient: half-line ``0..R`` with ``m(S_r)`` and ``∂_b B_r``."""
    bw = boundary_weights(spec)
    edges = [(r, r + 1, bw[r]) for r in range(spec.R)]
    return build_graph(edges, sphere_measures(spec), root=0, boundary=[spec.R])


def lift(g: WeightedGraph, radial) -> np.ndarray:
    """Spherically symmetric vertex function with ``f(x) = radial[|x|]``."""
    radial = np.asarray(radial, dtype=float)
    return radial[g.depth]


def spherical_values(g: WeightedGraph, f, atol: float = 0.0) -> np.ndarray:
    """Inverse of :func:`lift`; raises if ``f`` is not constant on spheres."""
    f = np.asarray(f, dtype=float)
    out = np.empty(g.radius + 1)
    for r in range(g.radius + 1):
        vals = f[g.depth == r]
        if np.ptp(vals) > atol:
            raise InvalidSpec(f"function is not spherically symmetric at radius {r}")
        out[r] = vals[0]
    return out


# -- Green function of Δ_p at α = 0 --------------------------------------------

@dataclass(frozen=True)
class Green0:
    """Closed-form ``G_0`` on radii ``0..R`` with a bracket for the tail."""

    value: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    tail_exact: bool


def _terms(spec: ModelGraphSpec, p: float, m_o: float | None) -> np.ndarray:
    m_o = spec.measures[0] if m_o is None else m_o
    return (m_o / boundary_weights(spec)) ** (1.0 / (p - 1.0))


def _inferred_power(terms: np.ndarray) -> float:
    """Decay exponent ``s`` of ``terms ~ k^{-s}`` over the outer half."""
    k = np.arange(len(terms), dtype=float)
    sel = slice(max(1, len(terms) // 2), len(terms))
    if len(k[sel]) < 3:
        raise UnknownAsymptotics("too few radii to infer the asymptotic law")
    slope = np.polyfit(np.log(k[sel]), np.log(terms[sel]), 1)[0]
    return -float(slope)


def is_subcritical(spec: ModelGraphSpec, p: float) -> bool:
    """Whether ``Σ_k (m(o)/∂_b B_k)^{1/(p-1)}`` converges.

    Uses the declared law when present.  Otherwise the decay exponent of
    the summands is estimated on the outer half of the truncation and must
    clear 1 by a margin of 0.1 either way.
    """
    if spec.law is not None:
        kind, value = spec.law
        if kind == "geometric":
            return value > 1.0
        return value / (p - 1.0) > 1.0
    s = _inferred_power(_terms(spec, p, None))
    if s > 1.1:
        return True
    if s < 0.9:
        return False
    raise UnknownAsymptotics(f"summand decay exponent {s:.3f} too close to 1")


def green0_profile(spec: ModelGraphSpec, p: float,
                   m_o: float | None = None) -> Green0:
    """``G_0(r) = Σ_{k>=r} (m(o)/∂_b B_k)^{1/(p-1)}`` for ``r = 0..R``.

    The partial sum runs to ``R-1``.  Geometric laws get their tail summed
    exactly from the last term; power laws ``∂_b B_k ~ k^σ`` get an
    integral estimate calibrated on the last term, bracketed by the two
    integral bounds.
    """
    if not p > 1:
        raise SeriesDivergent("p must exceed 1")
    if not is_subcritical(spec, p):
        raise SeriesDivergent("the Green series diverges: the graph is not subcritical")
    t = _terms(spec, p, m_o)
    R = spec.R
    partial = np.concatenate([np.cumsum(t[::-1])[::-1], [0.0]])
    last = t[-1]
    law = spec.law
    if law is None:
        law = ("power", _inferred_power(t) * (p - 1.0))
    kind, value = law
    if kind == "geometric":
        q = value ** (-1.0 / (p - 1.0))
        tail = last * q / (1.0 - q)
        return Green0(partial + tail, partial + tail, partial + tail, True)
    s = value / (p - 1.0)
    if R < 2:
        raise RadiusOutOfRange("power-law tails need R >= 2")
    amp = last * (R - 1) ** s
    est = amp * (R - 0.5) ** (1 - s) / (s - 1)
    lo = amp * R ** (1 - s) / (s - 1)
    hi = amp * (R - 1) ** (1 - s) / (s - 1)
    return Green0(partial + est, partial + lo, partial + hi, False)


def green0_closed_form(spec: ModelGraphSpec, p: float, x_radius: int,
                       m_o: float | None = None) -> Green0:
    """:func:`green0_profile` at a single radius, as 0-d arrays."""
    if not 0 <= x_radius <= spec.R:
        raise RadiusOutOfRange(f"radius {x_radius} outside 0..{spec.R}")
    prof = green0_profile(spec, p, m_o)
    return Green0(prof.value[x_radius], prof.lower[x_radius],
                  prof.upper[x_radius], prof.tail_exact)


# -- radial flux recurrence ----------------------------------------------------

def spherical_flux_solve(spec: ModelGraphSpec, p: float, alpha: float,
                         G_at_0: float, m_o: float | None = None) -> np.ndarray:
    """Spherically symmetric solution of ``(Δ_p + α) G = 1_o`` with given ``G(0)``.

    Summing the equation over ``B_k`` telescopes the Laplacian to the flux
    through the outer sphere::

        ∂_b B_k (G(k) - G(k+1))^{<p-1>} = m(o) - α Σ_{j<=k} m(S_j) G(j)^{<p-1>}

    which is solved forward for ``G(k+1)``.  Sign changes are left in the
    output for the caller to inspect.
    """
    if not G_at_0 > 0:
        raise NonpositiveInitial(f"G(0) must be positive, got {G_at_0}")
    if alpha < 0:
        raise InvalidSpec("alpha must be nonnegative")
    m_o = spec.measures[0] if m_o is None else m_o
    bw = boundary_weights(spec)
    ms = sphere_measures(spec)
    G = np.empty(spec.R + 1)
    G[0] = G_at_0
    absorbed = 0.0
    inv = 1.0 / (p - 1.0)
    for k in range(spec.R):
        absorbed += alpha * ms[k] * signed_power(G[k], p - 1)
        flux = m_o - absorbed
        G[k + 1] = G[k] - signed_power(flux / bw[k], inv)
        if not math.isfinite(G[k + 1]):
            G[k + 1:] = np.nan
            break
    return G


def first_sign_change(G: np.ndarray) -> int | None:
    """First radius where ``G`` is not positive, or ``None``."""
    bad = np.flatnonzero(~(G > 0))
    return int(bad[0]) if bad.size else None
