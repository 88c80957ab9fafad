"""The graph p-Laplacian and quasilinear Schrödinger operators ``Δ_p + V``.

Conventions
-----------
``∇_xy f = f(x) - f(y)`` and ``Δ_p f(x) = m(x)^{-1} Σ_y b(x,y) (∇_xy f)^{<p-1>}``
with the signed power ``a^{<r>} = a |a|^{r-1}``.  The energy sums run over
unordered edges, so the ``1/2`` in front of the double sum is already
accounted for.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryVertex,
    InvalidExponent,
    NonpositiveExponent,
    NonpositiveGroundFunction,
    SupportTouchesBoundary,
)
from .graph import WeightedGraph, vertex_function

__all__ = [
    "signed_power",
    "SchrodingerOperator",
    "Classification",
    "p_laplacian",
    "apply_p_laplacian",
    "operator_values",
    "apply_operator",
    "energy",
    "simplified_energy",
    "ground_state_excess",
    "classify",
    "positive_part",
    "negative_part",
    "abs_part",
]

DEFAULT_TOL = 1e-9


def signed_power(a, r):
    """``a |a|^{r-1}``, with ``0^{<r>} = 0``.  Works elementwise on arrays."""
    if not np.all(np.asarray(r) > 0):
        raise NonpositiveExponent(f"signed power needs r > 0, got {r}")
    a = np.asarray(a, dtype=float)
    out = np.sign(a) * np.abs(a) ** r
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class SchrodingerOperator:
    """``H = Δ_p + V`` on ``graph``; ``potential`` defaults to zero."""

    graph: WeightedGraph
    p: float
    potential: np.ndarray = field(default=None)

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidExponent(f"p must exceed 1, got {self.p}")
        if self.potential is None:
            v = np.zeros(self.graph.n)
        else:
            v = vertex_function(self.graph, self.potential)
        v = np.array(v, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "potential", v)

    def with_potential(self, potential) -> "SchrodingerOperator":
        return SchrodingerOperator(self.graph, self.p, potential)


def _check_interior(g: WeightedGraph, x: int) -> None:
    if not g.is_interior(x):
        raise BoundaryVertex(f"vertex {x} lies on the boundary")


def p_laplacian(g: WeightedGraph, p: float, f) -> np.ndarray:
    """Evaluate ``Δ_p f`` at every vertex.

    Values on boundary vertices only see the stored neighbours; callers
    that care about exhaustion semantics should mask them out (see
    :func:`operator_values`).
    """
    f = np.asarray(f, dtype=float)
    flux = g.edge_b * signed_power(f[g.edge_x] - f[g.edge_y], p - 1)
    out = (np.bincount(g.edge_x, weights=flux, minlength=g.n)
           - np.bincount(g.edge_y, weights=flux, minlength=g.n))
    return out / g.measure


def apply_p_laplacian(g: WeightedGraph, p: float, f, x: int) -> float:
    _check_interior(g, x)
    f = np.asarray(f, dtype=float)
    diffs = f[x] - f[g.neighbors(x)]
    return float(np.sum(g.weights(x) * signed_power(diffs, p - 1)) / g.measure[x])


def operator_values(op: SchrodingerOperator, f) -> np.ndarray:
    """``H[f]`` at every interior vertex, NaN on the boundary."""
    f = np.asarray(f, dtype=float)
    out = p_laplacian(op.graph, op.p, f) + op.potential * signed_power(f, op.p - 1)
    out[~op.graph.interior_mask] = np.nan
    return out


def apply_operator(op: SchrodingerOperator, f, x: int) -> float:
    f = np.asarray(f, dtype=float)
    return (apply_p_laplacian(op.graph, op.p, f, x)
            + float(op.potential[x] * signed_power(f[x], op.p - 1)))


def _check_support(g: WeightedGraph, phi: np.ndarray) -> None:
    touching = [v for v in g.boundary if phi[v] != 0]
    if touching:
        raise SupportTouchesBoundary(
            f"test function is nonzero on boundary vertex {min(touching)}")


def energy(op: SchrodingerOperator, phi) -> float:
    """``Q(φ) = ½ Σ_{x,y} b |∇φ|^p + Σ_x m V |φ|^p`` for interior-supported ``φ``."""
    g = op.graph
    phi = vertex_function(g, phi)
    _check_support(g, phi)
    grad = np.abs(phi[g.edge_x] - phi[g.edge_y])
    kinetic = np.sum(g.edge_b * grad ** op.p)
    potential = np.sum(g.measure * op.potential * np.abs(phi) ** op.p)
    return float(kinetic + potential)


def simplified_energy(g: WeightedGraph, p: float, u, phi) -> float:
    """Simplified energy of ``φ`` relative to a strictly positive ``u``.

    Summed over unordered edges::

        Σ b u(x)u(y) |∇φ|^2 [ |∇u| (|φ(x)|+|φ(y)|)/2 + (u(x)u(y))^{1/2} |∇φ| ]^{p-2}

    Terms with ``∇φ = 0`` contribute 0, as do terms whose bracket vanishes
    when ``p < 2`` (the ``0·∞ = 0`` convention).
    """
    if not p > 1:
        raise InvalidExponent(f"p must exceed 1, got {p}")
    u = vertex_function(g, u)
    phi = vertex_function(g, phi)
    if np.any(u <= 0):
        raise NonpositiveGroundFunction("u must be strictly positive")
    _check_support(g, phi)
    ex, ey = g.edge_x, g.edge_y
    uu = u[ex] * u[ey]
    dphi = np.abs(phi[ex] - phi[ey])
    bracket = (np.abs(u[ex] - u[ey]) * 0.5 * (np.abs(phi[ex]) + np.abs(phi[ey]))
               + np.sqrt(uu) * dphi)
    live = (dphi > 0) & (bracket > 0)
    terms = np.zeros_like(dphi)
    terms[live] = (g.edge_b[live] * uu[live] * dphi[live] ** 2
                   * bracket[live] ** (p - 2))
    return float(np.sum(terms))


def ground_state_excess(op: SchrodingerOperator, u, phi) -> float:
    """``Q(uφ) - Σ m u H[u] |φ|^p``, the quantity the simplified energy controls."""
    g = op.graph
    u = vertex_function(g, u)
    phi = vertex_function(g, phi)
    hu = operator_values(op, u)
    support = phi != 0
    return energy(op, u * phi) - float(
        np.sum((g.measure * u * hu * np.abs(phi) ** op.p)[support]))


@dataclass
class Classification:
    """Pointwise values of ``H[f]`` on a region with harmonicity tags."""

    values: dict
    tags: dict
    aggregate: str
    tol: float

    TAGS = ("harmonic", "subharmonic", "superharmonic", "none")

    @property
    def is_harmonic(self) -> bool:
        return self.aggregate == "harmonic"

    @property
    def is_subharmonic(self) -> bool:
        return all(v <= self.tol for v in self.values.values())

    @property
    def is_superharmonic(self) -> bool:
        return all(v >= -self.tol for v in self.values.values())

    def first_violation(self, kind: str):
        check = {"harmonic": lambda v: abs(v) <= self.tol,
                 "subharmonic": lambda v: v <= self.tol,
                 "superharmonic": lambda v: v >= -self.tol}[kind]
        for x in sorted(self.values):
            if not check(self.values[x]):
                return x
        return None

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "tol": self.tol,
            "vertices": {str(x): {"value": self.values[x], "tag": self.tags[x]}
                         for x in sorted(self.values)},
        }


def classify(op: SchrodingerOperator, f, region=None,
             tol: float = DEFAULT_TOL) -> Classification:
    """Tag each vertex of ``region`` (default: the interior) by the sign of ``H[f]``."""
    g = op.graph
    f = vertex_function(g, f)
    if region is None:
        region = g.interior.tolist()
    region = sorted(int(x) for x in region)
    for x in region:
        _check_interior(g, x)
    hf = operator_values(op, f)
    values, tags = {}, {}
    for x in region:
        v = float(hf[x])
        values[x] = v
        if abs(v) <= tol:
            tags[x] = "harmonic"
        elif v < 0:
            tags[x] = "subharmonic"
        else:
            tags[x] = "superharmonic"
    vals = np.array(list(values.values()))
    if vals.size == 0 or np.all(np.abs(vals) <= tol):
        aggregate = "harmonic"
    elif np.all(vals <= tol):
        aggregate = "subharmonic"
    elif np.all(vals >= -tol):
        aggregate = "superharmonic"
    else:
        aggregate = "none"
    return Classification(values, tags, aggregate, tol)


def positive_part(f) -> np.ndarray:
    return np.maximum(np.asarray(f, dtype=float), 0.0)


def negative_part(f) -> np.ndarray:
    return np.maximum(-np.asarray(f, dtype=float), 0.0)


def abs_part(f) -> np.ndarray:
    return np.abs(np.asarray(f, dtype=float))
