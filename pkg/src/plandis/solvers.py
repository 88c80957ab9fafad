"""Nonlinear Dirichlet problems for ``Δ_p + V`` and Green functions.

The Dirichlet solver is a nonlinear Gauss-Seidel sweep: each interior
vertex in turn is set to the root ``t`` of the local equation

    Σ_y b(x,y) (t - u(y))^{<p-1>} + m(x) V(x) t^{<p-1>} = m(x) f(x)

with its neighbours frozen.  For ``V >= 0`` the left side is strictly
increasing in ``t``, so the root is unique and each update is a coordinate
minimisation of the energy.  Relaxation alone converges slowly for
``p < 2``, so in that case a damped Newton step on the whole interior is
tried every few sweeps and kept only if it lowers the residual.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.optimize import brentq
from scipy.sparse.linalg import spsolve

from .errors import (
    DivergentExhaustion,
    InvalidDegree,
    InvalidExponent,
    InvalidSpec,
    NoConvergence,
    NoRootBracket,
    NoScalarRoot,
    PreconditionViolated,
)
from .graph import WeightedGraph
from .model import ModelGraphSpec, radial_graph, realize, spherical_flux_solve
from .operators import SchrodingerOperator, classify, operator_values

log = logging.getLogger(__name__)

__all__ = [
    "SolveConfig",
    "Solution",
    "ExhaustionResult",
    "dirichlet_solve",
    "green_function",
    "tree_beta",
    "tree_beta_residual",
    "shoot_green",
    "weak_comparison_check",
    "ball_green",
]


@dataclass(frozen=True)
class SolveConfig:
    max_sweeps: int = 20000
    residual_tol: float = 1e-10
    per_vertex_tol: float = 1e-12
    sweep_order: str = "symmetric"
    damping: float = 1.0
    newton_every: int = 8

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise PreconditionViolated("max_sweeps must be at least 1")
        if not (self.residual_tol > 0 and self.per_vertex_tol > 0):
            raise PreconditionViolated("tolerances must be positive")
        if not 0 < self.damping <= 1:
            raise PreconditionViolated("damping must lie in (0, 1]")
        if self.newton_every < 0:
            raise PreconditionViolated("newton_every must be nonnegative (0 disables)")
        if self.sweep_order not in ("forward", "symmetric"):
            raise PreconditionViolated(f"unknown sweep order {self.sweep_order!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Solution:
    u: np.ndarray
    sweeps: int
    residual: float
    converged: bool

    def to_dict(self) -> dict:
        return {"values": self.u.tolist(), "sweeps": self.sweeps,
                "residual": self.residual, "converged": self.converged}


# -- scalar root finding -------------------------------------------------------

def _local_fn(b, nb_vals, mV, rhs, q):
    # q = p - 1
    def F(t):
        d = t - nb_vals
        s = float(np.dot(b, np.sign(d) * np.abs(d) ** q))
        return s + mV * math.copysign(abs(t) ** q, t) - rhs
    return F


def _scale(nb_vals, prev, rhs, bsum, q):
    s = max(float(np.max(np.abs(nb_vals))), abs(prev))
    if rhs:
        s = max(s, (abs(rhs) / bsum) ** (1.0 / q))
    return s if s > 0 else 1e-300


def _root_monotone(F, lo, hi, scale):
    width = max(hi - lo, scale)
    flo, fhi = F(lo), F(hi)
    for _ in range(2000):
        if flo <= 0:
            break
        lo -= width
        width *= 2
        flo = F(lo)
    for _ in range(2000):
        if fhi >= 0:
            break
        hi += width
        width *= 2
        fhi = F(hi)
    if flo > 0 or fhi < 0:
        raise NoScalarRoot("could not bracket the local equation")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    return brentq(F, lo, hi, xtol=1e-15 * scale, rtol=1e-15, maxiter=500)


def _root_nearest(F, lo, hi, prev, scale, samples=129):
    """All sign changes of ``F`` on a grid over ``[lo, hi]``; root nearest ``prev``."""
    grid = np.linspace(lo, hi, samples)
    vals = [F(t) for t in grid]
    roots = []
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(F, a, b, xtol=1e-15 * scale, rtol=1e-15))
    if vals[-1] == 0:
        roots.append(grid[-1])
    if not roots:
        raise NoScalarRoot(f"no root of the local equation in [{lo}, {hi}]")
    return min(roots, key=lambda t: (abs(t - prev), t))


def _linear_warm_start(g: WeightedGraph, V, f, u):
    """p = 2 solve of ``(Δ + V) u = f`` with the boundary values of ``u``."""
    interior = g.interior
    if interior.size == 0:
        return u
    idx = -np.ones(g.n, dtype=np.int64)
    idx[interior] = np.arange(interior.size)
    rows, cols, vals = [], [], []
    rhs = g.measure[interior] * f[interior]
    diag = g.degree[interior] + g.measure[interior] * V[interior]
    for ex, ey in ((g.edge_x, g.edge_y), (g.edge_y, g.edge_x)):
        for x, y, b in zip(ex, ey, g.edge_b):
            if idx[x] < 0:
                continue
            if idx[y] >= 0:
                rows.append(idx[x]); cols.append(idx[y]); vals.append(-b)
            else:
                rhs[idx[x]] += b * u[y]
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(interior.size,) * 2)
    A = A + sparse.diags(diag)
    with np.errstate(all="ignore"):
        try:
            sol = spsolve(A.tocsc(), rhs)
        except RuntimeError:
            return u
    if not np.all(np.isfinite(sol)):
        return u
    out = u.copy()
    out[interior] = sol
    return out


def dirichlet_solve(op: SchrodingerOperator, boundary_data,
                    config: SolveConfig | None = None, source=None,
                    initial=None) -> Solution:
    """Solve ``H[u] = source`` on the interior with ``u = boundary_data`` on the boundary.

    Parameters
    ----------
    op : SchrodingerOperator
    boundary_data : array or dict
        Full-length array (interior entries ignored) or ``{vertex: value}``.
    source : array, optional
        Right-hand side; zero by default.  ``1_o`` gives Green functions.
    initial : array, optional
        Starting iterate; by default the ``p = 2`` solution of the same problem.

    Raises
    ------
    NoConvergence
        Sweep budget exhausted before both tolerances were met.
    NoScalarRoot
        A local equation could not be bracketed (only possible for ``V < 0``).
    """
    config = config or SolveConfig()
    g = op.graph
    p, q = op.p, op.p - 1.0
    V = op.potential
    u = np.zeros(g.n)
    if isinstance(boundary_data, dict):
        for x, val in boundary_data.items():
            u[int(x)] = float(val)
    else:
        bd = np.asarray(boundary_data, dtype=float)
        mask = ~g.interior_mask
        u[mask] = bd[mask]
    f = np.zeros(g.n) if source is None else np.asarray(source, dtype=float)
    if initial is not None:
        init = np.asarray(initial, dtype=float)
        u[g.interior_mask] = init[g.interior_mask]
    else:
        V_lin = V if np.all(V >= 0) else np.zeros(g.n)
        u = _linear_warm_start(g, V_lin, f, u)

    interior = g.interior.tolist()
    order = interior + (interior[::-1] if config.sweep_order == "symmetric" else [])
    monotone = bool(np.all(V >= 0))
    nbrs = [g.neighbors(x) for x in range(g.n)]
    wts = [g.weights(x) for x in range(g.n)]
    mV = g.measure * V
    rhs_all = g.measure * f
    omega = config.damping

    if not interior:
        return Solution(u, 0, 0.0, True)
    for sweep in range(1, config.max_sweeps + 1):
        change = 0.0
        for x in order:
            nb_vals = u[nbrs[x]]
            prev = u[x]
            F = _local_fn(wts[x], nb_vals, mV[x], rhs_all[x], q)
            scale = _scale(nb_vals, prev, rhs_all[x], g.degree[x], q)
            if monotone:
                lo = min(float(nb_vals.min()), prev)
                hi = max(float(nb_vals.max()), prev)
                t = _root_monotone(F, lo, hi, scale)
            else:
                span = float(nb_vals.max() - nb_vals.min())
                delta = span + abs(prev) + scale
                t = _root_nearest(F, float(nb_vals.min()) - delta,
                                  float(nb_vals.max()) + delta, prev, scale)
            new = prev + omega * (t - prev)
            change = max(change, abs(new - prev) / max(abs(new), abs(prev), 1e-300))
            u[x] = new
        if change <= config.per_vertex_tol:
            residual = _residual(op, u, f)
            if residual <= max(config.residual_tol, _roundoff_floor(g, p, u)):
                return Solution(u, sweep, residual, True)
        elif monotone and config.newton_every and sweep % config.newton_every == 0:
            u = _newton_polish(op, u, f)
    residual = _residual(op, u, f)
    raise NoConvergence(
        f"no convergence after {config.max_sweeps} sweeps (residual {residual:.3e})")


def _newton_polish(op: SchrodingerOperator, u, f, steps: int = 30):
    """Damped Newton on the interior equations; returns the best iterate seen.

    For ``p < 2`` the Jacobian entries ``|∇u|^{p-2}`` blow up on flat edges,
    so differences are floored relative to the data scale.  Steps that do
    not reduce the max-norm residual are halved, at most 30 times.
    """
    g = op.graph
    p, q = op.p, op.p - 1.0
    interior = g.interior
    idx = -np.ones(g.n, dtype=np.int64)
    idx[interior] = np.arange(interior.size)
    floor = 1e-12 * max(float(np.max(np.abs(u))), 1e-300)
    mV = g.measure * op.potential
    best = u.copy()
    best_res = _residual(op, best, f)
    for _ in range(steps):
        r = (operator_values(op, best) - f)[interior]
        d = best[g.edge_x] - best[g.edge_y]
        w = g.edge_b * q * np.maximum(np.abs(d), floor) ** (q - 1.0)
        diag = np.zeros(g.n)
        np.add.at(diag, g.edge_x, w)
        np.add.at(diag, g.edge_y, w)
        diag += mV * q * np.maximum(np.abs(best), floor) ** (q - 1.0)
        ix, iy = idx[g.edge_x], idx[g.edge_y]
        both = (ix >= 0) & (iy >= 0)
        rows = np.concatenate([ix[both], iy[both]])
        cols = np.concatenate([iy[both], ix[both]])
        vals = -np.concatenate([w[both], w[both]])
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(interior.size,) * 2)
        A = A + sparse.diags(diag[interior])
        with np.errstate(all="ignore"):
            try:
                step = spsolve(A.tocsc(), -(g.measure[interior] * r))
            except RuntimeError:
                return best
        if not np.all(np.isfinite(step)):
            return best
        lam = 1.0
        for _ in range(30):
            trial = best.copy()
            trial[interior] += lam * step
            res = _residual(op, trial, f)
            if res < best_res:
                break
            lam *= 0.5
        else:
            return best
        best, best_res = trial, res
        if best_res <= _roundoff_floor(g, p, best):
            break
    return best


def _roundoff_floor(g: WeightedGraph, p: float, u) -> float:
    """Smallest residual resolvable in double precision when ``p < 2``.

    A one-ulp perturbation of ``u`` moves ``Δ_p u`` by up to
    ``deg/m · (ε|u|)^{p-1}``, which for ``p < 2`` exceeds typical
    tolerances (about 1e-8 at ``p = 1.5``).
    """
    if p >= 2:
        return 0.0
    eps = np.finfo(float).eps * max(float(np.max(np.abs(u))), 1e-300)
    return float(np.max(g.degree / g.measure) * eps ** (p - 1.0))


def _residual(op, u, f):
    r = operator_values(op, u) - f
    r = r[op.graph.interior_mask]
    return float(np.max(np.abs(r))) if r.size else 0.0


# -- Green functions by exhaustion ---------------------------------------------

@dataclass
class ExhaustionResult:
    """Green approximants on nested balls and the extrapolated limit.

    ``limit`` lives on the vertices of the smallest ball used in the final
    extrapolation; ``final`` is the approximant on the largest ball.
    """

    radii: list
    approximants: list
    converged: bool
    limit: np.ndarray
    final: np.ndarray
    monotone: bool
    monotonicity_violations: list = field(default_factory=list)
    root_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "converged": self.converged,
            "limit": self.limit.tolist(),
            "monotone": self.monotone,
            "monotonicity_violations": self.monotonicity_violations,
            "root_trace": self.root_trace,
        }


def _aitken(a0, a1, a2):
    d1 = a1 - a0
    d2 = a2 - a1
    denom = d2 - d1
    out = a2.copy()
    ok = (np.abs(denom) > 1e-300) & (np.abs(d2) > 0) & (np.abs(d2) < np.abs(d1))
    out[ok] = a2[ok] - d2[ok] ** 2 / denom[ok]
    return out


def _graph_family(family) -> Callable[[int], WeightedGraph]:
    if isinstance(family, ModelGraphSpec):
        return lambda R: radial_graph(family.truncate(R))
    if callable(family):
        return family
    raise PreconditionViolated("family must be a ModelGraphSpec or a callable R -> graph")


def green_function(family, p: float, alpha: float, radii,
                   config: SolveConfig | None = None,
                   reference_radius: int | None = None,
                   cap: float = 1e8,
                   realized: bool = False) -> ExhaustionResult:
    """Minimal Green function of ``Δ_p + α`` at the root by zero-Dirichlet exhaustion.

    Parameters
    ----------
    family : ModelGraphSpec or callable
        A model spec (solved on its radial quotient, or on the realised
        ball when ``realized=True``) or a function ``R -> WeightedGraph``
        whose balls are vertex-prefix nested and carry their outer sphere
        as boundary.
    radii : sequence of int
        Increasing, equally spaced radius schedule.
    reference_radius : int, optional
        Convergence is judged on ``B_reference_radius(o)``; defaults to
        ``radii[0] - 1``.
    cap : float
        Values at ``o`` beyond ``cap`` abort with :class:`DivergentExhaustion`.

    The limit candidate is the componentwise Aitken extrapolation of the
    last three approximants; convergence is declared once successive
    candidates agree to ``config.residual_tol`` on the reference ball.
    """
    config = config or SolveConfig()
    if alpha < 0:
        raise PreconditionViolated("alpha must be nonnegative")
    radii = [int(r) for r in radii]
    if len(radii) < 2 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise PreconditionViolated("radius schedule must be increasing")
    if isinstance(family, ModelGraphSpec) and realized:
        spec = family
        graphs = lambda R: realize(spec.truncate(R))  # noqa: E731
    else:
        graphs = _graph_family(family)
    ref = radii[0] - 1 if reference_radius is None else reference_radius

    approximants, sizes = [], []
    violations = []
    root_trace = []
    limits = []
    prev = None
    converged = False
    for j, R in enumerate(radii):
        g = graphs(R)
        op = SchrodingerOperator(g, p, np.full(g.n, float(alpha)))
        source = np.zeros(g.n)
        source[g.root] = 1.0
        sol = dirichlet_solve(op, np.zeros(g.n), config, source=source)
        G = sol.u
        root_trace.append(float(G[g.root]))
        if not math.isfinite(G[g.root]) or G[g.root] > cap:
            raise DivergentExhaustion(
                f"G({g.root}) = {G[g.root]:.3e} exceeds cap {cap:.1e} at R={R}")
        ref_mask = g.depth <= ref
        if prev is not None:
            k = prev.size
            drop = prev[:k][ref_mask[:k]] - G[:k][ref_mask[:k]]
            bad = np.flatnonzero(drop > config.residual_tol)
            if bad.size:
                violations.append({"R": R, "vertices": bad.tolist(),
                                   "max_drop": float(drop.max())})
                log.warning("exhaustion not monotone at R=%d (drop %.3e)", R,
                            drop.max())
        approximants.append(G)
        sizes.append(g.n)
        prev = G
        if j >= 2:
            k = sizes[j - 2]
            lim = _aitken(approximants[j - 2][:k], approximants[j - 1][:k], G[:k])
            limits.append((k, lim, ref_mask[:k]))
            if len(limits) >= 2:
                k0, l0, m0 = limits[-2]
                diff = np.abs(lim[:k0][m0] - l0[m0])
                if diff.size and diff.max() < config.residual_tol:
                    converged = True
                    break
        if j >= 1:
            k = sizes[j - 1]
            raw = np.abs(G[:k] - approximants[j - 1])[ref_mask[:k]]
            if raw.size and raw.max() < config.residual_tol:
                limits.append((k, G[:k].copy(), ref_mask[:k]))
                converged = True
                break

    if not converged:
        inc = np.diff(root_trace)
        if inc.size >= 2 and inc[-1] > 0 and inc[-1] >= 0.9 * inc[-2]:
            raise DivergentExhaustion(
                "increments of G(o) do not decay along the exhaustion "
                f"(last two: {inc[-2]:.3e}, {inc[-1]:.3e})")
        raise NoConvergence("exhaustion did not settle within the radius schedule")
    k, lim, _ = limits[-1]
    return ExhaustionResult(radii[:len(approximants)], approximants, True, lim,
                            approximants[-1], not violations, violations,
                            root_trace)


def ball_green(g: WeightedGraph, p: float, alpha: float,
               config: SolveConfig | None = None) -> Solution:
    """Zero-Dirichlet Green function of ``Δ_p + α`` on one ball.

    This is a single exhaustion approximant; it increases to the minimal
    Green function as the ball grows.  For ``α > 0`` the boundary error
    decays geometrically in the distance to the boundary.
    """
    op = SchrodingerOperator(g, p, np.full(g.n, float(alpha)))
    source = np.zeros(g.n)
    source[g.root] = 1.0
    return dirichlet_solve(op, np.zeros(g.n), config, source=source)


# -- d-regular tree ------------------------------------------------------------

def tree_beta_residual(beta: float, p: float, d: int) -> float:
    """``(1-β)^{p-1} - [(1/β - 1)^{p-1} - 1] / d``."""
    return (1 - beta) ** (p - 1) - ((1 / beta - 1) ** (p - 1) - 1) / d


def tree_beta(p: float, d: int) -> float:
    """Decay rate ``β`` with ``(Δ_p + 1)[β^{|x|}] = 0`` off the root of the ``d``-regular tree.

    Bisection on ``(ε, 1 - 1e-12)`` run until the bracket stops shrinking;
    ``ε`` goes down to 1e-300 so that ``p`` close to 1 stays bracketed.
    """
    if not p > 1:
        raise InvalidExponent(f"p must exceed 1, got {p}")
    if int(d) != d or d < 2:
        raise InvalidDegree(f"d must be an integer >= 2, got {d}")
    # smallest start whose (1/β)^{p-1} stays finite
    lo, hi = 10.0 ** -min(300.0, 300.0 / (p - 1.0)), 1 - 1e-12
    flo, fhi = tree_beta_residual(lo, p, d), tree_beta_residual(hi, p, d)
    if not (flo < 0 < fhi):
        raise NoRootBracket(f"f({lo}) = {flo}, f({hi}) = {fhi}")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = tree_beta_residual(mid, p, d)
        if fm == 0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(tree_beta_residual(lo, p, d)) <= abs(tree_beta_residual(hi, p, d)) else hi


def shoot_green(spec: ModelGraphSpec, p: float, alpha: float,
                cap: float = 1e6, max_iter: int = 400):
    """Spherically symmetric ``G_α`` by bisection on ``G(0)``.

    Too small a start crosses zero; too large a start (``α > 0``) turns
    upward once the absorbed mass exceeds ``m(o)``.  Returns
    ``(G(0), trajectory, valid_radius)``; the trajectory is that of the
    lower bracket and is trustworthy up to ``valid_radius``, the first
    radius where the two brackets' trajectories separate by more than
    their own value.
    """
    if alpha < 0:
        raise InvalidSpec("alpha must be nonnegative")
    lo, hi = 0.0, cap

    def outcome(g0):
        G = spherical_flux_solve(spec, p, alpha, g0)
        if np.any(~(G > 0)):
            return -1, G
        if alpha == 0 or np.any(np.diff(G) > 0):
            # without absorption every start above G_0(o) stays positive
            return 1, G
        return 0, G

    G_lo = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        s, G = outcome(mid)
        if s < 0:
            lo, G_lo = mid, G
        elif s > 0:
            hi = mid
        else:
            return mid, G, spec.R
    if G_lo is None:
        G_lo = spherical_flux_solve(spec, p, alpha, lo) if lo > 0 else None
        if G_lo is None:
            raise NoConvergence("shooting never produced a positive trajectory")
    G_hi = spherical_flux_solve(spec, p, alpha, hi)
    sep = np.abs(G_hi - G_lo) > np.abs(G_lo)
    sep |= ~(G_lo > 0)
    valid = int(np.flatnonzero(sep)[0]) - 1 if sep.any() else spec.R
    return lo, G_lo, max(valid, 0)


# -- comparison ----------------------------------------------------------------

def weak_comparison_check(op: SchrodingerOperator, u, v, region,
                          tol: float = 1e-9):
    """Check ``u <= v`` on ``region`` given the comparison hypotheses.

    Requires ``v`` superharmonic and ``u`` subharmonic on ``region`` and
    ``u <= v`` on the outer vertex boundary of ``region``.  Returns
    ``(holds, first_violation_vertex_or_None)``.
    """
    g = op.graph
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    region = sorted(int(x) for x in region)
    inside = set(region)
    frontier = sorted({int(y) for x in region for y in g.neighbors(x)} - inside)
    if not classify(op, v, region, tol).is_superharmonic:
        raise PreconditionViolated("v is not superharmonic on the region")
    if not classify(op, u, region, tol).is_subharmonic:
        raise PreconditionViolated("u is not subharmonic on the region")
    for y in frontier:
        if u[y] > v[y] + tol:
            raise PreconditionViolated(f"u > v at frontier vertex {y}")
    for x in region:
        if u[x] > v[x] + tol:
            return False, x
    return True, None
