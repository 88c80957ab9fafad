"""Quasilinear Schrödinger operators on weighted graphs and Landis-type checks."""

from .errors import ConvergenceError, PlandisError, PreconditionError
from .graph import WeightedGraph, build_graph, read_graph, vertex_function, write_graph
from .model import (
    ModelGraphSpec,
    antitree_spec,
    green0_profile,
    path_spec,
    radial_graph,
    realize,
    tree_spec,
)
from .operators import SchrodingerOperator, energy, p_laplacian, signed_power
from .solvers import SolveConfig, ball_green, dirichlet_solve, green_function, tree_beta
from .criticality import hardy_weight, liouville_conditions, nonnegativity_probe
from .landis import (
    landis_check_general,
    landis_check_model,
    landis_check_negative_potential,
    landis_check_recurrent,
    landis_check_tree,
)

__version__ = "0.1.0"
