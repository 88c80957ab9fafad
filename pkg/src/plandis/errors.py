"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
``PreconditionError`` (bad input, exit 2) and ``ConvergenceError``
(a numerical procedure ran out of budget, exit 3).
"""


class PlandisError(Exception):
    pass


class PreconditionError(PlandisError, ValueError):
    pass


class ConvergenceError(PlandisError, RuntimeError):
    pass


# graph construction / IO
class ParseError(PreconditionError):
    pass


class DisconnectedGraph(PreconditionError):
    pass


class NonpositiveWeight(PreconditionError):
    pass


class NonpositiveMeasure(PreconditionError):
    pass


class SelfLoop(PreconditionError):
    pass


class DuplicateEdge(PreconditionError):
    pass


class RadiusExceedsGraph(PreconditionError):
    pass


# operators
class NonpositiveExponent(PreconditionError):
    pass


class InvalidExponent(PreconditionError):
    pass


class BoundaryVertex(PreconditionError):
    pass


class SupportTouchesBoundary(PreconditionError):
    pass


class NonpositiveGroundFunction(PreconditionError):
    pass


class MisalignedFunction(PreconditionError):
    pass


# model graphs
class InvalidSpec(PreconditionError):
    pass


class RadiusOutOfRange(PreconditionError):
    pass


class SeriesDivergent(PreconditionError):
    pass


class UnknownAsymptotics(PreconditionError):
    pass


class NonpositiveInitial(PreconditionError):
    pass


# solvers
class NoConvergence(ConvergenceError):
    pass


class NoScalarRoot(ConvergenceError):
    pass


class DivergentExhaustion(ConvergenceError):
    pass


class NoRootBracket(ConvergenceError):
    pass


class PreconditionViolated(PreconditionError):
    pass


# criticality
class NonpositiveGreen(PreconditionError):
    pass


class MeasureMismatch(PreconditionError):
    pass


class NonpositiveReference(PreconditionError):
    pass


# landis
class EmptyAnnulus(PreconditionError):
    pass


class DegenerateData(PreconditionError):
    pass


class PotentialBoundViolated(PreconditionError):
    pass


class NotHarmonic(PreconditionError):
    pass


class NotSubharmonic(PreconditionError):
    pass


class NotSubcritical(PreconditionError):
    pass


class InvalidDegree(PreconditionError):
    pass


class ExponentOutOfRange(PreconditionError):
    pass
