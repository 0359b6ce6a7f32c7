"""Exception types raised across the library."""


class FluxplanError(Exception):
    """Base class for all library errors."""


class DegenerateTriangle(FluxplanError):
    """Triangle vertices are collinear (zero area)."""


class ChargeOnSurface(FluxplanError):
    """A charge lies on (or too close to) a surface element."""


class DegenerateQuad(FluxplanError):
    """Leader quadrilateral has a degenerate triangle or coincident vertices."""


class NonPlanarQuad(FluxplanError):
    """Leader quadrilateral deviates too far from a plane."""


class SingularSystem(FluxplanError):
    """Linear system in the least-squares update could not be solved."""


class KktSingular(FluxplanError):
    """KKT system remained singular after damping retries."""


class LineSearchFailed(FluxplanError):
    """Merit-function line search could not find an acceptable step."""


class NotConverged(FluxplanError):
    """Planner hit its iteration budget; carries the partial path."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class InfeasiblePath(FluxplanError):
    """Path curvature demands exceed the acceleration limit."""


class EmptyTargetSet(FluxplanError):
    """Target reduction called with no members."""


class Divergence(FluxplanError):
    """Tracking simulation position error exceeded the divergence bound."""


class ScenarioError(FluxplanError):
    """Scenario file failed to parse or validate."""
