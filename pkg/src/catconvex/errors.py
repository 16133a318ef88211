"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Base class for all geometric input and domain errors."""


class InvalidPointError(GeometryError):
    """Coordinates violate the embedding constraint of the model space."""


class UniquenessRegimeError(GeometryError):
    """Two points are too far apart for a unique connecting geodesic."""


class TriangleError(GeometryError):
    """Side lengths cannot be realized as a triangle in the model space."""


class NumericalDomainError(GeometryError):
    """An inverse trig argument left its domain by more than rounding noise."""


class HypothesisError(GeometryError):
    """A theorem hypothesis (distance or diameter bound) is not satisfied."""


class SceneError(GeometryError):
    """A scene definition is structurally invalid."""


class SceneFormatError(SceneError):
    """A scene file could not be parsed; carries a field diagnostic."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"{message} (at {field})"
        super().__init__(message)


class DisconnectedSceneError(SceneError):
    """No path between two points inside the scene."""
