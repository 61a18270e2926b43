"""Exception types shared across the package."""


class StreamIntegrityError(RuntimeError):
    """Edge source yielded a different multiset than a previous pass."""


class ParameterError(ValueError):
    pass


class InfeasiblePointError(RuntimeError):
    """A slack came out non-positive while streaming."""

    def __init__(self, row, value=None):
        self.row = row
        self.value = value
        super().__init__(f"non-positive slack at row {row}: {value}")


class SolverDivergenceError(RuntimeError):
    pass


class NoSolutionError(RuntimeError):
    """Right-hand side is inconsistent with a singular system."""


class ExtractionAmbiguityError(RuntimeError):
    """A coordinate sits too far from every integer to round safely."""

    def __init__(self, coord, distance):
        self.coord = coord
        self.distance = distance
        super().__init__(
            f"coordinate {coord} is {distance} away from the nearest integer"
        )


class UnboundedError(RuntimeError):
    """Iterate norm exceeded the bit-complexity ceiling."""
