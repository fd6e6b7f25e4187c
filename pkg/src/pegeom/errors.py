"""Exception hierarchy shared by every subpackage."""


class GeometryError(Exception):
    """Base class for all errors raised by pegeom."""


# kernel
class SingularMetric(GeometryError):
    pass


class OutOfDomain(GeometryError):
    pass


class JetUnavailable(GeometryError):
    pass


class DimensionUnsupported(GeometryError):
    pass


class DegreeMismatch(GeometryError):
    pass


class OrientationUnset(GeometryError):
    pass


class IntegrationFailure(GeometryError):
    pass


# catalog
class BadDimension(GeometryError):
    pass


class ZeroScale(GeometryError):
    pass


class SignMismatch(GeometryError):
    pass


class IncompatibleScalars(GeometryError):
    pass


class CatalogNameError(GeometryError):
    """A catalog name string could not be parsed or has the wrong arity."""


# constructions
class RicciFlatBase(GeometryError):
    pass


class LambdaMismatch(GeometryError):
    pass


class BadMu(GeometryError):
    pass


class NotSpecialKilling(GeometryError):
    pass


class BadNormalization(GeometryError):
    pass


# verifier
class ProjectionUndefined(GeometryError):
    pass


# cli
class ParseError(GeometryError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class ScenarioValidationError(GeometryError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class StageError(GeometryError):
    """A construction error annotated with the scenario stage that raised it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
