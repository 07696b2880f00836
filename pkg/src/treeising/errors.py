"""Exception hierarchy.

Every error raised by the library derives from :class:`TreeIsingError`. The
CLI maps the three families below onto its exit codes:

* :class:`InputError` -> exit 1 (malformed trees, files, arguments)
* :class:`ConstraintViolation` -> exit 2 (inadmissible parameters)
* :class:`NumericalToleranceError` -> exit 3 (round-off or truncation above
  the configured tolerance)
"""


class TreeIsingError(Exception):
    pass


class InputError(TreeIsingError, ValueError):
    pass


class ConstraintViolation(TreeIsingError, ValueError):
    pass


class NumericalToleranceError(TreeIsingError, ArithmeticError):
    pass


# tree_core
class TreeError(InputError):
    pass


class CycleDetected(TreeError):
    pass


class Disconnected(TreeError):
    pass


class SelfLoop(TreeError):
    pass


class DuplicateEdge(TreeError):
    pass


class IndexOutOfRange(TreeError, IndexError):
    pass


class MissingEdgeWeight(TreeError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotAnEdge(TreeError):
    pass


# model level
class DomainError(ConstraintViolation):
    pass


class InadmissibleModel(ConstraintViolation):
    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class RootHasNoParent(InputError):
    pass


class LengthMismatch(InputError):
    pass


class DimensionTooLarge(InputError):
    pass


class NotAnIsingModel(ConstraintViolation):
    pass


class NotSymmetricModel(ConstraintViolation):
    pass


class NotCommonQ(ConstraintViolation):
    pass


class AlphaOutOfRange(ConstraintViolation):
    pass


# numerics
class LengthNotPowerOfTwo(InputError):
    pass


class ToleranceExceeded(NumericalToleranceError):
    pass


class TruncationTooSevere(NumericalToleranceError):
    pass


class ModelFileError(InputError):
    """Malformed model file; ``location`` names the line or field at fault."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)
