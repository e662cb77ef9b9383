"""Exception hierarchy shared by every dofkit module."""

from __future__ import annotations


class DofkitError(Exception):
    """Base class for all library errors."""


# encoding model


class InvariantViolation(DofkitError):
    """A structural invariant of facts, locations or states does not hold."""


class UnknownLocation(DofkitError, KeyError):
    def __str__(self) -> str:
        return f"unknown location: {self.args[0]!r}"


class UnknownFact(DofkitError, KeyError):
    def __str__(self) -> str:
        return f"unknown fact: {self.args[0]!r}"


class DerivedTargetRejected(DofkitError):
    """Raised when an edit targets a location that has a derivation parent."""


class ValueOutOfDomain(DofkitError, ValueError):
    pass


class FactNotEncoded(DofkitError):
    pass


# dof engine


class CyclicGraph(InvariantViolation):
    pass


class EmptySystem(DofkitError):
    pass


class LocationSetMismatch(DofkitError):
    pass


class MixedFacts(DofkitError):
    pass


# simulator


class CapacityAchieving(DofkitError):
    """No incoherence witness exists because at most one source is present."""


class UnaryDomain(DofkitError):
    pass


class CoherentState(DofkitError):
    pass


class ChoiceNotPresent(DofkitError, ValueError):
    pass


class InsufficientSideInformation(DofkitError):
    pass


class UndesignatedAuthority(DofkitError):
    """Side information names no location that encodes the fact."""


class EditStepError(DofkitError):
    """Wraps an edit failure with the 1-based step index at which it occurred."""

    def __init__(self, step: int, cause: Exception) -> None:
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause


# info bounds


class OutOfRange(DofkitError, ValueError):
    pass


class InvalidQuery(DofkitError, ValueError):
    pass


class NotEncoded(DofkitError, ValueError):
    pass


class InvalidRegime(DofkitError, ValueError):
    pass


class TooLarge(DofkitError, ValueError):
    pass


# spec io / scanner


class SpecSyntaxError(DofkitError):
    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UndeclaredId(SpecSyntaxError):
    pass


class DuplicateId(SpecSyntaxError):
    pass


class CycleDetected(CyclicGraph):
    pass


class ScanIoError(DofkitError, OSError):
    pass


class ConfigParseError(DofkitError):
    def __init__(self, path: str, line: int, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
