"""Exception hierarchy shared by every stage of the checker."""

from __future__ import annotations


class PhlError(Exception):
    """Base class for all checker errors."""


class InvalidMdp(PhlError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SchedulerActionDisabled(PhlError):
    pass


class PhlSyntaxError(PhlError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"{line}:{col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnboundVariable(PhlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable {name!r}")


class NotWellFormed(PhlError):
    pass


class DegeneratePredicate(PhlError):
    """All coefficients vanished; ``value`` is the folded truth value."""

    def __init__(self, value: bool):
        self.value = value
        super().__init__(f"predicate has no probability terms, folds to {value}")


class NotSafety(PhlError):
    pass


class AlphabetMismatch(PhlError):
    pass


class CapExceeded(PhlError):
    """A configurable resource cap was hit."""


class FormulaTooLarge(CapExceeded):
    pass


class StateBlowup(CapExceeded):
    pass


class SizeCap(CapExceeded):
    pass


class NonConvergence(CapExceeded):
    pass


class EmptyProduct(PhlError):
    pass


class ConfigError(PhlError):
    pass


class ClassificationError(PhlError):
    pass


class MdpFormatError(PhlError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class AutomatonFormatError(PhlError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")
