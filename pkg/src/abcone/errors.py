"""Exception types raised by the abcone solvers."""


class AbconeError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AbconeError, ValueError):
    """An argument lies outside the domain where the routine is defined."""


class PoleError(DomainError):
    """Evaluation requested at (or within tolerance of) a pole."""


class ConvergenceError(AbconeError, ArithmeticError):
    """A series or iteration ran out of terms before meeting its tolerance."""


class NoBoundState(AbconeError):
    """The channel supports no bound state for the given parameters."""


class SingularCoupling(AbconeError, ZeroDivisionError):
    """phi*s equals |j|, so the coupling ratio has a vanishing denominator."""


class BracketError(AbconeError):
    """No sign change was found where a root was expected."""


class PoleAtK(AbconeError):
    """The wavenumber sits on a pole of mu(k); the principal phase jumps by pi."""

    def __init__(self, k, message=None):
        self.k = k
        super().__init__(message or f"mu(k) has a pole at k={k!r}")
