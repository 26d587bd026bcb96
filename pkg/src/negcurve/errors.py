"""Exception types shared across the package."""


class NegCurveError(Exception):
    """Base class for all package-specific errors."""


class SignatureError(NegCurveError, ValueError):
    """A symmetric form does not have signature (1, rank-1).

    Carries the exact inertia triple so callers can report what was
    actually found.
    """

    def __init__(self, inertia, message=None):
        self.inertia = tuple(inertia)
        n_pos, n_neg, n_zero = self.inertia
        if message is None:
            message = (
                f"expected signature (1, rank-1), got "
                f"{n_pos} positive / {n_neg} negative / {n_zero} zero eigenvalues"
            )
        super().__init__(message)


class DegenerateCapPairError(NegCurveError, ValueError):
    """Pair check on caps whose boundary feet coincide (angular distance 0).

    Coincident feet force the caps to be equal or nested, so the pair
    predicates are not meaningful; this is an input error, not a failed
    condition.
    """


class InputError(NegCurveError, ValueError):
    """Malformed input document (CLI exit code 2)."""


class NumericalError(NegCurveError, RuntimeError):
    """Internal numerical failure (CLI exit code 3)."""
