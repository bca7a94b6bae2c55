"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """A numeric argument lies outside its documented domain."""


class DimensionMismatch(ValueError):
    """Array shapes are inconsistent with the declared alphabets."""


class ValidationError(ValueError):
    """One or more structural invariants are violated.

    Carries the full list of violations so callers can report all of
    them at once instead of fixing one at a time.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class Infeasible(RuntimeError):
    """The requested budgets admit no feasible input distribution."""


class NotConverged(RuntimeError):
    """An iterative solver exhausted its budget; best iterate attached."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class TooLarge(ValueError):
    """Requested codebook exceeds the desk-scale guard."""


class OutOfRegion(ValueError):
    """A closed-form expression was queried outside its validity region."""

    def __init__(self, argument_name, value):
        self.argument_name = argument_name
        self.value = value
        super().__init__(f"{argument_name}={value!r} outside [0, 1]")


class NoFeasiblePoint(RuntimeError):
    """Grid search found no point meeting the distortion targets."""


class DecodeError(RuntimeError):
    """Typicality decoding failed (no unique typical index)."""

    def __init__(self, reason, count=0):
        self.reason = reason  # "none" or "ambiguous"
        self.count = count
        super().__init__(f"decode error: {reason} (candidates={count})")
