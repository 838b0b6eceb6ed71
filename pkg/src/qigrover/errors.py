"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates an operation's precondition."""


class InvalidStateError(ValueError):
    """A state is not in the form an operation requires (e.g. not normalized)."""


class NumericalFailure(RuntimeError):
    """A numerical result failed its exactness guard.

    Usually fixed by rerunning with a tighter truncation cutoff.
    """


class DimacsParseError(ValueError):
    """Malformed DIMACS CNF input; ``line`` is 1-based, or None for EOF."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else "end of input: "
        super().__init__(where + message)
