"""Exception hierarchy shared by all agsynth modules."""


class AgsynthError(Exception):
    """Base class for every error raised on purpose by agsynth."""


class ParseError(AgsynthError):
    def __init__(self, message: str, pos: int | None = None, line: int | None = None):
        self.pos = pos
        self.line = line
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif pos is not None:
            where = f"position {pos}: "
        super().__init__(where + message)


class SemanticError(AgsynthError):
    """Well-formed input that violates a model invariant."""


class UndeclaredAtomError(SemanticError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"undeclared atom {name!r}")


class BudgetExceeded(AgsynthError):
    """A configurable size limit was hit."""


class ConflictError(AgsynthError):
    """Two valuations disagree on a shared variable."""


class SolverError(AgsynthError):
    """The external solver could not be run."""


class ExtractionError(AgsynthError):
    """A solver model could not be turned into strategy tables."""


class InternalError(AgsynthError):
    """A result failed its own post-hoc verification."""
