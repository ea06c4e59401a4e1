"""Exception types shared across the package."""


class CorgiError(Exception):
    """Base class for every error raised by this package."""


class ProgramSyntaxError(CorgiError):
    """Malformed knowledge-base source. Carries the 1-based source line."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class InstantiationError(CorgiError):
    """A builtin needed a bound value and got an unbound variable."""


class ArithmeticTypeError(CorgiError):
    """Arithmetic over something that is not a number."""


class GenerationExhausted(CorgiError):
    """Query synthesis could not find enough provable queries."""


class InconsistentTree(CorgiError):
    """A proof tree does not agree with the clauses it claims to use."""


class ShapeError(CorgiError):
    """Model input dimensions do not match the parameter shapes."""


class UnknownCharacter(CorgiError):
    """Character outside the query-encoder vocabulary."""


class UnknownSymbol(CorgiError):
    """Symbol has no row in the embedding matrix / symbol table."""


class FormatError(CorgiError):
    """Malformed external data file. Carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DivergenceError(CorgiError):
    """Training loss became non-finite."""


class MissingClause(CorgiError):
    """An if-then-because command is missing one of its keywords."""

    def __init__(self, which: str):
        super().__init__(f"missing '{which}' clause")
        self.which = which


class EmptyClause(CorgiError):
    """Nothing left of a clause after token filtering."""


class ValidationError(CorgiError):
    """A dataset record failed validation."""

    def __init__(self, record, field: str, reason: str = ""):
        msg = f"invalid field '{field}'"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.record = record
        self.field = field


class ScriptExhausted(CorgiError):
    """A replay script ran out of turns while the engine was still asking."""


class StoreCorrupt(CorgiError):
    """Session store contained an unreadable record."""
