"""Exception hierarchy.  Refuted or failing verdicts are values, never exceptions."""


class CrystalloError(Exception):
    """Base class for every error raised by the package."""


class ParseError(CrystalloError):
    """Source text does not conform to the spec-language grammar."""

    def __init__(self, message, line=None, col=None, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        where = f"{line}:{col}: " if line is not None else ""
        tail = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}{message}{tail}")


class ValidationError(CrystalloError):
    """Well-formed input that breaks an invariant (arity, range, names, ...)."""


class ArityError(ValidationError):
    pass


class DuplicateNameError(ValidationError):
    pass


class UnknownSymbolError(ValidationError):
    pass


class TableError(ValidationError):
    """Missing table, wrong table length or out-of-range entry."""


class NotAHomomorphism(ValidationError):
    pass


class CongruenceError(ValidationError):
    """A partition that is not compatible with the operations."""


class SpanError(ValidationError):
    """Data that does not form a punctual span."""


class SchemaMismatch(ValidationError):
    """Presentation does not match the expected equation schema."""


class UnboundVariable(CrystalloError):
    pass


class CapExceeded(CrystalloError):
    """A brute-force or materialization guard refused the input size."""


class MultipleCooperators(CrystalloError):
    """At least two cooperators exist, so the ambient category is not unital here."""

    def __init__(self, maps):
        self.maps = maps
        super().__init__(f"{len(maps)} cooperators found; expected at most one")


class BudgetExhausted(CrystalloError):
    """Search stopped at its node budget; partial results are attached."""

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)
