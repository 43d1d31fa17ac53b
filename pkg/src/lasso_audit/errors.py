"""Exception taxonomy shared by all modules.

Every error raised by this package derives from AuditError so callers can
catch one base class at the CLI boundary.
"""


class AuditError(Exception):
    pass


class InvalidParameter(AuditError):
    pass


class ParseError(AuditError):
    """Malformed input file; carries 1-based line and column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class CapExceeded(AuditError):
    """An enumeration would exceed its configured cap; carries the required count."""

    def __init__(self, required, cap, what="enumeration"):
        self.required = required
        self.cap = cap
        super().__init__(f"{what} needs {required} items, cap is {cap}; raise the cap to proceed")


class MaxItersExceeded(AuditError):
    """Iterative solver hit its iteration budget; carries the best iterate found."""

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class IterationLimit(AuditError):
    pass


class ZeroDiagonal(AuditError):
    pass


class SingularBlock(AuditError):
    pass


class SingularUniformEigenvalue(AuditError):
    pass


class AllSubmatricesSingular(AuditError):
    pass


class DenominatorNonPositive(AuditError):
    pass


class NonpositiveDenominator(AuditError):
    pass


class MissingNoise(AuditError):
    pass


class MissingInput(AuditError):
    def __init__(self, edge_id, key):
        self.edge_id = edge_id
        self.key = key
        super().__init__(f"edge {edge_id} needs input '{key}' which was not supplied and cannot be computed")
