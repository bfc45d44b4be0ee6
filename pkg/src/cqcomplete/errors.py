class CQError(Exception):
    """Base class for reasoning errors."""


class UnsafeQuery(CQError):
    pass


class ArityMismatch(CQError):
    pass


class CyclicTCS(CQError):
    pass


class BoundsTooLarge(CQError):
    pass


class ParseError(CQError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)
