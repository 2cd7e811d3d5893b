"""Failure types shared across the library."""


class NumericalError(RuntimeError):
    """A numerical kernel failed: SVD did not converge, or iterates went non-finite."""


class IllPosedError(RuntimeError):
    """The instance is too degenerate to certify or solve.

    Raised when the tangent-observation geometry is (near) singular: the
    composed projector norm reaches 1, conjugate gradient stagnates, or an
    operator-norm precondition fails.
    """


class ParseError(ValueError):
    """A file failed to parse; pinpoints the offending location.

    ``line`` and ``col`` are 1-based; col 0 means the whole line.
    """

    def __init__(self, path, line: int, col: int, message: str):
        self.path = str(path)
        self.line = int(line)
        self.col = int(col)
        self.message = message
        super().__init__(f"{self.path}:{self.line}:{self.col}: {message}")
