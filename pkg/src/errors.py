# ------------------------------------------------------------- #
# Error hierarchy
# ------------------------------------------------------------- #
# Every error carries a stable machine code; the CLI prints it as
# {"error": code, "message": text}.


class BottError(ValueError):
    """Root of every error raised by the toolkit."""
    code = "bott-error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"error": self.code, "message": self.message}


class InvalidGridError(BottError):
    code = "invalid-grid"


class ShapeMismatchError(BottError):
    code = "shape-mismatch"


class GridMismatchError(ShapeMismatchError):
    code = "grid-mismatch"


class FamilyInvariantError(BottError):
    code = "invalid-family"


class GapViolationError(BottError):
    """Spectrum touches zero; names the worst grid point."""
    code = "gap-violation"

    def __init__(self, message: str, index=None, coordinates=None, gap: float = None):
        super().__init__(message)
        self.index = index
        self.coordinates = coordinates
        self.gap = gap


class RankJumpError(GapViolationError):
    code = "rank-jump"


class NotFlatError(BottError):
    code = "not-flat"


class ChiralityError(BottError):
    code = "chirality"


class GridTooCoarseError(BottError):
    code = "grid-too-coarse"


class SingularLinkError(BottError):
    code = "singular-link"


class SingularMatrixError(BottError):
    code = "singular-matrix"


class FormatError(BottError):
    code = "bhf-format"


class ExpressionError(BottError):
    code = "kring-syntax"


class ConfigError(BottError):
    code = "config"


class ParameterError(BottError):
    code = "invalid-parameter"
