"""Exception types shared across the engine."""


class RegellError(Exception):
    """Base class for all engine errors."""


class ResidualY(RegellError):
    """Input is not almost-holomorphic: a Y-part survives the E2 rewrite."""

    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"residual Y-part after rewrite: {residual}")


class NotElliptic(RegellError):
    """Operation requires an elliptic input (no Z, no A, no Y)."""


class NotQuasiElliptic(RegellError):
    """Operation requires a quasi-elliptic input (no A, no Y)."""


class NotAlmostElliptic(RegellError):
    """Operation requires an almost-elliptic input (Zhat/E2hat combinations only)."""


class NonConstantRemainder(RegellError):
    """A fully iterated integral left symbolic generators behind (engine bug)."""


class TruncationInconclusive(RegellError):
    """expr_equal ran below the recommended expansion order and found no difference."""


class WindowTooSmall(RegellError):
    """Requested Laurent window does not cover the consumer's needs."""


class InvalidIndex(RegellError):
    """Index outside the supported range (odd or too-small Eisenstein index, bad variable)."""


class InvalidChain(RegellError):
    """Chain data violates the j < parent(j) constraint."""


class ArityTooSmall(RegellError):
    """Operation needs at least two points on the curve."""


class TruncationOverflow(RegellError):
    """q-oracle intermediate support left the truncation lattice."""


class UnsupportedGenerator(RegellError):
    """Generator has no holomorphic Fourier expansion (A-part, Y)."""


class ParseError(RegellError):
    """Syntax error in the expression grammar, with position."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (at position {position})")
