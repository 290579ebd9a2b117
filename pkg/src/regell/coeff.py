"""Exact arithmetic core: multivariate polynomials over Q in the output symbols.

Every fully integrated quantity in this package is a ``CoeffPoly``: an exact
polynomial over arbitrary-precision rationals in the formal symbols

    I  = 2*pi*i   (weight 0; pi^2 is never a symbol, it is -I^2/4),
    E2, E4, E6    (Eisenstein series, weights 2, 4, 6),
    Y             (= -pi/Im(tau), weight 2).

The almost-holomorphic completion of E2 is not a stored symbol; it is the
combination E2hat = E2 - 12*Y*I^(-2), so the I-exponent of a monomial is
allowed to be negative (all engine-produced values keep it nonnegative).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ResidualY

Rational = Fraction

SYMBOLS = ("I", "E2", "E4", "E6", "Y")
_WEIGHTS = (0, 2, 4, 6, 2)
_ZERO_KEY = (0, 0, 0, 0, 0)


def _coerce(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


class CoeffPoly:
    """Sparse exact polynomial in (I, E2, E4, E6, Y); immutable by convention."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, val in terms.items():
                val = _coerce(val)
                if val:
                    clean[tuple(key)] = val
        self._terms = clean

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "CoeffPoly":
        return CoeffPoly()

    @staticmethod
    def rational(value) -> "CoeffPoly":
        value = _coerce(value)
        return CoeffPoly({_ZERO_KEY: value}) if value else CoeffPoly()

    @staticmethod
    def symbol(name: str, power: int = 1) -> "CoeffPoly":
        idx = SYMBOLS.index(name)
        key = [0] * len(SYMBOLS)
        key[idx] = power
        return CoeffPoly({tuple(key): Fraction(1)})

    # -- inspection --------------------------------------------------------

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(key == _ZERO_KEY for key in self._terms)

    def rational_value(self) -> Fraction:
        if not self._terms:
            return Fraction(0)
        if not self.is_rational():
            raise ValueError(f"not a pure rational: {self}")
        return self._terms[_ZERO_KEY]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CoeffPoly.rational(other)
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"CoeffPoly({self.render()})"

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CoeffPoly.rational(other)
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        terms = dict(self._terms)
        for key, val in other._terms.items():
            acc = terms.get(key, 0) + val
            if acc:
                terms[key] = acc
            else:
                terms.pop(key, None)
        out = CoeffPoly.__new__(CoeffPoly)
        out._terms = terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = CoeffPoly.__new__(CoeffPoly)
        out._terms = {key: -val for key, val in self._terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CoeffPoly.rational(other)
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = _coerce(other)
            if not other:
                return CoeffPoly()
            out = CoeffPoly.__new__(CoeffPoly)
            out._terms = {key: val * other for key, val in self._terms.items()}
            return out
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        terms = {}
        for k1, v1 in self._terms.items():
            for k2, v2 in other._terms.items():
                key = tuple(a + b for a, b in zip(k1, k2))
                acc = terms.get(key, 0) + v1 * v2
                if acc:
                    terms[key] = acc
                else:
                    terms.pop(key, None)
        out = CoeffPoly.__new__(CoeffPoly)
        out._terms = terms
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, int):
            other = Fraction(other)
        if isinstance(other, Fraction):
            return self * (1 / other)
        raise TypeError("can only divide a CoeffPoly by a rational")

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise ValueError("negative powers are not supported")
        result = CoeffPoly.rational(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # -- structure maps ----------------------------------------------------

    def partial_Y(self) -> "CoeffPoly":
        """Formal partial derivative in the symbol Y."""
        terms = {}
        for key, val in self._terms.items():
            y = key[4]
            if y:
                terms[key[:4] + (y - 1,)] = val * y
        return CoeffPoly(terms)

    def holomorphic_limit(self) -> "CoeffPoly":
        """Degree-0 part in Y."""
        return CoeffPoly({k: v for k, v in self._terms.items() if k[4] == 0})

    def y_coefficient(self, power: int) -> "CoeffPoly":
        return CoeffPoly(
            {k[:4] + (0,): v for k, v in self._terms.items() if k[4] == power}
        )

    def y_degree(self) -> int:
        return max((k[4] for k in self._terms), default=0)

    def weight(self):
        """Common weight of all monomials, or None if mixed (0 for the zero poly)."""
        weights = {
            sum(e * w for e, w in zip(key, _WEIGHTS)) for key in self._terms
        }
        if not weights:
            return 0
        if len(weights) == 1:
            return weights.pop()
        return None

    def weights(self):
        """Sorted tuple of distinct monomial weights."""
        return tuple(
            sorted({sum(e * w for e, w in zip(key, _WEIGHTS)) for key in self._terms})
        )

    def to_almost_holomorphic(self) -> "CoeffPoly":
        """Rewrite through E2 -> E2hat + 12*Y/I^2 and demand the Y-part cancel.

        The returned polynomial uses the E2 slot for E2hat.  If a Y-part
        survives, the input was not almost-holomorphic and ResidualY carries
        the offending remainder (in the E2hat basis).
        """
        twelve_y = CoeffPoly({(-2, 0, 0, 0, 1): Fraction(12)})
        out = CoeffPoly()
        for key, val in self._terms.items():
            i, e2, e4, e6, y = key
            base = CoeffPoly({(i, 0, e4, e6, y): val})
            if e2:
                hat = CoeffPoly({(0, 1, 0, 0, 0): Fraction(1)}) + twelve_y
                base = base * hat ** e2
            out = out + base
        residual = out - out.holomorphic_limit()
        if residual:
            raise ResidualY(residual)
        return out.holomorphic_limit()

    # -- rendering ---------------------------------------------------------

    def render(self) -> str:
        """Canonical text form; feeds both the CLI and the test goldens."""
        if not self._terms:
            return "0"

        def sort_key(key):
            i, e2, e4, e6, y = key
            return (y, -e2, -e4, -e6, -i)

        parts = []
        for key in sorted(self._terms, key=sort_key):
            val = self._terms[key]
            body = _render_monomial(key, val)
            if not parts:
                parts.append(body if val > 0 else "-" + body)
            else:
                parts.append((" + " if val > 0 else " - ") + body)
        return "".join(parts)

    def __str__(self):
        return self.render()


def _render_monomial(key, val) -> str:
    factors = []
    for name, exp in zip(SYMBOLS, key):
        if exp == 1:
            factors.append(name)
        elif exp:
            factors.append(f"{name}^{exp}")
    num, den = abs(val.numerator), val.denominator
    if not factors:
        return f"{num}/{den}" if den != 1 else f"{num}"
    body = "*".join(factors)
    if num != 1:
        body = f"{num}*{body}"
    if den != 1:
        body = f"{body}/{den}"
    return body


def poly_arith(a: CoeffPoly, b: CoeffPoly, kind: str) -> CoeffPoly:
    """Exact ring operation; kind is one of add, sub, mul."""
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown operation kind: {kind}")


# Shared symbol constants.
ONE = CoeffPoly.rational(1)
IOTA = CoeffPoly.symbol("I")
E2 = CoeffPoly.symbol("E2")
E4 = CoeffPoly.symbol("E4")
E6 = CoeffPoly.symbol("E6")
Y = CoeffPoly.symbol("Y")


def eta1() -> CoeffPoly:
    """Linear Taylor coefficient of the odd quasi-periodic series: -I^2*E2/12.

    Classically eta_1 = pi^2*E2/3; with pi^2 = -I^2/4 this is -I^2*E2/12.
    """
    return CoeffPoly({(2, 1, 0, 0, 0): Fraction(-1, 12)})
