"""Local expansion kernel: Laurent series of an Expr in one variable about another.

Expansion substitutes z_a = z_b + t and rewrites every generator that mentions
z_a as a series in t whose coefficients are Exprs free of z_a.  The model
series (the p-function, its derivatives, and the odd quasi-periodic series)
have coefficients in the Eisenstein table G_{2k}; generators linking z_a to a
third variable Taylor-shift onto the (b, c) pair.

Antiholomorphic content: expanding the A-generator of z_a produces A(t) whose
conjugate part is dropped, leaving only -Y*t.  Residue-type consumers are
exactly insensitive to the dropped part (the residue of zbar^l * f vanishes
for meromorphic f), so the series is by construction "holomorphic in t".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coeff import CoeffPoly, eta1
from .errors import InvalidIndex, WindowTooSmall
from .expr import Expr, _raw, ag, rebase_aref, wp, zg

_G_CACHE = {}


def eisenstein_G(two_k: int) -> CoeffPoly:
    """Weierstrass Laurent coefficient G_{2k} in Q[I][E4, E6].

    G4 and G6 seed the table; higher indices follow the quadratic recursion
    that expresses G_{2k} through lower ones (k >= 4).
    """
    if two_k < 4 or two_k % 2:
        raise InvalidIndex(f"G_{two_k} is not defined (need an even index >= 4)")
    if two_k in _G_CACHE:
        return _G_CACHE[two_k]
    if two_k == 4:
        value = CoeffPoly({(4, 0, 1, 0, 0): Fraction(1, 720)})
    elif two_k == 6:
        value = CoeffPoly({(6, 0, 0, 1, 0): Fraction(-1, 30240)})
    else:
        k = two_k // 2
        acc = CoeffPoly.zero()
        for j in range(2, k - 1):
            acc = acc + eisenstein_G(2 * j) * eisenstein_G(2 * k - 2 * j) * (
                (2 * j - 1) * (2 * k - 2 * j - 1)
            )
        value = acc * Fraction(3, (2 * k + 1) * (k - 3) * (2 * k - 1))
    _G_CACHE[two_k] = value
    return value


_MODEL_CACHE = {}


def wp_model(k: int, hi: int) -> dict:
    """Coefficients of the k-th derivative of the p-function: {power: CoeffPoly}."""
    key = ("wp", k, hi)
    if key in _MODEL_CACHE:
        return _MODEL_CACHE[key]
    if k == 0:
        series = {-2: CoeffPoly.rational(1)}
        for m in range(1, hi // 2 + 1):
            if 2 * m <= hi:
                series[2 * m] = eisenstein_G(2 * m + 2) * (2 * m + 1)
    else:
        series = {}
        for power, coeff in wp_model(k - 1, hi + 1).items():
            if power != 0:
                series[power - 1] = coeff * power
        series = {p: c for p, c in series.items() if p <= hi}
    _MODEL_CACHE[key] = series
    return series


def z_model(hi: int) -> dict:
    """Coefficients of the odd quasi-periodic series: 1/t - e2*t - sum G t^(2m+1)."""
    key = ("z", hi)
    if key in _MODEL_CACHE:
        return _MODEL_CACHE[key]
    series = {-1: CoeffPoly.rational(1)}
    if hi >= 1:
        series[1] = -eta1()
    for m in range(1, (hi - 1) // 2 + 1):
        if 2 * m + 1 <= hi:
            series[2 * m + 1] = -eisenstein_G(2 * m + 2)
    _MODEL_CACHE[key] = series
    return series


@dataclass
class LaurentSeries:
    """Finite window of t-powers (t = z_a - z_b) with Expr coefficients."""

    a: int
    b: int
    lo: int
    hi: int
    coeffs: dict
    n: int
    aref: int

    def coefficient(self, power: int) -> Expr:
        if power < self.lo or power > self.hi:
            raise WindowTooSmall(
                f"power {power} outside window [{self.lo}, {self.hi}]"
            )
        return self.coeffs.get(power, Expr.constant(0, self.n, self.aref))

    def derivative(self) -> "LaurentSeries":
        out = {}
        for power, coeff in self.coeffs.items():
            if power != 0 and power - 1 >= self.lo:
                out[power - 1] = coeff * power
        return LaurentSeries(self.a, self.b, self.lo, self.hi - 1, out, self.n, self.aref)


def default_window(e: Expr, a: int, b: int) -> tuple:
    """Window heuristic [-P, P + D + 4]; REGINT_EXPANSION_ORDER raises the top."""
    import os

    from .expr import pole_order

    p = pole_order(e, a, b)
    hi = p + e.degree() + 4
    override = os.environ.get("REGINT_EXPANSION_ORDER")
    if override:
        hi = max(hi, int(override))
    return (-p, hi)


def expand(e: Expr, a: int, b: int, window: tuple | None = None) -> LaurentSeries:
    """Expand e in t = z_a - z_b; coefficients are Exprs not mentioning z_a."""
    if a == b:
        raise ValueError("cannot expand a variable about itself")
    if e.aref == a:
        e = rebase_aref(e, b)
    if window is None:
        window = default_window(e, a, b)
    lo, hi = window
    if lo > hi:
        raise WindowTooSmall(f"empty window [{lo}, {hi}]")

    n, aref = e.n, e.aref
    acc = {}
    for mono, coeff in e.terms.items():
        factors = []
        for gen, exp in mono:
            factors.extend([gen] * exp)
        mins = [_gen_min_power(g, a, b) for g in factors]
        total_min = sum(mins)
        prod = {0: Expr.constant(coeff, n, aref)}
        prod_min = 0
        tail_min = total_min
        for gen, gmin in zip(factors, mins):
            tail_min -= gmin
            # Powers above hi - tail_min can still be pulled back into the
            # window by the remaining factors' poles; cap there, not at hi.
            cap = hi - tail_min
            series = _gen_series(gen, a, b, cap - prod_min, n, aref)
            prod = _convolve(prod, series, cap)
            prod_min += gmin
        for power, val in prod.items():
            if lo <= power <= hi and not val.is_zero():
                cur = acc.get(power)
                acc[power] = val if cur is None else cur + val
    acc = {p: v for p, v in acc.items() if not v.is_zero()}
    return LaurentSeries(a, b, lo, hi, acc, n, aref)


def _convolve(s1: dict, s2: dict, hi: int) -> dict:
    out = {}
    for p1, c1 in s1.items():
        for p2, c2 in s2.items():
            p = p1 + p2
            if p > hi:
                continue
            cur = out.get(p)
            term = c1 * c2
            out[p] = term if cur is None else cur + term
    return out


def _gen_min_power(gen, a, b) -> int:
    kind = gen[0]
    if kind == "W" and {gen[1], gen[2]} == {a, b}:
        return -(gen[3] + 2)
    if kind == "Z" and {gen[1], gen[2]} == {a, b}:
        return -1
    return 0


def _gen_series(gen, a, b, hi, n, aref) -> dict:
    """Series of a single generator in t = z_a - z_b, as {power: Expr}."""
    kind = gen[0]
    const = lambda c: Expr.constant(c, n, aref)  # noqa: E731

    if kind == "W":
        _, x, y, k = gen
        if a not in (x, y):
            return {0: _raw({((gen, 1),): CoeffPoly.rational(1)}, n, aref)}
        sign = 1 if x == a else (-1) ** k
        c = y if x == a else x
        if c == b:
            return {
                p: const(v if sign == 1 else -v)
                for p, v in wp_model(k, hi).items()
                if p <= hi
            }
        out = {}
        fact = 1
        for j in range(0, hi + 1):
            if j:
                fact *= j
            term = wp(b, c, k + j, n=n, aref=aref) * Fraction(sign, fact)
            if not term.is_zero():
                out[j] = term
        return out

    if kind == "Z":
        _, x, y = gen
        if a not in (x, y):
            return {0: _raw({((gen, 1),): CoeffPoly.rational(1)}, n, aref)}
        sign = 1 if x == a else -1
        c = y if x == a else x
        if c == b:
            return {
                p: const(v if sign == 1 else -v)
                for p, v in z_model(hi).items()
                if p <= hi
            }
        out = {0: zg(b, c, n=n, aref=aref) * sign}
        if hi >= 1:
            out[1] = (-wp(b, c, 0, n=n, aref=aref) + const(-eta1())) * sign
        fact = 1
        for j in range(2, hi + 1):
            fact *= j
            term = wp(b, c, j - 1, n=n, aref=aref) * Fraction(-sign, fact)
            if not term.is_zero():
                out[j] = term
        return {p: v for p, v in out.items() if not v.is_zero()}

    if kind == "A":
        x = gen[1]
        if x != a:
            return {0: _raw({((gen, 1),): CoeffPoly.rational(1)}, n, aref)}
        # A(z_a - z_ref) = A(z_b - z_ref) + A(t); the conjugate part of A(t)
        # is dropped, leaving -Y*t.
        out = {}
        base = ag(b, n=n, aref=aref)
        if not base.is_zero():
            out[0] = base
        if hi >= 1:
            out[1] = const(-CoeffPoly.symbol("Y"))
        return out

    raise ValueError(f"cannot expand internal atom {gen!r}")
