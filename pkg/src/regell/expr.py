"""Symbolic functions on configuration spaces of an elliptic curve.

An ``Expr`` is a polynomial in the generators

    W(a,b;k)  ->  k-th derivative of the Weierstrass p-function at z_a - z_b,
    Z(a,b)    ->  quasi-periodic zeta combination Z(z_a - z_b),
    A(b)      ->  antiholomorphic correction A(z_b - z_ref),

with CoeffPoly coefficients.  Normal form: pairs are stored with a < b (signs
of odd generators absorbed into the coefficient), W-derivative order k is 0 or
1 (higher derivatives and squares of W(.,.;1) are reduced through the
Weierstrass cubic), and A-generators live in the reduced basis relative to a
reference variable ``aref`` (A(aref) = 0, using additivity of A).

Cross-diagonal relations (the zeta addition formula and its consequences) are
deliberately not reduced; semantic equality is decided by ``expr_equal`` via
nested Laurent expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coeff import CoeffPoly, eta1
from .errors import TruncationInconclusive

# Generator keys are plain tuples so monomials sort structurally:
#   ("A", b) | ("W", a, b, k) | ("X", tag) | ("Z", a, b)
# ("X", tag) is an internal formal atom used transiently by algorithms
# (collection coordinates); it never appears in user-visible expressions.

_GZ2 = CoeffPoly({(4, 0, 1, 0, 0): Fraction(1, 12)})     # I^4*E4/12
_GZ3 = CoeffPoly({(6, 0, 0, 1, 0): Fraction(-1, 216)})   # -I^6*E6/216


def _coerce_coeff(value) -> CoeffPoly:
    if isinstance(value, CoeffPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return CoeffPoly.rational(value)
    raise TypeError(f"cannot use {type(value).__name__} as a coefficient")


@dataclass(frozen=True)
class Mixed:
    """Marker result of weight(): the multiset of weights that occurred."""

    weights: tuple

    def __repr__(self):
        return f"Mixed{set(self.weights)}"


class Expr:
    """Element of the configuration-space function ring (always normalized)."""

    __slots__ = ("terms", "n", "aref")

    def __init__(self, terms, n: int, aref: int | None = None):
        if n < 1:
            raise ValueError("arity must be positive")
        aref = n if aref is None else aref
        if not 1 <= aref <= n:
            raise ValueError("A-basis reference out of range")
        self.n = n
        self.aref = aref
        self.terms = _normalize_terms(terms, n, aref)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(value, n: int, aref: int | None = None) -> "Expr":
        value = _coerce_coeff(value)
        return Expr({(): value} if value else {}, n, aref)

    @staticmethod
    def from_gen(gen: tuple, n: int, aref: int | None = None) -> "Expr":
        return Expr({((gen, 1),): CoeffPoly.rational(1)}, n, aref)

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not mono for mono in self.terms)

    def constant_value(self) -> CoeffPoly:
        acc = CoeffPoly.zero()
        for mono, coeff in self.terms.items():
            if mono:
                raise ValueError(f"not a constant: {self}")
            acc = acc + coeff
        return acc

    def mentions(self) -> frozenset:
        """Variable indices that occur in some generator (A-gens mention aref)."""
        seen = set()
        for mono in self.terms:
            for gen, _ in mono:
                if gen[0] == "W" or gen[0] == "Z":
                    seen.add(gen[1])
                    seen.add(gen[2])
                elif gen[0] == "A":
                    seen.add(gen[1])
                    seen.add(self.aref)
        return frozenset(seen)

    def gen_kinds(self) -> frozenset:
        return frozenset(gen[0] for mono in self.terms for gen, _ in mono)

    def has_Y(self) -> bool:
        return any(key[4] for _, coeff in self.terms.items() for key in coeff._terms)

    def has_E2(self) -> bool:
        return any(key[1] for _, coeff in self.terms.items() for key in coeff._terms)

    def degree(self) -> int:
        """Total generator degree (max over monomials)."""
        return max((sum(e for _, e in mono) for mono in self.terms), default=0)

    def __eq__(self, other):
        """Structural equality in the same presentation (not semantic)."""
        if not isinstance(other, Expr):
            return NotImplemented
        if self.n != other.n:
            return False
        if self.aref != other.aref:
            other = rebase_aref(other, self.aref)
        return self.terms == other.terms

    def __repr__(self):
        return f"Expr({self.render()}, n={self.n}, aref={self.aref})"

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms):
            coeff = self.terms[mono]
            body = "*".join(_render_gen(gen, e, self.aref) for gen, e in mono)
            ctxt = coeff.render()
            if not mono:
                frag = ctxt
            elif ctxt == "1":
                frag = body
            elif ctxt == "-1":
                frag = "-" + body
            elif ("+" in ctxt or " - " in ctxt or (ctxt.startswith("-") and "-" in ctxt[1:])):
                frag = f"({ctxt})*{body}"
            else:
                frag = f"{ctxt}*{body}"
            parts.append(frag)
        out = parts[0]
        for frag in parts[1:]:
            out += (" - " + frag[1:]) if frag.startswith("-") else (" + " + frag)
        return out

    def __str__(self):
        return self.render()

    # -- ring operations ---------------------------------------------------

    def _match(self, other: "Expr") -> "Expr":
        if self.n != other.n:
            raise ValueError("arity mismatch")
        if self.aref != other.aref:
            other = rebase_aref(other, self.aref)
        return other

    def __add__(self, other):
        if isinstance(other, (int, Fraction, CoeffPoly)):
            other = Expr.constant(other, self.n, self.aref)
        if not isinstance(other, Expr):
            return NotImplemented
        other = self._match(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = terms.get(mono, CoeffPoly.zero()) + coeff
            if acc:
                terms[mono] = acc
            else:
                terms.pop(mono, None)
        return _raw(terms, self.n, self.aref)

    __radd__ = __add__

    def __neg__(self):
        return _raw({m: -c for m, c in self.terms.items()}, self.n, self.aref)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, CoeffPoly)):
            other = Expr.constant(other, self.n, self.aref)
        if not isinstance(other, Expr):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CoeffPoly)):
            other = _coerce_coeff(other)
            if not other:
                return Expr.constant(0, self.n, self.aref)
            return _raw(
                {m: c * other for m, c in self.terms.items()}, self.n, self.aref
            )
        if not isinstance(other, Expr):
            return NotImplemented
        other = self._match(other)
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _merge_monomials(m1, m2)
                acc = terms.get(mono, CoeffPoly.zero()) + c1 * c2
                if acc:
                    terms[mono] = acc
                else:
                    terms.pop(mono, None)
        return Expr(terms, self.n, self.aref)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, int):
            other = Fraction(other)
        if isinstance(other, Fraction):
            return self * (1 / other)
        raise TypeError("can only divide an Expr by a rational")

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise ValueError("negative powers are not supported")
        result = Expr.constant(1, self.n, self.aref)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result


def _raw(terms, n, aref):
    """Build an Expr from already-normalized terms (skips re-normalization)."""
    out = Expr.__new__(Expr)
    out.n = n
    out.aref = aref
    out.terms = terms
    return out


def _merge_monomials(m1, m2):
    counts = {}
    for gen, e in m1:
        counts[gen] = counts.get(gen, 0) + e
    for gen, e in m2:
        counts[gen] = counts.get(gen, 0) + e
    return tuple(sorted(counts.items()))


def _render_gen(gen, exp, aref) -> str:
    kind = gen[0]
    if kind == "W":
        _, a, b, k = gen
        body = f"wp'({a},{b})" if k == 1 else f"wp({a},{b})"
    elif kind == "Z":
        body = f"Z({gen[1]},{gen[2]})"
    elif kind == "A":
        body = f"A({gen[1]},{aref})"
    else:
        body = f"X[{gen[1]}]"
    return f"{body}^{exp}" if exp != 1 else body


# -- generator constructors (carry the index-order sign conventions) --------


def wp(a: int, b: int, k: int = 0, *, n: int, aref: int | None = None) -> Expr:
    """W-generator: k-th derivative of the p-function at z_a - z_b."""
    _check_pair(a, b, n)
    sign = 1
    if a > b:
        a, b = b, a
        sign = (-1) ** k
    e = Expr.from_gen(("W", a, b, k), n, aref)
    return e if sign == 1 else -e


def zg(a: int, b: int, *, n: int, aref: int | None = None) -> Expr:
    """Z-generator: the quasi-periodic odd combination at z_a - z_b."""
    _check_pair(a, b, n)
    sign = 1
    if a > b:
        a, b = b, a
        sign = -1
    e = Expr.from_gen(("Z", a, b), n, aref)
    return e if sign == 1 else -e


def ag(b: int, *, n: int, aref: int | None = None) -> Expr:
    """Reduced-basis A-generator A(z_b - z_aref); zero when b is the reference."""
    aref_val = n if aref is None else aref
    if not 1 <= b <= n:
        raise ValueError(f"index {b} out of range for arity {n}")
    if b == aref_val:
        return Expr.constant(0, n, aref_val)
    return Expr.from_gen(("A", b), n, aref_val)


def ag_pair(a: int, b: int, *, n: int, aref: int | None = None) -> Expr:
    """A(z_a - z_b) for an arbitrary pair, reduced by additivity."""
    _check_pair(a, b, n)
    return ag(a, n=n, aref=aref) - ag(b, n=n, aref=aref)


def zhat(a: int, b: int, *, n: int, aref: int | None = None) -> Expr:
    """The almost-elliptic combination Zhat(z_a - z_b) = Z + A."""
    return zg(a, b, n=n, aref=aref) + ag_pair(a, b, n=n, aref=aref)


def e2hat_dressed(*, n: int, aref: int | None = None) -> Expr:
    """The weight-2 almost-holomorphic constant I^2*E2hat = I^2*E2 - 12*Y."""
    value = CoeffPoly({(2, 1, 0, 0, 0): Fraction(1), (0, 0, 0, 0, 1): Fraction(-12)})
    return Expr.constant(value, n, aref)


def _check_pair(a, b, n):
    if a == b:
        raise ValueError(f"generator indices must differ, got ({a},{b})")
    if not (1 <= a <= n and 1 <= b <= n):
        raise ValueError(f"indices ({a},{b}) out of range for arity {n}")


# -- normalization -----------------------------------------------------------


def _wp_reduction_table(k: int):
    """p^(k) as a polynomial in (p, p'): dict {(i, j): CoeffPoly}, j <= 1."""
    table = _WP_TABLES
    while len(table) <= k:
        prev = table[-1]
        nxt = {}

        def _acc(key, val):
            acc = nxt.get(key, CoeffPoly.zero()) + val
            if acc:
                nxt[key] = acc
            else:
                nxt.pop(key, None)

        for (i, j), coeff in prev.items():
            if i:
                # d(p^i)/dz = i p^(i-1) p'
                if j + 1 >= 2:
                    # p'^2 = 4p^3 - g2 p - g3
                    _acc((i - 1 + 3, j - 1), coeff * (4 * i))
                    _acc((i - 1 + 1, j - 1), coeff * i * (-_GZ2))
                    _acc((i - 1, j - 1), coeff * i * (-_GZ3))
                else:
                    _acc((i - 1, j + 1), coeff * i)
            if j:
                # d(p'^j)/dz with j = 1: p'' = 6p^2 - g2/2
                _acc((i + 2, j - 1), coeff * 6)
                _acc((i, j - 1), coeff * (-_GZ2 / 2))
        table.append(nxt)
    return table[k]


_WP_TABLES = [
    {(1, 0): CoeffPoly.rational(1)},
    {(0, 1): CoeffPoly.rational(1)},
]


def _normalize_terms(terms, n, aref):
    """Apply the Weierstrass reductions until every monomial is in normal form."""
    out = {}
    stack = []
    for mono, coeff in terms.items():
        coeff = _coerce_coeff(coeff)
        if coeff:
            stack.append((tuple(sorted(mono)), coeff))

    while stack:
        mono, coeff = stack.pop()
        reducible = None
        for idx, (gen, exp) in enumerate(mono):
            if gen[0] != "W":
                if gen[0] == "A" and gen[1] == aref:
                    raise ValueError("A-generator at the reference index")
                _validate_gen(gen, n)
                continue
            _validate_gen(gen, n)
            if gen[3] >= 2:
                reducible = (idx, gen, 1, _wp_reduction_table(gen[3]))
                break
            if gen[3] == 1 and exp >= 2:
                square = {
                    (3, 0): CoeffPoly.rational(4),
                    (1, 0): -_GZ2,
                    (0, 0): -_GZ3,
                }
                reducible = (idx, gen, 2, square)
                break
        if reducible is None:
            acc = out.get(mono, CoeffPoly.zero()) + coeff
            if acc:
                out[mono] = acc
            else:
                out.pop(mono, None)
            continue

        idx, gen, used, table = reducible
        a, b = gen[1], gen[2]
        rest = list(mono)
        if mono[idx][1] - used:
            rest[idx] = (gen, mono[idx][1] - used)
        else:
            del rest[idx]
        for (i, j), tab_coeff in table.items():
            counts = dict(rest)
            if i:
                key = ("W", a, b, 0)
                counts[key] = counts.get(key, 0) + i
            if j:
                key = ("W", a, b, 1)
                counts[key] = counts.get(key, 0) + j
            stack.append((tuple(sorted(counts.items())), coeff * tab_coeff))
    return out


def _validate_gen(gen, n):
    kind = gen[0]
    if kind in ("W", "Z"):
        a, b = gen[1], gen[2]
        if not (1 <= a < b <= n):
            raise ValueError(f"malformed generator {gen} for arity {n}")
    elif kind == "A":
        if not 1 <= gen[1] <= n:
            raise ValueError(f"malformed generator {gen} for arity {n}")
    elif kind != "X":
        raise ValueError(f"unknown generator kind {gen!r}")


def normalize(e: Expr) -> Expr:
    """Re-apply the normal form (idempotent; Exprs are normalized on build)."""
    return Expr(e.terms, e.n, e.aref)


# -- substitution and collection ---------------------------------------------


def substitute_gens(e: Expr, mapping: dict) -> Expr:
    """Simultaneously replace generators by Exprs (polynomial substitution)."""
    if not mapping:
        return e
    out = Expr.constant(0, e.n, e.aref)
    for mono, coeff in e.terms.items():
        untouched = tuple((g, x) for g, x in mono if g not in mapping)
        factor = _raw({untouched: coeff}, e.n, e.aref)
        for g, x in mono:
            if g in mapping:
                replacement = mapping[g]
                if replacement.aref != e.aref or replacement.n != e.n:
                    raise ValueError("substitution target in a different presentation")
                factor = factor * replacement ** x
        out = out + factor
    return out


def collect_by_gen(e: Expr, gen: tuple) -> dict:
    """Split e as a polynomial in one generator: {power: coefficient Expr}."""
    parts = {}
    for mono, coeff in e.terms.items():
        power = 0
        rest = []
        for g, x in mono:
            if g == gen:
                power = x
            else:
                rest.append((g, x))
        bucket = parts.setdefault(power, {})
        key = tuple(rest)
        acc = bucket.get(key, CoeffPoly.zero()) + coeff
        if acc:
            bucket[key] = acc
        else:
            bucket.pop(key, None)
    return {
        power: _raw(bucket, e.n, e.aref) for power, bucket in parts.items() if bucket
    }


def rebase_aref(e: Expr, new_ref: int) -> Expr:
    """Rewrite the A-basis relative to a new reference variable (exact)."""
    if new_ref == e.aref:
        return e
    if not 1 <= new_ref <= e.n:
        raise ValueError("reference out of range")
    old = e.aref
    mapping = {}
    gens = {g for mono in e.terms for g, _ in mono if g[0] == "A"}
    for gen in gens:
        b = gen[1]
        if b == new_ref:
            repl = -ag(old, n=e.n, aref=new_ref)
        else:
            repl = ag(b, n=e.n, aref=new_ref) - ag(old, n=e.n, aref=new_ref)
        mapping[gen] = repl
    shell = _raw(dict(e.terms), e.n, new_ref)
    return substitute_gens(shell, mapping)


# -- gradings and derivations -------------------------------------------------


def _gen_weight(gen) -> int:
    kind = gen[0]
    if kind == "W":
        return 2 + gen[3]
    if kind in ("Z", "A"):
        return 1
    raise ValueError(f"internal atom {gen!r} has no weight")


def weight(e: Expr):
    """Common weight of all monomials, or Mixed with the multiset of weights."""
    seen = set()
    for mono, coeff in e.terms.items():
        base = sum(_gen_weight(g) * x for g, x in mono)
        seen.update(base + w for w in coeff.weights())
    if not seen:
        return 0
    if len(seen) == 1:
        return seen.pop()
    return Mixed(tuple(sorted(seen)))


def d_gen(e: Expr, gen: tuple) -> Expr:
    """Formal partial derivative with respect to a single generator."""
    terms = {}
    for mono, coeff in e.terms.items():
        for idx, (g, x) in enumerate(mono):
            if g != gen:
                continue
            rest = list(mono)
            if x > 1:
                rest[idx] = (g, x - 1)
            else:
                del rest[idx]
            key = tuple(rest)
            acc = terms.get(key, CoeffPoly.zero()) + coeff * x
            if acc:
                terms[key] = acc
            else:
                terms.pop(key, None)
    return _raw(terms, e.n, e.aref)


def d_Y(e: Expr) -> Expr:
    """Partial derivative in the symbol Y (A-generators held fixed)."""
    terms = {}
    for mono, coeff in e.terms.items():
        d = coeff.partial_Y()
        if d:
            terms[mono] = d
    return _raw(terms, e.n, e.aref)


def d_A(e: Expr, b: int) -> Expr:
    """Partial derivative in the reduced-basis generator A(b)."""
    if b == e.aref:
        raise ValueError("cannot differentiate in the reference A-generator")
    return d_gen(e, ("A", b))


def d_z(e: Expr, a: int) -> Expr:
    """Holomorphic derivative in the variable z_a (Leibniz over generators)."""
    if not 1 <= a <= e.n:
        raise ValueError("variable out of range")
    result = Expr.constant(0, e.n, e.aref)
    minus_e2 = Expr.constant(-eta1(), e.n, e.aref)
    y_const = Expr.constant(CoeffPoly.symbol("Y"), e.n, e.aref)
    for mono, coeff in e.terms.items():
        for idx, (g, x) in enumerate(mono):
            kind = g[0]
            if kind == "W":
                if a == g[1]:
                    dgen = wp(g[1], g[2], g[3] + 1, n=e.n, aref=e.aref)
                elif a == g[2]:
                    dgen = -wp(g[1], g[2], g[3] + 1, n=e.n, aref=e.aref)
                else:
                    continue
            elif kind == "Z":
                if a == g[1]:
                    dgen = -wp(g[1], g[2], 0, n=e.n, aref=e.aref) + minus_e2
                elif a == g[2]:
                    dgen = wp(g[1], g[2], 0, n=e.n, aref=e.aref) - minus_e2
                else:
                    continue
            elif kind == "A":
                if a == g[1]:
                    dgen = -y_const
                elif a == e.aref:
                    dgen = y_const
                else:
                    continue
            else:
                continue
            rest = list(mono)
            if x > 1:
                rest[idx] = (g, x - 1)
            else:
                del rest[idx]
            result = result + dgen * _raw({tuple(rest): coeff * x}, e.n, e.aref)
    return result


# -- ring membership tests -----------------------------------------------------


def is_elliptic(e: Expr) -> bool:
    """No Z/A generators and no Y in the coefficients (E-symbols allowed)."""
    kinds = e.gen_kinds()
    return "Z" not in kinds and "A" not in kinds and "X" not in kinds and not e.has_Y()


def is_quasi_elliptic(e: Expr) -> bool:
    """No A generators and no Y in the coefficients."""
    kinds = e.gen_kinds()
    return "A" not in kinds and "X" not in kinds and not e.has_Y()


def almost_elliptic_check(e: Expr) -> bool:
    """True iff e is a polynomial in the shift-invariant Zhat and E2hat combos.

    Invariance is decided by vanishing of the infinitesimal shift generators:
    one vector field per non-reference variable b (moving A(b) against the
    Z-generators through b), plus the E2/Y direction for E2hat.
    """
    if "X" in e.gen_kinds():
        return False
    # E2hat direction: d/dE2 + (I^2/12) d/dY annihilates polynomials in E2hat.
    iota2 = CoeffPoly.symbol("I", 2)
    for coeff in e.terms.values():
        shifted = _coeff_dE2(coeff) + iota2 * coeff.partial_Y() / 12
        if shifted:
            return False
    # Zhat directions.
    zgens = {g for mono in e.terms for g, _ in mono if g[0] == "Z"}
    agens = {g[1] for mono in e.terms for g, _ in mono if g[0] == "A"}
    candidates = set(agens)
    for g in zgens:
        candidates.update((g[1], g[2]))
    candidates.discard(e.aref)
    for b in candidates:
        field = d_gen(e, ("A", b))
        for g in zgens:
            if g[2] == b:
                field = field + d_gen(e, g)
            elif g[1] == b:
                field = field - d_gen(e, g)
        if not field.is_zero():
            return False
    return True


def _coeff_dE2(p: CoeffPoly) -> CoeffPoly:
    terms = {}
    for key, val in p.items():
        if key[1]:
            new = (key[0], key[1] - 1) + key[2:]
            terms[new] = val * key[1]
    return CoeffPoly(terms)


# -- semantic equality ---------------------------------------------------------


def pole_order(e: Expr, a: int, b: int) -> int:
    """Maximal pole order of e along the diagonal z_a = z_b."""
    worst = 0
    for mono in e.terms:
        order = 0
        for g, x in mono:
            if g[0] == "W" and {g[1], g[2]} == {a, b}:
                order += (g[3] + 2) * x
            elif g[0] == "Z" and {g[1], g[2]} == {a, b}:
                order += x
        worst = max(worst, order)
    return worst


def recommended_order(e: Expr) -> int:
    """Expansion order that makes the nested zero test conclusive."""
    max_pole = 0
    for a in range(1, e.n):
        for b in range(a + 1, e.n + 1):
            max_pole = max(max_pole, pole_order(e, a, b))
    return max_pole + e.degree() + 4


def expr_equal(e1: Expr, e2: Expr, order: int | None = None) -> bool:
    """Semantic equality via nested Laurent expansion along z_1, z_2, ...

    Structural equality is the fast path.  Otherwise the difference is
    expanded variable by variable (z_a about z_{a+1}) and every window
    coefficient must vanish.  A pass below the recommended order raises
    TruncationInconclusive rather than claiming equality.
    """
    from . import laurent

    if e1.n != e2.n:
        raise ValueError("arity mismatch")
    if e2.aref != e1.aref:
        e2 = rebase_aref(e2, e1.aref)
    if e1.terms == e2.terms:
        return True
    diff = e1 - e2
    if diff.aref != diff.n:
        diff = rebase_aref(diff, diff.n)
    bound = recommended_order(diff)
    n_order = bound if order is None else order

    def vanishes(e: Expr) -> bool:
        if not e.gen_kinds():
            return e.is_zero()
        a = min(e.mentions())
        series = laurent.expand(
            e, a, a + 1, window=(-pole_order(e, a, a + 1), n_order)
        )
        return all(vanishes(c) for c in series.coeffs.values())

    result = vanishes(diff)
    if result and n_order < bound:
        raise TruncationInconclusive(
            f"difference vanished to order {n_order}, but order {bound} is needed"
        )
    return result
