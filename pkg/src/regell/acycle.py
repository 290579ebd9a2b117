"""Ordered A-cycle integrals via anti-difference primitives.

Shifting an integration variable by the lattice period tau moves each of its
Z-generators by the period constant I; the difference operator delta measures
that shift.  An A-cycle integral of a quasi-elliptic function equals the sum
of residues of any delta-primitive over the not-yet-integrated diagonals, and
the primitive of a power of Z is a Bernoulli polynomial in Z/I.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

from .coeff import CoeffPoly
from .errors import NonConstantRemainder, NotElliptic, NotQuasiElliptic
from .expr import (
    Expr,
    collect_by_gen,
    is_elliptic,
    is_quasi_elliptic,
    substitute_gens,
    zg,
)
from .forests import tree_factorial
from .residues import residue

_W = ("X", "z-head")


def _require_quasi(e: Expr):
    if not is_quasi_elliptic(e):
        raise NotQuasiElliptic(f"input has A/Y content: {e}")


def _z_shift_map(e: Expr, a: int):
    """Z-generators of e that mention z_a, with the sign of their period shift."""
    gens = {}
    for mono in e.terms:
        for g, _ in mono:
            if g[0] == "Z" and a in (g[1], g[2]):
                gens[g] = 1 if g[1] == a else -1
    return gens


def delta(e: Expr, a: int) -> Expr:
    """Difference operator in z_a: (shift by -tau minus identity) / (2*pi*i)."""
    _require_quasi(e)
    iota = CoeffPoly.symbol("I")
    gens = _z_shift_map(e, a)
    if not gens:
        return Expr.constant(0, e.n, e.aref)
    mapping = {
        g: Expr.from_gen(g, e.n, e.aref) + Expr.constant(iota * sign, e.n, e.aref)
        for g, sign in gens.items()
    }
    shifted = substitute_gens(e, mapping)
    diff = shifted - e
    return _divide_by_iota(diff)


def _divide_by_iota(e: Expr) -> Expr:
    terms = {}
    for mono, coeff in e.terms.items():
        shifted = CoeffPoly(
            {(key[0] - 1,) + key[1:]: val for key, val in coeff.items()}
        )
        terms[mono] = shifted
    return Expr(terms, e.n, e.aref)


_BERN_CACHE = [Fraction(1)]


def bernoulli_number(m: int) -> Fraction:
    """Bernoulli numbers with B_1 = -1/2 (the difference-equation convention)."""
    while len(_BERN_CACHE) <= m:
        k = len(_BERN_CACHE)
        from math import comb

        acc = Fraction(0)
        for j in range(k):
            acc += comb(k + 1, j) * _BERN_CACHE[j]
        _BERN_CACHE.append(-acc / (k + 1))
    return _BERN_CACHE[m]


def _bernoulli_primitive(k: int, w: Expr) -> Expr:
    """Anti-difference of w^k: I^(k+1) * B_{k+1}(w/I) / (k+1), expanded in w."""
    from math import comb

    out = Expr.constant(0, w.n, w.aref)
    for r in range(k + 2):
        coeff = bernoulli_number(r) * Fraction(comb(k + 1, r), k + 1)
        if coeff:
            out = out + w ** (k + 1 - r) * (CoeffPoly.symbol("I", r) * coeff)
    return out


def delta_primitive(e: Expr, a: int, pivot: int) -> Expr:
    """A quasi-elliptic g with delta(g, a) = e.

    The Z-generators through z_a are split into the pivot one (the working
    coordinate w) and shift-invariant differences v_c = Z(a,c) - Z(a,pivot);
    the coefficients of powers of w are then delta-invariant, and each w^k is
    replaced by its Bernoulli primitive.
    """
    _require_quasi(e)
    if a == pivot:
        raise ValueError("pivot must differ from the integration variable")
    n, ref = e.n, e.aref
    w = Expr.from_gen(_W, n, ref)
    gens = _z_shift_map(e, a)
    mapping = {}
    atoms = {}
    for g, sign in gens.items():
        other = g[2] if g[1] == a else g[1]
        if other == pivot:
            mapping[g] = w * sign
        else:
            key = ("X", f"z-diff-{other}")
            v = Expr.from_gen(key, n, ref)
            atoms[key] = other
            mapping[g] = (v + w) * sign
    if not mapping:
        return e * (zg(a, pivot, n=n, aref=ref) - CoeffPoly.symbol("I") / 2)
    work = substitute_gens(e, mapping)
    parts = collect_by_gen(work, _W)
    out = Expr.constant(0, n, ref)
    for k, part in parts.items():
        out = out + part * _bernoulli_primitive(k, w)
    # Undo the temporary atoms.
    back = {_W: zg(a, pivot, n=n, aref=ref)}
    for atom, other in atoms.items():
        back[atom] = zg(a, other, n=n, aref=ref) - zg(a, pivot, n=n, aref=ref)
    return substitute_gens(out, back)


def acycle_once(e: Expr, a: int, active=None, pivot: int | None = None) -> Expr:
    """One A-cycle integration: residues of a delta-primitive over the
    not-yet-integrated diagonals."""
    _require_quasi(e)
    active = tuple(range(1, e.n + 1)) if active is None else tuple(active)
    if a not in active:
        raise ValueError(f"variable {a} is not active")
    others = [b for b in active if b != a]
    if not others:
        if not e.is_constant():
            raise NonConstantRemainder(f"single-variable integrand not constant: {e}")
        return e
    if pivot is None:
        pivot = max(others)
    g = delta_primitive(e, a, pivot)
    out = Expr.constant(0, e.n, e.aref)
    for b in others:
        out = out + residue(g, a, b)
    return out


def ordered_acycle(e: Expr, sigma, check_quasi: bool = True) -> CoeffPoly:
    """Iterated A-cycle integral in the order sigma (earlier = higher contour)."""
    if check_quasi:
        _require_quasi(e)
    sigma = tuple(sigma)
    cur = e
    for k, a in enumerate(sigma[:-1]):
        cur = acycle_once(cur, a, active=sigma[k:])
    if not cur.is_constant():
        raise NonConstantRemainder(f"nontrivial final integrand: {cur}")
    return cur.constant_value()


def average_acycle(e: Expr, active=None) -> CoeffPoly:
    """Average of the ordered A-cycle integrals over all orderings."""
    _require_quasi(e)
    active = tuple(range(1, e.n + 1)) if active is None else tuple(active)
    total = CoeffPoly.zero()
    count = 0
    for sigma in permutations(active):
        total = total + ordered_acycle(e, sigma, check_quasi=False)
        count += 1
    return total * Fraction(1, count)


def hollimit_via_forests(e: Expr) -> CoeffPoly:
    """Holomorphic limit of the regularized integral via the forest expansion.

    The plain term is the magnitude-ordered A-cycle integral; every nonempty
    forest (J, parents) contributes I^|J| times its order-polytope volume
    times the interleaved residue/A-cycle composition in magnitude order.
    """
    if not is_elliptic(e):
        raise NotElliptic(f"input has Z/A/Y content: {e}")
    n = e.n
    total = CoeffPoly.zero()
    for assignment in _forest_assignments(n):
        if assignment:
            J = tuple(sorted(assignment))
            parents = tuple(assignment[j] for j in J)
            weight = tree_factorial(J, parents)
            scale = CoeffPoly.symbol("I", len(J)) * weight
        else:
            scale = CoeffPoly.rational(1)
        g = e
        for j in range(1, n + 1):
            if j in assignment:
                g = residue(g, j, assignment[j])
            else:
                g = acycle_once(g, j, active=tuple(range(j, n + 1)))
        if not g.is_constant():
            raise NonConstantRemainder(f"forest-limit term left generators: {g}")
        total = total + scale * g.constant_value()
    return total


def _forest_assignments(n: int):
    """All maps from subsets J of [n-1] to parents (j < parent <= n)."""

    def rec(j, current):
        if j == n:
            yield dict(current)
            return
        yield from rec(j + 1, current)
        for parent in range(j + 1, n + 1):
            current[j] = parent
            yield from rec(j + 1, current)
            del current[j]

    yield from rec(1, {})
