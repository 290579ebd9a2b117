"""Regularized-integral engines and the holomorphic-anomaly machinery.

Four independent pipelines compute the regularized integral of a supported
function: the iterated one-variable engine (reg_all), the forest-sum formula
(reg_via_forests), the chain recursion (reg_via_chains), and the anomaly
expansion in Y backed by averaged A-cycle integrals (reg_via_hae).  They must
agree exactly; the test suite enforces that.
"""

from __future__ import annotations

from fractions import Fraction

from .coeff import CoeffPoly
from .errors import NonConstantRemainder, NotAlmostElliptic, NotElliptic
from .expr import (
    Expr,
    ag,
    almost_elliptic_check,
    collect_by_gen,
    d_A,
    d_Y,
    expr_equal,
    is_elliptic,
    rebase_aref,
    substitute_gens,
    zg,
)
from .forests import enumerate_forests, f_r_polynomial
from .residues import residue, s_op

_U = ("X", "zhat-power")


def reg_once(e: Expr, a: int, pivot: int, residue_targets=None, check: bool = True) -> Expr:
    """Integrate out z_a against the unit-mass volume form.

    Steps: move the antiholomorphic z_a-dependence into the single combination
    Zhat(z_a - z_pivot), take the antiderivative in that combination, and sum
    the residues of the result over the diagonals z_a = z_b.  The input must
    be almost-elliptic; the output is almost-elliptic in the remaining
    variables and has the same weight.
    """
    if a == pivot:
        raise ValueError("pivot must differ from the integration variable")
    if not (1 <= a <= e.n and 1 <= pivot <= e.n):
        raise ValueError("variable out of range")
    if check and not almost_elliptic_check(e):
        raise NotAlmostElliptic(f"not a Zhat/E2hat polynomial: {e}")
    if e.aref == a:
        e = rebase_aref(e, pivot)

    n, ref = e.n, e.aref
    u = Expr.from_gen(_U, n, ref)
    zp = zg(a, pivot, n=n, aref=ref)
    ap = ag(pivot, n=n, aref=ref)
    gen_a = ("A", a)
    has_a = any(g == gen_a for mono in e.terms for g, _ in mono)
    work = substitute_gens(e, {gen_a: u - zp + ap}) if has_a else e

    zhat_ap = zp + ag(a, n=n, aref=ref) - ap
    if has_a:
        parts = collect_by_gen(work, _U)
    else:
        parts = {0: work}
    anti = Expr.constant(0, n, ref)
    for j, part in parts.items():
        anti = anti + part * zhat_ap ** (j + 1) / (j + 1)

    targets = (
        [b for b in range(1, n + 1) if b != a]
        if residue_targets is None
        else [b for b in residue_targets if b != a]
    )
    out = Expr.constant(0, n, ref)
    for b in targets:
        out = out + residue(anti, a, b)
    return out


def reg_all(e: Expr, order=None, check: bool = True) -> CoeffPoly:
    """Iterate reg_once along the given variable order (default 1, 2, ...).

    The pivot at each step is the largest remaining variable; the final
    integration is trivial, so after n-1 steps the result must be constant.
    """
    order = tuple(range(1, e.n + 1)) if order is None else tuple(order)
    if sorted(order) != list(range(1, e.n + 1)):
        raise ValueError(f"order must be a permutation of [1..{e.n}]: {order}")
    return _reg_iterated(e, order, check=check)


def _reg_iterated(e: Expr, order, check: bool = True) -> CoeffPoly:
    """Integrate the listed variables in order; the last one must be trivial."""
    cur = e
    for k, a in enumerate(order[:-1]):
        remaining = order[k + 1 :]
        pivot = max(remaining)
        cur = reg_once(cur, a, pivot, residue_targets=remaining, check=check)
    if not cur.is_constant():
        raise NonConstantRemainder(f"nontrivial final integrand: {cur}")
    return cur.constant_value()


def reg_via_forests(e: Expr) -> CoeffPoly:
    """Forest-sum formula: residues against the iterated-integral weights F_r."""
    _require_elliptic(e)
    n = e.n
    if e.aref != n:
        e = rebase_aref(e, n)
    total = CoeffPoly.zero()
    for forest in enumerate_forests(n):
        g = e * f_r_polynomial(forest)
        for k in range(1, n):
            g = residue(g, k, forest.parent(k))
        if not g.is_constant():
            raise NonConstantRemainder(f"forest term left generators: {g}")
        total = total + g.constant_value()
    return total


def reg_via_chains(e: Expr) -> CoeffPoly:
    """Chain recursion: peel off non-recurring residue chains ending at z_n."""
    _require_elliptic(e)
    if e.aref != e.n:
        e = rebase_aref(e, e.n)
    return _chains(e, tuple(range(1, e.n + 1)))


def _chains(e: Expr, active) -> CoeffPoly:
    if len(active) == 1:
        if not e.is_constant():
            raise NonConstantRemainder(f"chain recursion left generators: {e}")
        return e.constant_value()
    head = min(active)
    last = max(active)
    interior = [v for v in active if v != last]
    total = CoeffPoly.zero()
    for chain in _chains_from(head, interior):
        m = len(chain)
        weight_factor = (
            zg(head, last, n=e.n, aref=e.aref) + ag(head, n=e.n, aref=e.aref)
        ) ** m / _factorial(m)
        g = e * weight_factor
        path = chain + (last,)
        for src, dst in zip(path, path[1:]):
            g = residue(g, src, dst)
        # Chain terms are z-meromorphic but may carry almost-holomorphic
        # constants (Y through the E2hat combination only).
        kinds = g.gen_kinds()
        if kinds & {"Z", "A"} or not almost_elliptic_check(g):
            raise NotElliptic(f"chain term failed to come out z-elliptic: {g}")
        rest = tuple(v for v in active if v not in chain)
        total = total + _chains(g, rest)
    return total


def _chains_from(head, interior):
    """Non-recurring sequences inside `interior` starting at head."""
    others = [v for v in interior if v != head]

    def rec(prefix, pool):
        yield prefix
        for i, v in enumerate(pool):
            yield from rec(prefix + (v,), pool[:i] + pool[i + 1 :])

    yield from rec((head,), tuple(others))


def _factorial(m: int) -> int:
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def reg_via_hae(e: Expr) -> CoeffPoly:
    """Anomaly expansion: contact-term corrections plus averaged A-cycle integrals.

    The contact operator strictly reduces the number of variables, so the
    Y-expansion terminates after n-1 terms; each iterated contact term is
    integrated recursively and the Y-free part is the ordering average of the
    A-cycle integrals.
    """
    _require_elliptic(e)
    return _hae(e, tuple(range(1, e.n + 1)))


def _hae(e: Expr, active) -> CoeffPoly:
    from .acycle import average_acycle

    if len(active) == 1 or e.is_constant():
        if not e.is_constant():
            raise NonConstantRemainder(f"single-variable input not constant: {e}")
        return e.constant_value()
    total = average_acycle(e, active=active)
    y = CoeffPoly.symbol("Y")
    layer = {(): e}
    for k in range(1, len(active)):
        new_layer = {}
        for removed, g in layer.items():
            avail = [v for v in active if v not in removed]
            for a in avail:
                acc = None
                for r in avail:
                    if r == a:
                        continue
                    term = s_op(g, a, r)
                    acc = term if acc is None else acc + term
                if acc is None or acc.is_zero():
                    continue
                if not is_elliptic(acc):
                    raise NotElliptic(f"contact term failed to stay elliptic: {acc}")
                key = removed + (a,)
                cur = new_layer.get(key)
                new_layer[key] = acc if cur is None else cur + acc
        if not new_layer:
            break
        term_sum = CoeffPoly.zero()
        for removed, g in new_layer.items():
            term_sum = term_sum + _hae(g, tuple(v for v in active if v not in removed))
        scale = Fraction(-1, 2 ** k * _factorial(k))
        total = total + y ** k * term_sum * scale
        layer = new_layer
    return total


def hae_residual(e: Expr):
    """Both sides of the anomaly equation for the full integral; must be zero.

    Returns a report dict with the Y-derivative of the integral, the two terms
    of the right-hand side, and the residual.
    """
    if not almost_elliptic_check(e):
        raise NotAlmostElliptic(f"not a Zhat/E2hat polynomial: {e}")
    n = e.n
    lhs = reg_all(e).partial_Y()
    bulk = reg_all(d_Y(e), check=False)
    contact = CoeffPoly.zero()
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            term = s_op(e, a, b)
            if term.is_zero():
                continue
            rest = tuple(v for v in range(1, n + 1) if v != a)
            contact = contact + _reg_iterated(term, rest, check=False)
    residual = lhs - (bulk - contact)
    return {
        "lhs": lhs,
        "bulk": bulk,
        "contact": contact,
        "residual": residual,
        "ok": residual.is_zero(),
    }


def elliptic_anomaly_check(e: Expr, a: int, b: int):
    """Differentiating one integration step in A(b) must equal the residue at b."""
    _require_elliptic(e)
    n = e.n
    if b == n or a == b or a == n:
        raise ValueError("need a != b, both different from the reference variable")
    integrated = reg_once(e, a, n)
    if integrated.aref != n:
        integrated = rebase_aref(integrated, n)
    lhs = d_A(integrated, b)
    rhs = residue(e, a, b)
    ok = expr_equal(lhs, rhs)
    return {"lhs": lhs, "rhs": rhs, "ok": ok}


def _require_elliptic(e: Expr):
    if not is_elliptic(e):
        raise NotElliptic(f"input has Z/A/Y content: {e}")
