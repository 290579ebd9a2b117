"""Residue-operator algebra on configuration-space functions.

residue(e, a, b) extracts the coefficient of 1/t in the expansion of e at the
diagonal z_a = z_b and consumes the variable z_a; s_op multiplies by t first
(the contact-term operator).  check_commutators verifies the operator
identities these satisfy, including the variants where one slot is an A-cycle
integral or a regularized integral.
"""

from __future__ import annotations

from .expr import Expr, expr_equal
from .laurent import expand


def residue(e: Expr, a: int, b: int, window_hint: int | None = None) -> Expr:
    """Residue of e*dz_a at z_a = z_b; zero for the degenerate a == b."""
    if a == b:
        return Expr.constant(0, e.n, e.aref if e.aref != a else max(1, a - 1))
    from .expr import pole_order

    p = pole_order(e, a, b)
    if p == 0:
        ref = e.aref if e.aref != a else b
        return Expr.constant(0, e.n, ref)
    series = expand(e, a, b, window=(-1, -1))
    return series.coefficient(-1)


def s_op(e: Expr, a: int, b: int) -> Expr:
    """Contact-term operator: residue of (z_a - z_b) * e at z_a = z_b."""
    if a == b:
        return Expr.constant(0, e.n, e.aref if e.aref != a else max(1, a - 1))
    from .expr import pole_order

    if pole_order(e, a, b) < 2:
        ref = e.aref if e.aref != a else b
        return Expr.constant(0, e.n, ref)
    series = expand(e, a, b, window=(-2, -2))
    return series.coefficient(-2)


def total_s(e: Expr, active=None) -> dict:
    """All single contact terms, organized per removed variable a.

    Returns {a: sum over r != a of s_op(e, a, r)} with a, r running over the
    active variables.
    """
    active = tuple(range(1, e.n + 1)) if active is None else tuple(active)
    out = {}
    for a in active:
        acc = None
        for r in active:
            if r == a:
                continue
            term = s_op(e, a, r)
            acc = term if acc is None else acc + term
        if acc is not None:
            out[a] = acc
    return out


def global_residue_sum(e: Expr, a: int) -> Expr:
    """Sum of residues of e*dz_a over every diagonal; zero for elliptic e."""
    acc = None
    for b in range(1, e.n + 1):
        if b == a:
            continue
        term = residue(e, a, b)
        acc = term if acc is None else acc + term
    return acc


# -- commutator verification ---------------------------------------------------


def check_commutators(samples, mode: str = "basic", order: int | None = None):
    """Evaluate both sides of the residue-operator identities on samples.

    Modes: basic (pure residue identities), arnold (cyclic three-term
    relation), with_acycle (one slot is an A-cycle integral), with_regint
    (one slot is a regularized integral).  Returns a report: a list of dicts
    with keys sample, identity, indices, ok.
    """
    from . import acycle, regint

    report = []

    def record(i, name, indices, lhs, rhs):
        ok = expr_equal(lhs, rhs, order)
        entry = {"sample": i, "identity": name, "indices": indices, "ok": ok}
        if not ok:
            entry["lhs"] = lhs.render()
            entry["rhs"] = rhs.render()
        report.append(entry)

    for i, e in enumerate(samples):
        n = e.n
        if mode == "basic":
            for (a, b, c) in _distinct_triples(n):
                lhs = residue(residue(e, b, c), a, c) - residue(residue(e, a, c), b, c)
                mid = residue(residue(e, a, b), b, c)
                rhs2 = -residue(residue(e, b, a), a, c)
                record(i, "[R^a_c,R^b_c]=R^b_cR^a_b", (a, b, c), lhs, mid)
                record(i, "R^b_cR^a_b=-R^a_cR^b_a", (a, b, c), mid, rhs2)
            if n >= 4:
                a, b, c, d = 1, 2, 3, 4
                lhs = residue(residue(e, a, b), c, d)
                rhs = residue(residue(e, c, d), a, b)
                record(i, "disjoint commute", (a, b, c, d), lhs, rhs)
            zero = residue(e, 1, 1)
            record(i, "R^a_a=0", (1, 1), zero, Expr.constant(0, n, zero.aref))
        elif mode == "arnold":
            for (a, b, c) in _distinct_triples(n):
                total = (
                    residue(residue(e, a, b), b, c)
                    + residue(residue(e, b, c), c, a)
                    + residue(residue(e, c, a), a, b)
                )
                record(
                    i,
                    "arnold cycle",
                    (a, b, c),
                    total,
                    Expr.constant(0, n, total.aref),
                )
        elif mode == "with_acycle":
            from .coeff import CoeffPoly

            iota = CoeffPoly.symbol("I")
            full = tuple(range(1, n + 1))
            for (a, b) in _distinct_pairs(n):
                rest_b = tuple(v for v in full if v != b)
                rest_a = tuple(v for v in full if v != a)
                comm = acycle.acycle_once(
                    acycle.acycle_once(e, b, active=full), a, active=rest_b
                ) - acycle.acycle_once(
                    acycle.acycle_once(e, a, active=full), b, active=rest_a
                )
                # The honest A-cycle integral carries the period constant:
                # moving one contour past the other picks up 2*pi*i times the
                # residue (the operator-normalized form absorbs it into the
                # difference operator).
                viares = acycle.acycle_once(residue(e, a, b), b, active=rest_a)
                record(i, "[A_a,A_b]=I*A_bR^a_b", (a, b), comm, viares * iota)
                neg = -acycle.acycle_once(residue(e, b, a), a, active=rest_b)
                record(i, "A_bR^a_b=-A_aR^b_a", (a, b), viares, neg)
            for (a, b, c) in _distinct_triples(n):
                rest_a = tuple(v for v in full if v != a)
                rest_c = tuple(v for v in full if v != c)
                lhs = acycle.acycle_once(residue(e, a, b), c, active=rest_a)
                rhs = residue(acycle.acycle_once(e, c, active=full), a, b)
                record(i, "A_cR^a_b=R^a_bA_c", (a, b, c), lhs, rhs)
        elif mode == "with_regint":
            for (a, b, c) in _distinct_triples(n):
                pivot = max(v for v in range(1, n + 1) if v not in (c, a))
                lhs = residue(regint.reg_once(e, c, pivot), a, b)
                rhs = regint.reg_once(residue(e, a, b), c, pivot)
                record(i, "R^a_b reg_c = reg_c R^a_b", (a, b, c), lhs, rhs)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return report


def _distinct_triples(n):
    out = []
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            for c in range(1, n + 1):
                if len({a, b, c}) == 3:
                    out.append((a, b, c))
    return out


def _distinct_pairs(n):
    return [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if a != b]
