"""Planar rooted labeled forests on [n-1] with parents in [n].

A forest is a map r: [n-1] -> [n] with j < r(j); vertices mapped to n are
roots.  These index the summands of the residue formulas; the bijection with
permutations of [n-1] (left-to-right maxima are roots, parent = rightmost
larger predecessor) drives the relabeling arguments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ArityTooSmall, InvalidChain
from .expr import Expr, ag, zg


@dataclass(frozen=True)
class Forest:
    n: int
    r: tuple

    def __post_init__(self):
        if len(self.r) != self.n - 1:
            raise ValueError("parent vector must have length n-1")
        for j, parent in enumerate(self.r, start=1):
            if not j < parent <= self.n:
                raise ValueError(f"need {j} < r({j}) <= {self.n}, got {parent}")

    def parent(self, j: int) -> int:
        return self.r[j - 1]

    def roots(self) -> tuple:
        return tuple(j for j in range(1, self.n) if self.parent(j) == self.n)

    def children(self, v: int) -> tuple:
        return tuple(j for j in range(1, self.n) if self.parent(j) == v)


def enumerate_forests(n: int):
    """All (n-1)! forests in deterministic lexicographic order of r."""
    if n < 2:
        raise ArityTooSmall("forests need n >= 2")
    ranges = [range(j + 1, n + 1) for j in range(1, n)]
    for combo in itertools.product(*ranges):
        yield Forest(n, combo)


def forest_to_permutation(f: Forest) -> tuple:
    """Clockwise traversal reading labels: roots ascending, then subtrees."""
    out = []

    def visit(v):
        out.append(v)
        for child in sorted(f.children(v)):
            visit(child)

    for root in sorted(f.roots()):
        visit(root)
    return tuple(out)


def permutation_to_forest(sigma: tuple) -> Forest:
    """Inverse traversal: parent of v is its rightmost larger predecessor."""
    n = len(sigma) + 1
    if sorted(sigma) != list(range(1, n)):
        raise ValueError(f"not a permutation of [1..{n - 1}]: {sigma}")
    parents = {}
    for pos, v in enumerate(sigma):
        parent = n
        for prev in reversed(sigma[:pos]):
            if prev > v:
                parent = prev
                break
        parents[v] = parent
    return Forest(n, tuple(parents[j] for j in range(1, n)))


def trees(f: Forest) -> list:
    """Connected components of j ~ parent(j) on [n-1], sorted by minimum label."""
    parent = {}

    def find(x):
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for j in range(1, f.n):
        if f.parent(j) != f.n:
            union(j, f.parent(j))
    groups = {}
    for j in range(1, f.n):
        groups.setdefault(find(j), set()).add(j)
    return sorted(groups.values(), key=min)


def tree_factorial(J, rJ) -> Fraction:
    """Order-polytope volume: integrate x_j over [0, x_parent(j)], rest over [0,1].

    J must be strictly increasing with J[i] < rJ[i]; the inner integrals run in
    the J-order, so each upper limit is still a free variable when used.
    """
    J = tuple(J)
    rJ = tuple(rJ)
    if len(J) != len(rJ):
        raise InvalidChain("index list and parent list differ in length")
    if list(J) != sorted(set(J)):
        raise InvalidChain(f"indices must be strictly increasing: {J}")
    for j, parent in zip(J, rJ):
        if not j < parent:
            raise InvalidChain(f"need {j} < parent, got {parent}")

    # Polynomial in the x-variables: {exponent dict (as sorted tuple): Fraction}.
    poly = {(): Fraction(1)}

    def integrate_to_var(poly, var, upper):
        out = {}
        for exps, c in poly.items():
            d = dict(exps)
            m = d.pop(var, 0)
            d[upper] = d.get(upper, 0) + m + 1
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, Fraction(0)) + c / (m + 1)
        return out

    def integrate_to_one(poly, var):
        out = {}
        for exps, c in poly.items():
            d = dict(exps)
            m = d.pop(var, 0)
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, Fraction(0)) + c / (m + 1)
        return out

    for j, parent in zip(J, rJ):
        poly = integrate_to_var(poly, j, parent)
    remaining = sorted({v for exps in poly for v, _ in exps}, reverse=True)
    for var in remaining:
        poly = integrate_to_one(poly, var)
    assert set(poly) <= {()}
    return poly.get((), Fraction(0))


def f_r_polynomial(f: Forest) -> Expr:
    """Iterated-integral weight attached to a forest, expanded into generators.

    Integrates 1 in x_1, ..., x_{n-1} where x_k runs from 0 to
    Zhat_{k, r(k)} + x_{r(k)} (x_n = 0), innermost first.  The result is a
    polynomial in the Zhat combinations, returned over the Z/A generators.
    """
    n = f.n

    def zhat_ref(j):
        # Zhat_j = Zhat(z_j - z_n) in the reduced basis.
        if j == n:
            return Expr.constant(0, n)
        return zg(j, n, n=n) + ag(j, n=n)

    # Polynomial in x-variables with Expr coefficients:
    # {exponent tuple over x_1..x_n: Expr}.
    zero_exp = (0,) * n
    poly = {zero_exp: Expr.constant(1, n)}
    for k in range(1, n):
        rk = f.parent(k)
        limit = zhat_ref(k) - zhat_ref(rk)
        # Antiderivative in x_k, then substitute x_k = limit + x_{rk}.
        out = {}

        def add(exps, coeff, out=out):
            if coeff.is_zero():
                return
            cur = out.get(exps)
            out[exps] = coeff if cur is None else cur + coeff

        for exps, coeff in poly.items():
            m = exps[k - 1] + 1
            coeff = coeff / m
            # (limit + x_rk)^m expanded; x_n is identically zero.
            for i in range(0, m + 1):
                if rk == n and i > 0:
                    continue
                term = coeff * limit ** (m - i) * math.comb(m, i)
                new = list(exps)
                new[k - 1] = 0
                if i:
                    new[rk - 1] += i
                add(tuple(new), term)
        poly = out
    assert set(poly) <= {zero_exp}
    return poly.get(zero_exp, Expr.constant(0, n))
