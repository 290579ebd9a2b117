"""Independent verification oracle: exact Fourier / q-expansions.

Ordered A-cycle integrals of quasi-elliptic functions equal iterated
constant-term extractions of Fourier expansions: on nested contours the pair
variable y = x_upper / x_lower satisfies |q| < |y| < 1, every generator has an
explicit expansion there, and integrating over a contour picks the constant
term in that variable.  Everything is exact rational arithmetic in q and the
x-exponent lattice.

The generator expansions are validated against the local expansion kernel by
re-expanding y = exp(I*t) with exact Bernoulli series before the oracle is
trusted (see validate_fourier_model).
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from .acycle import bernoulli_number
from .coeff import CoeffPoly
from .errors import InvalidIndex, TruncationOverflow, UnsupportedGenerator
from .expr import Expr
from .laurent import wp_model, z_model

# Pole parts of the pair expansions are generated up to y^(2N); for up to four
# variables every monomial whose exponents exceed that (or 4N per variable in
# intermediate products) provably cannot cancel to a constant term within the
# q^N truncation, so pruning there is lossless.
_POLE_FACTOR = 2
_VAR_FACTOR = 4
_MAX_VARS = 4


class QSeries:
    """Truncated exact series in q and per-variable Fourier exponents."""

    __slots__ = ("N", "nvars", "terms")

    def __init__(self, N: int, nvars: int, terms=None):
        self.N = N
        self.nvars = nvars
        self.terms = {}
        if terms:
            for (k, exps), val in terms.items():
                val = Fraction(val)
                if val and k <= N:
                    self.terms[(k, tuple(exps))] = val

    @staticmethod
    def constant(value, N: int, nvars: int = 0) -> "QSeries":
        zero = (0,) * nvars
        return QSeries(N, nvars, {(0, zero): Fraction(value)})

    def __add__(self, other: "QSeries") -> "QSeries":
        if self.N != other.N or self.nvars != other.nvars:
            raise ValueError("truncation mismatch")
        out = dict(self.terms)
        for key, val in other.terms.items():
            acc = out.get(key, 0) + val
            if acc:
                out[key] = acc
            else:
                out.pop(key, None)
        qs = QSeries.__new__(QSeries)
        qs.N, qs.nvars, qs.terms = self.N, self.nvars, out
        return qs

    def __neg__(self):
        qs = QSeries.__new__(QSeries)
        qs.N, qs.nvars = self.N, self.nvars
        qs.terms = {k: -v for k, v in self.terms.items()}
        return qs

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            qs = QSeries.__new__(QSeries)
            qs.N, qs.nvars = self.N, self.nvars
            qs.terms = {k: v * other for k, v in self.terms.items()} if other else {}
            return qs
        if self.N != other.N or self.nvars != other.nvars:
            raise ValueError("truncation mismatch")
        cap = _VAR_FACTOR * self.N
        out = {}
        for (k1, e1), v1 in self.terms.items():
            for (k2, e2), v2 in other.terms.items():
                k = k1 + k2
                if k > self.N:
                    continue
                exps = tuple(a + b for a, b in zip(e1, e2))
                if any(abs(x) > cap for x in exps):
                    # Beyond the provable cancellation capacity: dead term.
                    continue
                key = (k, exps)
                acc = out.get(key, 0) + v1 * v2
                if acc:
                    out[key] = acc
                else:
                    out.pop(key, None)
        qs = QSeries.__new__(QSeries)
        qs.N, qs.nvars, qs.terms = self.N, self.nvars, out
        return qs

    __rmul__ = __mul__

    def constant_term_in(self, var: int) -> "QSeries":
        """Keep only the terms with zero exponent in the given variable (1-based)."""
        idx = var - 1
        out = {key: val for key, val in self.terms.items() if key[1][idx] == 0}
        qs = QSeries.__new__(QSeries)
        qs.N, qs.nvars, qs.terms = self.N, self.nvars, out
        return qs

    def as_q_coefficients(self) -> dict:
        """Collapse to {q-power: Fraction}; requires all x-exponents zero."""
        out = {}
        for (k, exps), val in self.terms.items():
            if any(exps):
                raise TruncationOverflow(
                    f"nonzero Fourier exponents remain: {exps}"
                )
            out[k] = out.get(k, Fraction(0)) + val
        return {k: v for k, v in out.items() if v}

    def render(self) -> str:
        coeffs = self.as_q_coefficients()
        if not coeffs:
            return "0"
        parts = []
        for k in sorted(coeffs):
            c = coeffs[k]
            body = f"{c}" if k == 0 else (f"{c}*q" if k == 1 else f"{c}*q^{k}")
            parts.append(body)
        return " + ".join(parts).replace("+ -", "- ")

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.N, self.nvars, self.terms) == (other.N, other.nvars, other.terms)


def _sigma(power: int, m: int) -> int:
    return sum(d ** power for d in range(1, m + 1) if m % d == 0)


def eisenstein_q(k: int, N: int) -> QSeries:
    """q-expansion of E2, E4 or E6 to order N (constant in the x-variables)."""
    if k not in (2, 4, 6):
        raise InvalidIndex(f"E_{k} is not one of E2, E4, E6")
    if N < 0:
        raise InvalidIndex("truncation order must be nonnegative")
    scale = {2: -24, 4: 240, 6: -504}[k]
    terms = {(0, ()): Fraction(1)}
    for m in range(1, N + 1):
        terms[(m, ())] = Fraction(scale * _sigma(k - 1, m))
    return QSeries(N, 0, terms)


# -- pair expansions ----------------------------------------------------------


def _wp_pair_terms(N: int):
    """Normalized p-function series in (q, y): value of p / I^2."""
    pole_hi = _POLE_FACTOR * N
    terms = {(0, 0): Fraction(1, 12)}
    for d in range(1, pole_hi + 1):
        terms[(0, d)] = Fraction(d)
    for m in range(1, N + 1):
        for d in range(1, N // m + 1):
            k = m * d
            for ypow, c in ((d, d), (-d, d), (0, -2 * d)):
                key = (k, ypow)
                acc = terms.get(key, 0) + c
                if acc:
                    terms[key] = Fraction(acc)
                else:
                    terms.pop(key, None)
    return terms


def _z_pair_terms(N: int):
    """Normalized odd series in (q, y): value of Z / I."""
    pole_hi = _POLE_FACTOR * N
    terms = {(0, 0): Fraction(-1, 2)}
    for d in range(1, pole_hi + 1):
        terms[(0, d)] = Fraction(-1)
    for m in range(1, N + 1):
        for d in range(1, N // m + 1):
            k = m * d
            for ypow, c in ((d, -1), (-d, 1)):
                key = (k, ypow)
                acc = terms.get(key, 0) + c
                if acc:
                    terms[key] = Fraction(acc)
                else:
                    terms.pop(key, None)
    return terms


def _pair_terms(kind: str, deriv: int, N: int):
    base = _wp_pair_terms(N) if kind == "W" else _z_pair_terms(N)
    if deriv:
        out = {}
        for (k, d), v in base.items():
            scaled = v * d ** deriv
            if scaled:
                out[(k, d)] = scaled
        return out
    return base


def fourier_gen(gen: tuple, upper_first: bool, N: int, nvars: int) -> QSeries:
    """Oriented Fourier expansion of a single generator as a QSeries.

    ``upper_first`` states whether the generator's first index sits on the
    higher contour.  The normalization divides by I^weight, so the series is
    rational.
    """
    kind = gen[0]
    if kind == "W":
        _, a, b, deriv = gen
        parity = (-1) ** deriv
    elif kind == "Z":
        _, a, b = gen
        deriv = 0
        parity = -1
    else:
        raise UnsupportedGenerator(
            f"generator {gen} has no holomorphic Fourier expansion"
        )
    if upper_first:
        up, lo_, sign = a, b, 1
    else:
        up, lo_, sign = b, a, parity
    terms = {}
    for (k, d), v in _pair_terms(kind, deriv, N).items():
        exps = [0] * nvars
        if d:
            exps[up - 1] = d
            exps[lo_ - 1] = -d
        terms[(k, tuple(exps))] = v * sign
    return QSeries(N, nvars, terms)


# -- A-cycle integrals by constant terms ---------------------------------------


def _coeff_to_series(coeff: CoeffPoly, N: int, nvars: int):
    """Split a Y-free CoeffPoly into {normalization exponent: QSeries}.

    A monomial c * I^j * E-monomial(weight v) contributes c * (E-series) to the
    bucket j + v; the caller requires a single bucket.
    """
    buckets = {}
    for key, val in coeff.items():
        j, e2, e4, e6, y = key
        if y:
            raise UnsupportedGenerator("Y has no q-expansion")
        series = QSeries.constant(val, N, nvars)
        for k, power in ((2, e2), (4, e4), (6, e6)):
            for _ in range(power):
                series = series * _embed(eisenstein_q(k, N), nvars)
        cur = buckets.get(j)
        buckets[j] = series if cur is None else cur + series
    return buckets


def _embed(qs: QSeries, nvars: int) -> QSeries:
    zero = (0,) * nvars
    terms = {(k, zero): v for (k, _), v in qs.terms.items()}
    out = QSeries.__new__(QSeries)
    out.N, out.nvars, out.terms = qs.N, nvars, terms
    return out


def acycle_by_constant_term(e: Expr, sigma, N: int) -> tuple:
    """Ordered A-cycle integral as an exact q-series, with its I-normalization.

    Returns (QSeries, W): the integral equals I^W times the series with the
    Eisenstein series inserted.  Requires a uniform normalization exponent
    (weight-homogeneous input with matching I-powers).
    """
    sigma = tuple(sigma)
    n = e.n
    if n > _MAX_VARS:
        raise TruncationOverflow(f"oracle supports up to {_MAX_VARS} variables")
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError(f"ordering must be a permutation of [1..{n}]: {sigma}")
    rank = {v: i for i, v in enumerate(sigma)}
    buckets = {}
    for mono, coeff in e.terms.items():
        gen_weight = 0
        prod = None
        for gen, exp in mono:
            if gen[0] == "W":
                gw = 2 + gen[3]
            elif gen[0] == "Z":
                gw = 1
            else:
                raise UnsupportedGenerator(
                    f"generator {gen} has no holomorphic Fourier expansion"
                )
            gen_weight += gw * exp
            upper_first = rank[gen[1]] < rank[gen[2]]
            series = fourier_gen(gen, upper_first, N, n)
            for _ in range(exp):
                prod = series if prod is None else prod * series
        for cnorm, cseries in _coeff_to_series(coeff, N, n).items():
            total = cseries if prod is None else cseries * prod
            norm = cnorm + gen_weight
            cur = buckets.get(norm)
            buckets[norm] = total if cur is None else cur + total
    buckets = {k: v for k, v in buckets.items() if v.terms}
    if not buckets:
        return QSeries(N, 0), 0
    if len(buckets) > 1:
        raise TruncationOverflow(
            f"mixed normalization exponents {sorted(buckets)}; "
            "split the input into weight-homogeneous parts"
        )
    norm, series = buckets.popitem()
    for v in sigma:
        series = series.constant_term_in(v)
    flat = QSeries(N, 0, {(k, ()): val for k, val in series.as_q_coefficients().items()})
    return flat, norm


def compare(symbolic: CoeffPoly, sigma, e: Expr, N: int) -> dict:
    """Diff a symbolic A-cycle value against the constant-term oracle.

    The symbolic side must be Y-free with I-powers matching the oracle's
    normalization exponent weight-by-weight.
    """
    oracle, norm = acycle_by_constant_term(e, sigma, N)
    want = oracle.as_q_coefficients()
    got = {}
    structural = None
    for key, val in symbolic.items():
        j, e2, e4, e6, y = key
        if y:
            structural = "symbolic value contains Y"
            break
        if j != norm:
            structural = (
                f"monomial with I^{j} does not match the oracle normalization I^{norm}"
            )
            break
        series = QSeries.constant(val, N, 0)
        for k, power in ((2, e2), (4, e4), (6, e6)):
            for _ in range(power):
                series = series * eisenstein_q(k, N)
        for qk, c in series.terms.items():
            got[qk[0]] = got.get(qk[0], Fraction(0)) + c
    report = {"match": False, "first_mismatch": None, "structural": structural}
    if structural:
        return report
    got = {k: v for k, v in got.items() if v}
    for k in range(N + 1):
        a, b = got.get(k, Fraction(0)), want.get(k, Fraction(0))
        if a != b:
            report["first_mismatch"] = (k, a, b)
            return report
    report["match"] = True
    return report


# -- cross-validation against the local expansion kernel -----------------------


def _exp_series(scale: int, hi: int) -> dict:
    """exp(scale * s) as {s-power: Fraction} up to s^hi."""
    return {p: Fraction(scale ** p, factorial(p)) for p in range(hi + 1)}


def _zeta_pole_series(hi: int) -> dict:
    """-1/(1 - exp(s)) = sum_j B_j s^(j-1)/j! as {s-power: Fraction}."""
    return {
        j - 1: bernoulli_number(j) / factorial(j)
        for j in range(hi + 2)
        if bernoulli_number(j)
    }


def _wp_pole_series(hi: int) -> dict:
    """exp(s)/(1-exp(s))^2 = -sum_j B_j (j-1) s^(j-2)/j!."""
    out = {}
    for j in range(hi + 3):
        c = -bernoulli_number(j) * (j - 1)
        if c:
            out[j - 2] = Fraction(c, factorial(j))
    return out


def _s_derivative(series: dict) -> dict:
    return {p - 1: c * p for p, c in series.items() if p != 0}


def _fourier_t_series(kind: str, deriv: int, t_hi: int, N: int) -> dict:
    """Re-expansion of the normalized Fourier series with y = exp(s).

    Returns {(q-power, s-power): Fraction} for s-powers up to t_hi.
    """
    if kind == "W":
        base = dict(_wp_pole_series(t_hi + deriv))
        base[0] = base.get(0, Fraction(0)) + Fraction(1, 12)
        qpart_scales = lambda d: ((d, d), (-d, d), (0, -2 * d))  # noqa: E731
    else:
        base = _zeta_pole_series(t_hi + deriv)
        base[0] = base.get(0, Fraction(0)) + Fraction(1, 2)
        qpart_scales = lambda d: ((d, -1), (-d, 1))  # noqa: E731

    out = {(0, p): c for p, c in base.items()}
    for m in range(1, N + 1):
        for d in range(1, N // m + 1):
            k = m * d
            for scale, coeff in qpart_scales(d):
                if scale == 0:
                    cur = out.get((k, 0), Fraction(0)) + coeff
                    out[(k, 0)] = cur
                    continue
                for p, c in _exp_series(scale, t_hi + deriv).items():
                    key = (k, p)
                    out[key] = out.get(key, Fraction(0)) + c * coeff
    for _ in range(deriv):
        shifted = {}
        for (k, p), c in out.items():
            if p != 0:
                shifted[(k, p - 1)] = shifted.get((k, p - 1), Fraction(0)) + c * p
        out = shifted
    return {
        key: c for key, c in out.items() if c and key[1] <= t_hi
    }


def validate_fourier_model(t_hi: int = 10, N: int = 10) -> dict:
    """Check every Fourier model against the Laurent kernel's model series.

    For each generator kind the q-t bi-series from y = exp(I*t) must equal the
    local model with the Eisenstein q-expansions inserted (all exact).
    """
    report = {}
    for kind, deriv, label in (
        ("Z", 0, "Z"),
        ("W", 0, "wp"),
        ("W", 1, "wp'"),
        ("W", 2, "wp''"),
    ):
        fourier = _fourier_t_series(kind, deriv, t_hi, N)
        local = _local_t_series(kind, deriv, t_hi, N)
        report[label] = fourier == local
    report["ok"] = all(report.values())
    return report


def _local_t_series(kind: str, deriv: int, t_hi: int, N: int) -> dict:
    """Laurent-kernel model with E -> q-series, normalized by the I-grading."""
    gw = 2 + deriv if kind == "W" else 1
    model = wp_model(deriv, t_hi) if kind == "W" else z_model(t_hi)
    out = {}
    for p, coeff in model.items():
        if p > t_hi:
            continue
        for key, val in coeff.items():
            j, e2, e4, e6, y = key
            assert not y
            if j != p + gw:
                raise TruncationOverflow(
                    f"model coefficient at t^{p} breaks the I-grading"
                )
            series = QSeries.constant(val, N, 0)
            for k, power in ((2, e2), (4, e4), (6, e6)):
                for _ in range(power):
                    series = series * eisenstein_q(k, N)
            for (qk, _), c in series.terms.items():
                keyqt = (qk, p)
                acc = out.get(keyqt, Fraction(0)) + c
                if acc:
                    out[keyqt] = acc
                else:
                    out.pop(keyqt, None)
    return out
