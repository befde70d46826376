"""Exact variance of the Gaussian-sketch estimator V_p^n.

Var V = C(n,p)^-2 sum_{sigma,tau} E[W_sigma W_tau] - Tr(S^p)^2, where the pair
expectation depends only on the overlap pattern of (sigma, tau): Tr(S^p)^2 for
disjoint cycles, otherwise M(q; k_1..k_q + k_0 | m_1..m_q + m_0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .cycles import (
    OverlapPattern,
    compress,
    enumerate_increasing_cycles,
    enumerate_pattern_classes,
    all_pairs_patterns,
)
from .errors import InputError, SizeGuardError
from .moments import MomentEngine, MomentQuery
from .oracle import MAX_TERMS, cycle_links, isserlis_moment, link_expectation
from .spectrum import Spectrum, TracePowerTable, as_spectrum, table_for
from .words import star_sum

BRUTE_MAX_PAIRS = 10**6
BRUTE_MAX_WORK = 5 * 10**7  # distinct relative orders x d^(2p)


@dataclass
class QContribution:
    q: int
    count: int
    sum: float  # summed pair expectation, sum over classes of multiplicity * E


@dataclass
class VarianceReport:
    p: int
    n: int
    d: int
    mean: float
    second_moment: float
    variance: float
    per_q: list[QContribution] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "d": self.d,
            "mean": self.mean,
            "second_moment": self.second_moment,
            "variance": self.variance,
            "per_q": [{"q": c.q, "count": c.count, "sum": c.sum} for c in self.per_q],
        }


def pair_expectation(pat: OverlapPattern, t: TracePowerTable, p: int,
                     engine: MomentEngine | None = None) -> float:
    if pat.q == 0:
        return t[p] ** 2
    if pat.q == 1:
        return 2.0 * t[2 * p] + t[p] ** 2
    k, m = pat.folded()
    return (engine or MomentEngine(t)).m_(k, m)


def _check(p: int, n: int) -> None:
    if p < 1 or n < p:
        raise InputError(f"need 1 <= p <= n, got p={p}, n={n}")


def _aggregate(p: int, n: int, d: int, mean: float, classes, expectation) -> VarianceReport:
    """Weighted sum of class expectations in fixed (q, pattern) order."""
    total = comb(n, p) ** 2
    per_q: dict[int, list] = {}
    weighted: list[float] = []
    second: list[float] = []
    for pat in classes:
        c = per_q.setdefault(pat.q, [0, []])
        if pat.multiplicity == 0:
            continue
        e = expectation(pat)
        c[0] += pat.multiplicity
        c[1].append(pat.multiplicity * e)
        w = Fraction(pat.multiplicity, total)
        second.append(float(w) * e)
        if pat.q == 0:
            # fold the -Tr^2 into the disjoint term to avoid cancellation
            weighted.append(float(w - 1) * mean**2)
        else:
            weighted.append(float(w) * e)
    if 0 not in per_q or per_q[0][0] == 0:
        weighted.append(-(mean**2))
    report = VarianceReport(
        p=p, n=n, d=d, mean=mean,
        second_moment=math.fsum(second),
        variance=math.fsum(weighted),
        per_q=[QContribution(q, cnt, math.fsum(vals)) for q, (cnt, vals) in sorted(per_q.items())],
    )
    return report


def exact_variance(p: int, n: int, t: TracePowerTable) -> VarianceReport:
    """Normative path: pattern classes + moment recursion."""
    _check(p, n)
    engine = MomentEngine(t)
    classes = enumerate_pattern_classes(n, p)
    return _aggregate(p, n, t.d, t[p], classes, lambda pat: pair_expectation(pat, t, p, engine))


def exact_variance_all_pairs(p: int, n: int, t: TracePowerTable) -> VarianceReport:
    """Same computation over every ordered pair; kept as a check on the class grouping."""
    _check(p, n)
    engine = MomentEngine(t)
    grouped: dict[tuple, int] = {}
    for pat in all_pairs_patterns(n, p):
        grouped[pat.key()] = grouped.get(pat.key(), 0) + 1
    classes = [OverlapPattern(q, k, m, c) for (q, k, m), c in sorted(grouped.items())]
    return _aggregate(p, n, t.d, t[p], classes, lambda pat: pair_expectation(pat, t, p, engine))


def oracle_class_variance(p: int, n: int, s: Spectrum) -> VarianceReport:
    """Pattern classes, with each pair moment taken from the Isserlis oracle."""
    _check(p, n)
    if s.d ** (2 * p) > MAX_TERMS:
        raise SizeGuardError(f"oracle method needs d^(2p) = {s.d ** (2 * p)} terms (limit {MAX_TERMS})")
    t = table_for(s, p)

    def expectation(pat: OverlapPattern) -> float:
        if pat.q == 0:
            return t[p] ** 2
        k, m = pat.folded()
        return isserlis_moment(MomentQuery("M", k, m), s)

    return _aggregate(p, n, s.d, t[p], enumerate_pattern_classes(n, p), expectation)


def exact_variance_closed_p2(n: int, t: TracePowerTable) -> float:
    """Closed form at p = 2 from the three overlap sizes (disjoint, one shared, identical)."""
    if n < 2:
        raise InputError("need n >= 2 for p = 2")
    s2, s4 = t[2], t[4]
    c = comb(n, 2) ** 2
    w0 = Fraction(comb(n, 4) * comb(4, 2), c)
    w1 = Fraction(comb(n, 3) * 6, c)
    w2 = Fraction(comb(n, 2), c)
    return math.fsum([
        float(w0 - 1) * s2**2,
        float(w1) * (2 * s4 + s2**2),
        float(w2) * (6 * s4 + 3 * s2**2),
    ])


def literal_letters(pat: OverlapPattern, t_index: int) -> tuple[int, ...]:
    """beta letters for one (pattern, t) term of the printed variance formula.

    Chosen convention: K and M partial sums (and the k_i, m_i) are those of the
    folded arguments, k_q -> k_q + k_0 and m_q -> m_q + m_0, i.e. the arguments
    the pair moment is actually evaluated at.
    """
    k, m = pat.folded()
    q = pat.q
    r = q - t_index
    beta0 = sum(k[r:]) + sum(m[r:])
    return (beta0,) + tuple(k[i] + m[i] for i in range(r))


def paper_literal_report(p: int, n: int, t: TracePowerTable) -> VarianceReport:
    """The printed variance representation, evaluated verbatim (diagnostic)."""
    _check(p, n)

    def expectation(pat: OverlapPattern) -> float:
        if pat.q <= 1:
            return pair_expectation(pat, t, p)
        return math.fsum(
            (1 << (ti - 1)) * star_sum(literal_letters(pat, ti), t) for ti in range(1, pat.q)
        )

    return _aggregate(p, n, t.d, t[p], enumerate_pattern_classes(n, p), expectation)


def variance_paper_literal(p: int, n: int, t: TracePowerTable) -> float:
    return paper_literal_report(p, n, t).variance


def brute_variance(p: int, n: int, spectrum: Spectrum | list[float]) -> float:
    """All ordered cycle pairs, each expectation by direct Wick expansion.

    Independent of the overlap statistics and of the moment recursions: every
    pair expectation is E[W_sigma W_tau] computed from the raw cycle products.
    Pairs with the same relative order share a value and are cached.
    """
    _check(p, n)
    s = as_spectrum(spectrum)
    pairs = comb(n, p) ** 2
    if pairs > BRUTE_MAX_PAIRS:
        raise SizeGuardError(f"brute variance needs {pairs} pairs (limit {BRUTE_MAX_PAIRS})")
    if s.d ** (2 * p) > MAX_TERMS:
        raise SizeGuardError(f"brute variance needs d^(2p) = {s.d ** (2 * p)} terms (limit {MAX_TERMS})")
    orders = sum(comb(2 * p - q, p) * comb(p, q) for q in range(p + 1) if 2 * p - q <= n)
    if orders * s.d ** (2 * p) > BRUTE_MAX_WORK:
        raise SizeGuardError(
            f"brute variance needs {orders} relative orders x d^(2p) = {orders * s.d ** (2 * p)} "
            f"terms (limit {BRUTE_MAX_WORK})"
        )
    cycles = enumerate_increasing_cycles(n, p)
    mean = link_expectation(cycle_links(tuple(range(1, p + 1))), s)
    cache: dict[tuple, float] = {}
    terms = []
    for a in cycles:
        for b in cycles:
            key = compress(a, b)
            if key not in cache:
                ca, cb = key
                # distinct vector ids for each index; shared indices share vectors
                cache[key] = link_expectation(cycle_links(ca) + cycle_links(cb), s)
            terms.append(cache[key])
    return math.fsum(terms) / pairs - mean**2
