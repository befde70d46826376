"""Increasing cycles, their pairwise overlap statistics, and counting identities.

A pair of increasing p-cycles (sigma, tau) is summarised by its common part
gamma = sigma & tau (size q) and by how many elements of each cycle fall in
the half-open windows [gamma_i, gamma_{i+1}). The statistics only depend on
the relative order of sigma | tau, which is what makes pattern classes work.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import InputError

Cycle = tuple[int, ...]


@dataclass(frozen=True, order=True)
class OverlapPattern:
    """Overlap statistics (q; k_0..k_q; m_0..m_q) of an ordered cycle pair.

    ``multiplicity`` counts the ordered pairs over [1, n] sharing the pattern
    when the pattern comes from :func:`enumerate_pattern_classes`.
    """

    q: int
    k: tuple[int, ...]
    m: tuple[int, ...]
    multiplicity: int = 1

    def __post_init__(self):
        if len(self.k) != self.q + 1 or len(self.m) != self.q + 1:
            raise InputError("k and m must have q + 1 entries")

    @property
    def p(self) -> int:
        return sum(self.k)

    def K(self, i: int, j: int) -> int:
        return sum(self.k[i : j + 1]) if i <= j else 0

    def M(self, i: int, j: int) -> int:
        return sum(self.m[i : j + 1]) if i <= j else 0

    def folded(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(k_1..k_q + k_0, m_1..m_q + m_0): the arguments of the pair moment."""
        if self.q == 0:
            raise InputError("a disjoint pair has no folded moment arguments")
        k = self.k[1:-1] + (self.k[-1] + self.k[0],)
        m = self.m[1:-1] + (self.m[-1] + self.m[0],)
        return k, m

    def key(self) -> tuple:
        return (self.q, self.k, self.m)


def enumerate_increasing_cycles(n: int, p: int) -> list[Cycle]:
    if p < 1 or n < 0:
        raise InputError("need p >= 1 and n >= 0")
    return list(itertools.combinations(range(1, n + 1), p))


def _window_counts(cycle: Cycle, gamma: Cycle) -> tuple[int, ...]:
    q = len(gamma)
    counts = [0] * (q + 1)
    for j in cycle:
        # number of gamma elements <= j is the window index
        idx = sum(1 for g in gamma if g <= j)
        counts[idx] += 1
    return tuple(counts)


def overlap_decompose(sigma: Cycle, tau: Cycle) -> OverlapPattern:
    sigma, tau = tuple(sigma), tuple(tau)
    if len(sigma) != len(tau):
        raise InputError(f"cycle lengths differ: {len(sigma)} vs {len(tau)}")
    for c in (sigma, tau):
        if any(c[i] >= c[i + 1] for i in range(len(c) - 1)):
            raise InputError(f"cycle {c} is not strictly increasing")
    if sigma and tau and sigma[0] > tau[0]:
        sigma, tau = tau, sigma
    p = len(sigma)
    gamma = tuple(sorted(set(sigma) & set(tau)))
    if not gamma:
        return OverlapPattern(0, (p,), (p,))
    return OverlapPattern(len(gamma), _window_counts(sigma, gamma), _window_counts(tau, gamma))


def compress(sigma: Cycle, tau: Cycle) -> tuple[Cycle, Cycle]:
    """Relabel sigma | tau onto [1, s] preserving order."""
    rank = {v: i + 1 for i, v in enumerate(sorted(set(sigma) | set(tau)))}
    return tuple(rank[v] for v in sigma), tuple(rank[v] for v in tau)


@lru_cache(maxsize=None)
def _canonical_classes(p: int) -> tuple[tuple[int, tuple, int], ...]:
    """(support size s, pattern key, count) over canonical supports [1, s]."""
    out = []
    for q in range(p + 1):
        s = 2 * p - q
        ground = range(1, s + 1)
        counts: Counter = Counter()
        for sigma in itertools.combinations(ground, p):
            rest = [v for v in ground if v not in sigma]
            for shared in itertools.combinations(sigma, q):
                tau = tuple(sorted(rest + list(shared)))
                counts[overlap_decompose(sigma, tau).key()] += 1
        for key in sorted(counts):
            out.append((s, key, counts[key]))
    return tuple(out)


def enumerate_pattern_classes(n: int, p: int) -> list[OverlapPattern]:
    """Pattern classes of all ordered pairs in Sigma^{p,n} x Sigma^{p,n}.

    Sorted by q, then by (k, m). Classes whose support does not fit in [1, n]
    are kept with multiplicity 0 so every q present for this p is listed.
    """
    if p < 1 or p > n:
        raise InputError(f"need 1 <= p <= n, got p={p}, n={n}")
    return [
        OverlapPattern(q, k, m, comb(n, s) * count)
        for s, (q, k, m), count in _canonical_classes(p)
    ]


def all_pairs_patterns(n: int, p: int) -> list[OverlapPattern]:
    """Naive all-pairs path: one pattern per ordered pair, multiplicity 1."""
    cycles = enumerate_increasing_cycles(n, p)
    return [overlap_decompose(a, b) for a in cycles for b in cycles]


def pair_count(n: int, p: int, q: int) -> int:
    """Ordered pairs of increasing p-cycles in [1, n] sharing exactly q indices."""
    if not 0 <= q <= p:
        raise InputError("need 0 <= q <= p")
    return comb(n, 2 * p - q) * comb(2 * p - q, q) * comb(2 * p - 2 * q, p - q)


def tech1_ratio(n: int, p: int, q: int) -> int:
    """pair_count(n, p, q) / C(n, p), which is always an integer."""
    if not 0 <= q <= p <= n:
        raise InputError("need 0 <= q <= p <= n")
    num, den = pair_count(n, p, q), comb(n, p)
    quotient, rem = divmod(num, den)
    if rem:
        raise ArithmeticError(f"pair_count({n},{p},{q}) not divisible by C({n},{p})")
    return quotient


def tech1_rhs(n: int, p: int, q: int) -> int:
    return comb(n - p, p - q) * comb(p, q)


def tech2_terms(n: int, p: int, q: int) -> tuple[Fraction, Fraction]:
    """Exact (lhs, rhs) of C(n-p, p-q)/C(n, p) <= min(((n-p)/(n-q))^(p-q), (p/n)^q)."""
    lhs = Fraction(comb(n - p, p - q), comb(n, p))
    rhs = min(Fraction(n - p, n - q) ** (p - q), Fraction(p, n) ** q)
    return lhs, rhs
