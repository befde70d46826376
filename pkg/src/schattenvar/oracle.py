"""Brute-force Gaussian moments via the Isserlis (Wick) theorem.

S is taken diagonal, which loses nothing because N(0, I) is rotation
invariant. A product of bilinear links X_a^T S^e X_b then expands over one
coordinate index per link, and the expectation factorises over the distinct
Gaussian vectors; each vector's coordinate moment is a sum over perfect
matchings of its coordinate slots. Cost is d^(number of links).
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Sequence

import numpy as np

from .errors import InputError, SizeGuardError
from .moments import MomentQuery
from .spectrum import Spectrum

MAX_TERMS = 10**7

Link = tuple[int, int, int]  # (vector a, exponent e, vector b) for X_a^T S^e X_b


def _matchings(slots: list[int]) -> list[list[tuple[int, int]]]:
    if not slots:
        return [[]]
    first, rest = slots[0], slots[1:]
    out = []
    for i, other in enumerate(rest):
        for tail in _matchings(rest[:i] + rest[i + 1 :]):
            out.append([(first, other)] + tail)
    return out


def link_expectation(links: Sequence[Link], spectrum: Spectrum) -> float:
    """E[prod_t X_{a_t}^T S^{e_t} X_{b_t}] for i.i.d. standard Gaussian vectors."""
    L = len(links)
    d = spectrum.d
    if L == 0:
        return 1.0
    if d**L > MAX_TERMS:
        raise SizeGuardError(f"Isserlis expansion needs d^{L} = {d**L} terms (limit {MAX_TERMS})")
    slots: dict[int, list[int]] = defaultdict(list)
    for t, (a, _, b) in enumerate(links):
        slots[a].append(t)
        slots[b].append(t)
    for a, s in slots.items():
        if len(s) % 2:
            return 0.0

    # odometer order: last link index varies fastest
    J = np.indices((d,) * L, dtype=np.int32).reshape(L, -1)
    lam = spectrum.as_array()
    weight = np.ones(J.shape[1])
    for t, (_, e, _) in enumerate(links):
        weight *= (lam**e)[J[t]]
    for s in slots.values():
        total = np.zeros(J.shape[1])
        for matching in _matchings(s):
            term = np.ones(J.shape[1], dtype=bool)
            for x, y in matching:
                if x != y:
                    term &= J[x] == J[y]
            total += term
        weight *= total
    return math.fsum(weight.tolist())


def chain_links(vectors: Sequence[int], exponents: Sequence[int]) -> list[Link]:
    """Links of Tr(prod_t X_{v_t} X_{v_t}^T S^{e_t}), closing cyclically."""
    n = len(vectors)
    return [(vectors[t], exponents[t], vectors[(t + 1) % n]) for t in range(n)]


def isserlis_moment(query: MomentQuery, s: Spectrum) -> float:
    q = query.q
    first = list(range(q))
    if query.kind == "M":
        vectors = first + first
        exps = list(query.k) + list(query.m)
    else:
        vectors = first + first[::-1]
        exps = list(query.k) + list(reversed(query.m))
    if s.d ** (2 * q) > MAX_TERMS:
        raise SizeGuardError(f"oracle needs d^(2q) = {s.d ** (2 * q)} terms (limit {MAX_TERMS})")
    return link_expectation(chain_links(vectors, exps), s)


def cycle_links(cycle: Sequence[int], exponent: int = 1) -> list[Link]:
    """Links of the cycle product prod_i (X S X^T)_{c_i c_{i+1}} with wraparound."""
    p = len(cycle)
    return [(cycle[i], exponent, cycle[(i + 1) % p]) for i in range(p)]


def quartic_identity_residual(A, lam) -> float:
    """Max-abs residual of E[X X^T A X X^T] = L(A + A^T)L + Tr(A L) L, X ~ N(0, L), L diagonal.

    The left side is summed entrywise from the covariance form of Wick's rule.
    """
    A = np.asarray(A, dtype=float)
    lam = np.asarray(lam.eigenvalues if isinstance(lam, Spectrum) else lam, dtype=float)
    d = lam.size
    if A.shape != (d, d):
        raise InputError(f"A must be {d}x{d}")
    if d > 6:
        raise SizeGuardError("quartic identity check is limited to d <= 6")
    C = np.diag(lam)
    lhs = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            acc = []
            for c in range(d):
                for e in range(d):
                    m4 = C[a, c] * C[e, b] + C[a, e] * C[c, b] + C[a, b] * C[c, e]
                    acc.append(A[c, e] * m4)
            lhs[a, b] = math.fsum(acc)
    rhs = C @ (A + A.T) @ C + np.trace(A @ C) * C
    return float(np.max(np.abs(lhs - rhs)))
