"""Gaussian trace moments M(q; k|m) and N(q; k|m).

With P_i = X_i X_i^T for i.i.d. standard Gaussian X_1..X_q:

    M(q; k|m) = E Tr(P_1 S^k_1 ... P_q S^k_q  P_1 S^m_1 ... P_q S^m_q)
    N(q; k|m) = E Tr(P_1 S^k_1 ... P_q S^k_q  P_q S^m_q ... P_1 S^m_1)

Convention: ``m`` is always stored in natural index order, m[i-1] being the
exponent that follows P_i in the second pass. The customary printed form of N
lists the second pass as (m_q, ..., m_1); :meth:`MomentQuery.from_printed_n`
converts from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

from .errors import InputError
from .spectrum import TracePowerTable
from .words import star_sum

Kind = Literal["M", "N"]


@dataclass(frozen=True)
class MomentQuery:
    kind: Kind
    k: tuple[int, ...]
    m: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("M", "N"):
            raise InputError(f"unknown moment kind {self.kind!r}")
        if len(self.k) != len(self.m) or not self.k:
            raise InputError("k and m must be non-empty and of equal length")
        if any(x < 0 for x in self.k + self.m):
            raise InputError("exponents must be non-negative")

    @property
    def q(self) -> int:
        return len(self.k)

    @classmethod
    def from_printed_n(cls, k: Sequence[int], m_printed: Sequence[int]) -> "MomentQuery":
        return cls("N", tuple(k), tuple(reversed(tuple(m_printed))))

    def letters(self) -> tuple[int, ...]:
        """alpha_0 = m_1, alpha_i = k_i + m_{i+1}, alpha_q = k_q (N only)."""
        k, m = self.k, self.m
        q = self.q
        return (m[0],) + tuple(k[i] + m[i + 1] for i in range(q - 1)) + (k[q - 1],)


def base_moment(k: int, m: int, t: TracePowerTable) -> float:
    """M(1; k|m) = N(1; k|m) = 2 S_{k+m} + S_k S_m."""
    return 2.0 * t[k + m] + t[k] * t[m]


class MomentEngine:
    """Recursive evaluation of M and N against one trace table, memoised."""

    def __init__(self, table: TracePowerTable):
        self.table = table
        self._n_memo: dict[tuple, float] = {}
        self._m_memo: dict[tuple, float] = {}

    def n(self, k: tuple[int, ...], m: tuple[int, ...]) -> float:
        key = (k, m)
        hit = self._n_memo.get(key)
        if hit is not None:
            return hit
        q = len(k)
        if q == 1:
            val = base_moment(k[0], m[0], self.table)
        else:
            # integrate out the innermost pair P_q S^k_q P_q
            kq, mq = k[-1], m[-1]
            head_k, head_m = k[:-2], m[:-1]
            merged = self.n(head_k + (k[-2] + kq + mq,), head_m)
            traced = self.n(head_k + (k[-2] + mq,), head_m)
            val = 2.0 * merged + self.table[kq] * traced
        self._n_memo[key] = val
        return val

    def m_(self, k: tuple[int, ...], m: tuple[int, ...]) -> float:
        key = (k, m)
        hit = self._m_memo.get(key)
        if hit is not None:
            return hit
        q = len(k)
        if q == 1:
            val = base_moment(k[0], m[0], self.table)
        else:
            kl, ml = k[-1], m[-1]
            k_head, m_head = k[:-2], m[:-2]
            kp, mp = k[-2], m[-2]
            first = self.m_(k_head + (kp + kl,), m_head + (mp + ml,))
            second = self.n(k_head + (kp + mp,), (kl + ml,) + m[:-2])
            third = self.m_(k_head + (kp + ml,), m_head + (mp + kl,))
            val = first + second + third
        self._m_memo[key] = val
        return val

    def evaluate(self, query: MomentQuery) -> float:
        if query.kind == "N":
            return self.n(query.k, query.m)
        return self.m_(query.k, query.m)


def n_moment(query: MomentQuery, t: TracePowerTable, engine: MomentEngine | None = None) -> float:
    if query.kind != "N":
        raise InputError("n_moment expects an N query")
    return (engine or MomentEngine(t)).n(query.k, query.m)


def m_moment(query: MomentQuery, t: TracePowerTable, engine: MomentEngine | None = None) -> float:
    if query.kind != "M":
        raise InputError("m_moment expects an M query")
    return (engine or MomentEngine(t)).m_(query.k, query.m)


def n_moment_closed(query: MomentQuery, t: TracePowerTable) -> float:
    """N through the oplus/otimes star sum over its derived letters."""
    if query.kind != "N":
        raise InputError("n_moment_closed expects an N query")
    return star_sum(query.letters(), t)


def literal_m_terms(k: Sequence[int], m: Sequence[int]) -> list[tuple[int, MomentQuery]]:
    """(weight, N query) terms of the printed closed form for M, q >= 2.

    Term t (1 <= t <= q-1) has weight 2^(t-1) and is
    N(q-t; k_1, .., k_{q-t} + m_{q-t} | m_{q-t-1}, .., m_1, K_{q-t+1,q} + M_{q-t+1,q})
    in printed (reversed second pass) order.
    """
    q = len(k)
    if q < 2:
        raise InputError("the closed form for M is stated for q > 1 only")
    terms = []
    for t in range(1, q):
        r = q - t
        tail = sum(k[r:]) + sum(m[r:])
        kk = tuple(k[: r - 1]) + (k[r - 1] + m[r - 1],)
        printed = tuple(reversed(m[: r - 1])) + (tail,)
        terms.append((1 << (t - 1), MomentQuery.from_printed_n(kk, printed)))
    return terms


def m_moment_paper_literal(query: MomentQuery, t: TracePowerTable) -> float:
    """Printed closed form for M, evaluated verbatim.

    Diagnostic only: it disagrees with the recursion (e.g. it gives
    2 S_4 + S_2^2 for M(2; 1,1|1,1) where the recursion gives 6 S_4 + 3 S_2^2).
    """
    if query.kind != "M":
        raise InputError("m_moment_paper_literal expects an M query")
    engine = MomentEngine(t)
    return sum(w * engine.n(nq.k, nq.m) for w, nq in literal_m_terms(query.k, query.m))
