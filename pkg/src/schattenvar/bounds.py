"""Variance upper bounds and moment sandwiches.

new bound:  (B1 + B2 + B3 + B4) Tr(S^p)^2
KV bound:   2^(12p) p^(6p) kappa^p max(d^(p-2)/n^p, d^(1/2-1/p)/n) Tr(S^p)^2
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

from .errors import InputError
from .moments import MomentEngine, MomentQuery
from .spectrum import Spectrum, TracePowerTable, table_for

GAUSSIAN_KAPPA = 3.0


@dataclass
class BoundReport:
    p: int
    n: int
    d: int
    trace_p: float
    b1: float
    b2: float
    b3: float
    b4: float
    new_bound: float
    kv_bound: float
    kappa: float
    ratio: float
    exact_variance: Optional[float] = None
    slack: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def log_kv_factor(p: int, n: int, d: int, kappa: float = GAUSSIAN_KAPPA) -> float:
    """Natural log of the KV bound divided by Tr(S^p)^2."""
    if p < 2 or n < p or d < 1 or kappa <= 0:
        raise InputError("KV bound needs p >= 2, n >= p, d >= 1, kappa > 0")
    a = (p - 2) * math.log(d) - p * math.log(n)
    b = (0.5 - 1.0 / p) * math.log(d) - math.log(n)
    return 12 * p * math.log(2) + 6 * p * math.log(p) + p * math.log(kappa) + max(a, b)


def kv_bound(p: int, n: int, d: int, kappa: float, trace_p: float) -> float:
    if trace_p == 0:
        return 0.0
    log_val = log_kv_factor(p, n, d, kappa) + 2 * math.log(abs(trace_p))
    try:
        return math.exp(log_val)
    except OverflowError:
        return math.inf


def b_terms(p: int, n: int, d: int) -> tuple[float, float, float, float]:
    if p < 1 or n < p or d < 1:
        raise InputError("bound needs p >= 1, n >= p, d >= 1")
    if n >= 2 * p:
        prod = Fraction(1)
        for k in range(p):
            prod *= Fraction(n - k - p, n - k)
        b1 = prod - 1
        # (n-p)!^2 / (n! (n-2p)!) is the same product
        b2 = prod * Fraction(p * p, n - 2 * p + 1)
    else:
        b1 = b2 = Fraction(0)
    x = Fraction(3 * p * d, n)
    b3 = Fraction(2, 3 * d * d) * ((x + 1) ** p - Fraction(3 * p * p * d, n) - 1)
    b4 = (2**p * (d - 1)) / (3 * d * d) * (3 * p * d / n) ** (p / 2)
    return float(b1), float(b2), float(b3), float(b4)


def new_bound(p: int, n: int, d: int, trace_p: float,
              kappa: float = GAUSSIAN_KAPPA) -> BoundReport:
    b1, b2, b3, b4 = b_terms(p, n, d)
    nb = (b1 + b2 + b3 + b4) * trace_p**2
    kv = kv_bound(p, n, d, kappa, trace_p) if p >= 2 else math.nan
    ratio = nb / kv if kv and math.isfinite(kv) else (0.0 if kv == math.inf else math.nan)
    return BoundReport(p, n, d, trace_p, b1, b2, b3, b4, nb, kv, kappa, ratio)


def bound_report(s: Spectrum, p: int, n: int, kappa: float = GAUSSIAN_KAPPA,
                 with_exact: bool = True) -> BoundReport:
    from .variance import exact_variance

    t = table_for(s, p)
    rep = new_bound(p, n, s.d, t[p], kappa)
    if with_exact:
        rep.exact_variance = exact_variance(p, n, t).variance
        rep.slack = rep.new_bound - rep.exact_variance
    return rep


def _contains(lo: float, x: float, hi: float, rtol: float = 1e-12) -> bool:
    tol = rtol * max(abs(lo), abs(hi), abs(x))
    return lo - tol <= x <= hi + tol


def moment_sandwich_check(query: MomentQuery, t: TracePowerTable, p: int) -> dict:
    """Evaluate both sandwich variants for a moment and report containment.

    N: the tight sandwich applies when every derived letter is <= p, the
    d-relaxed one otherwise. M: the printed case split is q <= p/2 versus
    q > p/2; both variants are always evaluated so the report shows which
    one actually holds.
    """
    d = t.d
    sp2 = t[p] ** 2
    q = query.q
    value = MomentEngine(t).evaluate(query)
    if query.kind == "N":
        tight = (sp2 * 3**q, sp2 * d ** (q - 1) * 3**q)
        relaxed = (sp2 * 3**q / d, sp2 * d**q * 3**q)
        applies = "tight" if all(a <= p for a in query.letters()) else "relaxed"
        variants = {"tight": tight, "relaxed": relaxed}
    else:
        ratio = 2.0 / (3.0 * d)
        g = (1 - ratio ** (q - 1)) / (1 - ratio)
        low_q = ((3**q - 4) / d**2 * sp2, sp2 * 3 ** (q - 1) * d ** (q - 1) * g)
        high_q = ((3**q - 4) / d * sp2, sp2 * 3 ** (q - 1) * d ** (q - 2) * g)
        applies = "low_q" if q <= p / 2 else "high_q"
        variants = {"low_q": low_q, "high_q": high_q}
    return {
        "kind": query.kind,
        "q": q,
        "k": list(query.k),
        "m": list(query.m),
        "p": p,
        "d": d,
        "value": value,
        "applies": applies,
        "variants": {
            name: {"lower": lo, "upper": hi,
                   "lower_ok": value >= lo - 1e-12 * abs(lo),
                   "upper_ok": value <= hi + 1e-12 * abs(hi),
                   "contains": _contains(lo, value, hi)}
            for name, (lo, hi) in variants.items()
        },
    }
