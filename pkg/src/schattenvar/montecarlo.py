"""Seeded Gaussian sketches and the cycle estimator V_p^n.

Random streams: every draw comes from numpy's PCG64 seeded with
``SeedSequence(seed, spawn_key=stream)``; normals use numpy's ziggurat
``standard_normal``. Replicates are grouped in fixed blocks of
``BLOCK_SIZE``; block b uses stream ``(b,)``. Block boundaries never depend on
the worker count, so serial and threaded runs produce identical arrays.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .spectrum import Spectrum

BLOCK_SIZE = 1024
N_BATCHES = 50


def _generator(seed: int, stream: Sequence[int] = ()) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in stream))
    return np.random.Generator(np.random.PCG64(ss))


def sample_sketch(n: int, d: int, seed: int, stream: Sequence[int] = ()) -> np.ndarray:
    """n x d matrix of i.i.d. standard normals, bit-identical for equal (seed, stream)."""
    if n < 1 or d < 1:
        raise InputError("sketch needs n, d >= 1")
    return _generator(seed, stream).standard_normal((n, d))


def _gram_operator(S) -> np.ndarray:
    if isinstance(S, Spectrum):
        return np.diag(S.as_array())
    S = np.asarray(S, dtype=float)
    return np.diag(S) if S.ndim == 1 else S


def estimate_vpn(X, S, p: int) -> float:
    """Average of the cycle products W_{i1 i2} ... W_{ip i1} over increasing p-cycles, W = X S X^T.

    ``S`` may be a Spectrum (taken as diagonal), a 1-D eigenvalue array, or a
    full d x d matrix.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if p < 1:
        raise InputError("p must be >= 1")
    if n < p:
        raise InputError(f"n must be >= p (n={n}, p={p})")
    W = X @ _gram_operator(S) @ X.T
    terms = []
    for cyc in itertools.combinations(range(n), p):
        prod = 1.0
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            prod *= W[a, b]
        terms.append(prod)
    return math.fsum(terms) / comb(n, p)


def _estimate_block(X: np.ndarray, lam: np.ndarray, p: int) -> np.ndarray:
    """Vectorised estimator over a stack of sketches X with shape (r, n, d)."""
    n = X.shape[1]
    W = np.einsum("rnd,d,rmd->rnm", X, lam, X)
    acc = np.zeros(X.shape[0])
    for cyc in itertools.combinations(range(n), p):
        prod = np.ones(X.shape[0])
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            prod = prod * W[:, a, b]
        acc += prod
    return acc / comb(n, p)


@dataclass
class SketchConfig:
    p: int
    n: int
    seed: int
    reps: int
    spectrum: Spectrum

    def __post_init__(self):
        if self.p < 1 or self.n < self.p:
            raise InputError(f"n must be >= p >= 1 (n={self.n}, p={self.p})")
        if self.reps < 1:
            raise InputError("reps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")

    @property
    def d(self) -> int:
        return self.spectrum.d


@dataclass
class EstimateStats:
    empirical_mean: float
    empirical_variance: Optional[float]
    stderr_mean: Optional[float]
    stderr_variance: Optional[float]
    reps: int
    n_batches: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)


def replicate_values(cfg: SketchConfig, threads: int = 1) -> np.ndarray:
    """One estimate per replicate, in replicate order."""
    lam = cfg.spectrum.as_array()
    sizes = [min(BLOCK_SIZE, cfg.reps - start) for start in range(0, cfg.reps, BLOCK_SIZE)]

    def run(b: int) -> np.ndarray:
        X = _generator(cfg.seed, (b,)).standard_normal((sizes[b], cfg.n, cfg.d))
        return _estimate_block(X, lam, cfg.p)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run, range(len(sizes))))
    else:
        blocks = [run(b) for b in range(len(sizes))]
    return np.concatenate(blocks)


def summarize(values: np.ndarray, n_batches: int = N_BATCHES) -> EstimateStats:
    reps = values.size
    mean = math.fsum(values.tolist()) / reps
    if reps < 2:
        return EstimateStats(mean, None, None, None, reps)
    dev = values - mean
    var = math.fsum((dev * dev).tolist()) / (reps - 1)
    se_mean = math.sqrt(var / reps)
    nb = min(n_batches, reps // 2)
    se_var = None
    if nb >= 2:
        batches = np.array_split(values, nb)
        bvars = np.array([np.var(b, ddof=1) for b in batches])
        se_var = float(np.std(bvars, ddof=1) / math.sqrt(nb))
    return EstimateStats(mean, var, se_mean, se_var, reps, nb if nb >= 2 else None)


def run_experiment(cfg: SketchConfig, threads: int = 1) -> EstimateStats:
    return summarize(replicate_values(cfg, threads))
