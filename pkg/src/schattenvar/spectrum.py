"""Spectra of S = B^T B and their trace powers.

Everything downstream of this module sees S only through the power sums
S_k = Tr(S^k) = sum_j lambda_j^k, so inputs are reduced to eigenvalues once.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, NumericalError, RangeError

CLAMP_RTOL = 1e-10


def _clamp_nonnegative(values: np.ndarray) -> np.ndarray:
    tol = CLAMP_RTOL * max(1.0, float(np.max(np.abs(values), initial=0.0)))
    if np.any(values < -tol):
        raise NumericalError(
            f"eigenvalue {float(values.min()):.3e} is negative beyond tolerance {tol:.1e}"
        )
    return np.where(values < 0.0, 0.0, values)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of S, non-negative and sorted in non-increasing order."""

    eigenvalues: tuple[float, ...]

    def __post_init__(self):
        ev = self.eigenvalues
        if len(ev) == 0:
            raise InputError("spectrum must contain at least one eigenvalue")
        if any(x < 0 or not math.isfinite(x) for x in ev):
            raise InputError("spectrum entries must be finite and non-negative")
        if any(ev[i] < ev[i + 1] for i in range(len(ev) - 1)):
            raise InputError("spectrum must be sorted non-increasing; use Spectrum.from_values")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "Spectrum":
        arr = np.asarray(list(values), dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError("spectrum must be a non-empty flat list of numbers")
        if not np.all(np.isfinite(arr)):
            raise InputError("spectrum contains non-finite entries")
        arr = _clamp_nonnegative(arr)
        return cls(tuple(float(x) for x in sorted(arr.tolist(), reverse=True)))

    @classmethod
    def identity(cls, d: int) -> "Spectrum":
        return cls((1.0,) * d)

    @property
    def d(self) -> int:
        return len(self.eigenvalues)

    def as_array(self) -> np.ndarray:
        return np.array(self.eigenvalues, dtype=float)

    def scaled(self, c: float) -> "Spectrum":
        return Spectrum.from_values([c * x for x in self.eigenvalues])


def gram_spectrum(B) -> Spectrum:
    """Eigenvalues of S = B^T B for a d_rows x d matrix B.

    Computed as squared singular values of B (more accurate than an
    eigensolve of the explicitly formed Gram matrix), zero-padded to the
    column count d.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or min(B.shape) < 1:
        raise InputError(f"matrix must be 2-D and non-empty, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise InputError("matrix contains non-finite entries")
    sv = np.linalg.svd(B, compute_uv=False)
    lam = np.zeros(B.shape[1])
    lam[: sv.size] = sv**2
    return Spectrum.from_values(lam)


@dataclass(frozen=True)
class TracePowerTable:
    """S_k = Tr(S^k) for k = 0..k_max."""

    values: tuple[float, ...]
    d: int

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> float:
        if k < 0 or k > self.k_max:
            raise RangeError(f"trace power S_{k} requested but table stops at k_max={self.k_max}")
        return self.values[k]


def trace_powers(s: Spectrum, k_max: int) -> TracePowerTable:
    if k_max < 0:
        raise InputError("k_max must be non-negative")
    lam = s.eigenvalues
    values = [float(s.d)]
    for k in range(1, k_max + 1):
        try:
            v = math.fsum(x**k for x in lam)
        except OverflowError as exc:
            raise RangeError(f"Tr(S^{k}) overflows double precision") from exc
        if math.isinf(v):
            raise RangeError(f"Tr(S^{k}) overflows double precision")
        values.append(v)
    return TracePowerTable(tuple(values), s.d)


def table_for(s: Spectrum, p: int) -> TracePowerTable:
    """Table deep enough for every moment of the order-p estimator."""
    return trace_powers(s, 4 * p)


def schatten_norm(s: Spectrum, p: float) -> float:
    """||B||_p when the spectrum holds the squared singular values of B."""
    if p < 1:
        raise InputError("Schatten norm needs p >= 1")
    return math.fsum(x ** (p / 2) for x in s.eigenvalues) ** (1.0 / p)


def schatten_2p_power(s: Spectrum, p: int) -> float:
    """Tr(S^p) = ||B||_{2p}^{2p}, the quantity the sketch estimator targets."""
    if p < 1:
        raise InputError("p must be >= 1")
    return math.fsum(x**p for x in s.eigenvalues)


def load_spectrum_json(path: str | Path) -> Spectrum:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read spectrum file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"spectrum file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in data
    ):
        raise InputError("spectrum JSON must be an array of numbers")
    return Spectrum.from_values(data)


def load_matrix_csv(path: str | Path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read matrix file {path}: {exc}") from exc
    rows: list[list[float]] = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            rows.append([float(cell) for cell in row])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: malformed CSV entry ({exc})") from exc
    if not rows:
        raise InputError(f"{path}: matrix is empty")
    if len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: rows have differing lengths")
    return np.array(rows, dtype=float)


def write_spectrum_json(s: Spectrum, path: str | Path) -> None:
    Path(path).write_text(json.dumps(list(s.eigenvalues)))


def as_spectrum(obj: Spectrum | Sequence[float]) -> Spectrum:
    return obj if isinstance(obj, Spectrum) else Spectrum.from_values(obj)
