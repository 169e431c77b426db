# Python module: complexity.py

# Import the required libraries
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from core.backend.codings.systems import (
    Coding,
    CodingSystem,
    CylinderMeasures,
    cylinder_measures,
    sample_codings,
    sample_phases,
)
from core.errors import BudgetError, DomainError

logger = logging.getLogger(__name__)

HASH_MULT = np.uint64(0x9E3779B97F4A7C15)
SUFFICIENCY_FACTOR = 10
QUANTILE = 0.1

Sample = Union[Coding, np.ndarray, Sequence[int], Sequence[np.ndarray]]


def _segments(seq: Sample) -> List[np.ndarray]:
    if isinstance(seq, Coding):
        return [seq.symbols.astype(np.int64)]
    if isinstance(seq, np.ndarray):
        return [seq.astype(np.int64).reshape(-1)] if seq.ndim <= 1 else [row.astype(np.int64) for row in seq]
    items = list(seq)
    if items and isinstance(items[0], (np.ndarray, Coding, list, tuple)):
        return [s for item in items for s in _segments(item)]
    return [np.asarray(items, dtype=np.int64)]


def _window_keys(block: np.ndarray, n: int, base: int) -> np.ndarray:
    """One uint64 key per length-n window along the last axis; exact while base**n < 2**64."""
    count = block.shape[-1] - n + 1
    if count <= 0:
        return np.empty(0, dtype=np.uint64)
    exact = n * math.log2(max(base, 2)) < 64
    mult = np.uint64(base) if exact else HASH_MULT
    shifted = block.astype(np.uint64) + np.uint64(0 if exact else 1)
    keys = np.zeros(block.shape[:-1] + (count,), dtype=np.uint64)
    for j in range(n):
        keys = keys * mult + shifted[..., j : j + count]
    return keys.reshape(-1)


def _blocks(segments: List[np.ndarray]) -> List[np.ndarray]:
    """Stack segments of equal length so windows are hashed in one pass."""
    by_length: Dict[int, List[np.ndarray]] = {}
    for s in segments:
        by_length.setdefault(s.size, []).append(s)
    return [np.vstack(group) for group in by_length.values()]


def complexity(seq: Sample, n: int) -> int:
    """Number of distinct length-n factors in the sample (one or more segments).

    Short samples undercount, so the value is a lower bound for p(n).
    """
    if n < 1:
        raise DomainError("Factor length must be >= 1")
    segments = _segments(seq)
    total = sum(s.size for s in segments)
    if total < SUFFICIENCY_FACTOR * n:
        logger.warning("Sample of %d symbols is short for n=%d; p(n) is a lower bound", total, n)
    base = int(max((int(s.max()) for s in segments if s.size), default=0)) + 1
    keys = [_window_keys(block, n, base) for block in _blocks(segments)]
    keys = [k for k in keys if k.size]
    if not keys:
        return 0
    return int(np.unique(np.concatenate(keys)).size)


def complexity_counts(seq: Sample, ns: Sequence[int]) -> np.ndarray:
    segments = _segments(seq)
    return np.array([complexity(segments, int(n)) for n in ns], dtype=np.int64)


@dataclass(frozen=True)
class ComplexityProfile:
    """Empirical p(n) over a range of n and the fitted polynomial bound."""

    variant: str
    ns: Tuple[int, ...]
    counts: Tuple[int, ...]
    exponent: float
    constant: float
    sample_length: int
    affine: Optional[Tuple[int, int]] = None
    affine_exact: Optional[bool] = None

    @property
    def sufficient(self) -> bool:
        return self.sample_length >= SUFFICIENCY_FACTOR * max(self.ns)

    @property
    def monotone(self) -> bool:
        return all(b >= a for a, b in zip(self.counts, self.counts[1:]))

    def bound(self, n: int) -> float:
        return self.constant * n**self.exponent

    def rows(self) -> List[Tuple[int, int, float]]:
        return [(n, p, self.bound(n)) for n, p in zip(self.ns, self.counts)]

    def to_dict(self) -> Dict:
        return {
            "variant": self.variant,
            "n": list(self.ns),
            "p": list(self.counts),
            "exponent": self.exponent,
            "C": self.constant,
            "sample_length": self.sample_length,
            "sufficient": self.sufficient,
            "affine": list(self.affine) if self.affine else None,
            "affine_exact": self.affine_exact,
        }


def _bound_exponent(sys: CodingSystem) -> float:
    if sys.variant == "torus":
        return float(sys.dim)
    if sys.variant == "skew":
        return 3.0
    if sys.variant == "iet":
        return 1.0
    raise DomainError("A Bernoulli system has no polynomial complexity bound")


def complexity_bound_check(
    sys: CodingSystem,
    n_range: Sequence[int],
    sample_length: int = 10**6,
    phases: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    threads: int = 1,
) -> ComplexityProfile:
    """Count p(n) over ``n_range`` and fit the least C with p(n) <= C n^e.

    The sample is split into segments of ``10 * max(n)`` symbols started at
    stratified phases. IETs also check the affine form (r - 1) n + 1.
    """
    ns = tuple(int(n) for n in n_range)
    if not ns or min(ns) < 1:
        raise DomainError("Complexity range must hold positive lengths")
    exponent = _bound_exponent(sys)
    rng = rng or np.random.default_rng(0)
    segment = SUFFICIENCY_FACTOR * max(ns)
    count = phases or max(1, sample_length // segment)
    codings = sample_codings(sys, sample_phases(sys, count, rng), segment, threads=threads)
    counts = complexity_counts(codings, ns)
    constant = float(max(p / n**exponent for n, p in zip(ns, counts)))

    affine = affine_exact = None
    if sys.variant == "iet":
        r = len(sys.lengths)
        affine = (r - 1, 1)
        affine_exact = bool(all(p == (r - 1) * n + 1 for n, p in zip(ns, counts)))
    profile = ComplexityProfile(sys.variant, ns, tuple(int(p) for p in counts), exponent, constant, count * segment, affine, affine_exact)
    logger.info("Complexity profile %s: p(%d)=%d, C=%.4g (e=%g)", sys.variant, ns[-1], counts[-1], constant, exponent)
    return profile


@dataclass(frozen=True)
class TransitivityProfile:
    """Visited cylinder mass per phase within the window [0, C n^e]."""

    n: int
    window: int
    masses: Tuple[float, ...]
    quantile: float
    delta: float
    method: str

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "window": self.window,
            "quantile": self.quantile,
            "delta": self.delta,
            "method": self.method,
            "masses": list(self.masses),
        }


def _factors(segment: np.ndarray, n: int, starts: int) -> List[Tuple[int, ...]]:
    windows = sliding_window_view(segment, n)[:starts]
    return [tuple(int(s) for s in row) for row in np.unique(windows, axis=0)]


def transitivity_profile(
    sys: CodingSystem,
    n: int,
    C: float,
    exponent: float,
    phases: int = 64,
    rng: Optional[np.random.Generator] = None,
    quantile: float = QUANTILE,
    max_window: int = 10**6,
    measures: Optional[CylinderMeasures] = None,
    threads: int = 1,
) -> TransitivityProfile:
    """Estimate the transitivity constant delta at one length n.

    For each sampled phase the n-cylinders entered at times 0..C n^e are
    collected and their measure summed; delta is the lower quantile.
    """
    window = int(math.ceil(C * n**exponent))
    if window > max_window:
        raise BudgetError(f"Transitivity window {window} exceeds the budget {max_window}", required=window)
    measures = measures or cylinder_measures(sys, n)
    rng = rng or np.random.default_rng(0)
    codings = sample_codings(sys, sample_phases(sys, phases, rng), window + n, threads=threads)
    masses = tuple(float(sum(measures.measures.get(f, 0.0) for f in _factors(seg, n, window + 1))) for seg in codings)
    delta = float(np.quantile(masses, quantile))
    logger.info("Transitivity n=%d window=%d: delta=%.4g (%s measures)", n, window, delta, measures.method)
    return TransitivityProfile(n, window, masses, quantile, delta, measures.method)


def complexity_mass_profile(sys: CodingSystem, n: int, eps: float, measures: Optional[CylinderMeasures] = None) -> int:
    """Least number of (2n+1)-cylinders whose total mass exceeds 1 - eps."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    measures = measures or cylinder_measures(sys, 2 * n + 1)
    cumulative = np.cumsum(measures.masses())
    above = np.nonzero(cumulative > 1.0 - eps)[0]
    return int(above[0] + 1) if above.size else int(cumulative.size)
