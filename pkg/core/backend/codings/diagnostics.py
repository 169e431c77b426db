# Python module: diagnostics.py

# Import the required libraries
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.backend.codings.systems import CodingSystem, orbit_points, sample_phases
from core.errors import BudgetError, DomainError

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 2 * 10**7
HIT_CHUNK = 4096


@dataclass(frozen=True)
class FourierPolynomial:
    """f(x, y) = sum a cos 2pi(k.x) + b sin 2pi(k.x) over integer frequencies k.

    Example:
        ```python
        f = FourierPolynomial.from_terms([{"k": [0, 1], "cos": 1.0}])
        f(0.0, 0.0)   # 1.0
        ```
    """

    terms: Tuple[Tuple[int, int, float, float], ...]

    @staticmethod
    def from_terms(items: Sequence[Dict[str, Any]]) -> "FourierPolynomial":
        terms = []
        for item in items:
            kx, ky = (list(item.get("k", [0, 0])) + [0, 0])[:2]
            terms.append((int(kx), int(ky), float(item.get("cos", 0.0)), float(item.get("sin", 0.0))))
        return FourierPolynomial(tuple(terms))

    @staticmethod
    def constant(value: float) -> "FourierPolynomial":
        return FourierPolynomial(((0, 0, float(value), 0.0),))

    @property
    def mean(self) -> float:
        return float(sum(a for kx, ky, a, _ in self.terms if kx == 0 and ky == 0))

    def ck_norm(self, order: int = 0) -> float:
        """Upper bound for the C^k norm from the coefficients."""
        return float(sum((abs(a) + abs(b)) * (2 * math.pi * max(abs(kx), abs(ky), 1)) ** order for kx, ky, a, b in self.terms))

    def __call__(self, x: Union[float, np.ndarray], y: Union[float, np.ndarray]) -> np.ndarray:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for kx, ky, a, b in self.terms:
            phase = 2 * math.pi * (kx * x + ky * y)
            if a:
                out = out + a * np.cos(phase)
            if b:
                out = out + b * np.sin(phase)
        return out


def diophantine_margin(alpha: Union[float, Sequence[float]], tau: float, K: int) -> float:
    """min over 0 < |k|_inf <= K of ||<k, alpha>|| * |k|_inf^tau."""
    if K < 1:
        raise DomainError("K must be >= 1")
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    d = alpha.size
    if (2 * K + 1) ** d > ENUMERATION_CAP:
        raise DomainError(f"(2K+1)^d = {(2 * K + 1) ** d} frequency vectors exceed the enumeration cap")
    if d == 1:
        k = np.arange(1, K + 1, dtype=float)
        dots = k * alpha[0]
        return float(np.min(np.abs(dots - np.rint(dots)) * k**tau))

    best = math.inf
    rest = np.indices((2 * K + 1,) * (d - 1)).reshape(d - 1, -1).T - K
    for k1 in range(0, K + 1):
        ks = np.column_stack([np.full(rest.shape[0], k1), rest])
        if k1 == 0:
            ks = ks[np.any(ks != 0, axis=1)]
        dots = ks @ alpha
        norms = np.max(np.abs(ks), axis=1).astype(float)
        best = min(best, float(np.min(np.abs(dots - np.rint(dots)) * norms**tau)))
    return best


@dataclass(frozen=True)
class HittingReport:
    gammas: Tuple[float, ...]
    max_times: Tuple[int, ...]
    exponent: Optional[float]

    def to_dict(self) -> Dict:
        return {"gamma": list(self.gammas), "max_time": list(self.max_times), "exponent": self.exponent}


def _torus_distance(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    diff = np.abs(points[:, None, :] - targets[None, :, :])
    return np.max(np.minimum(diff, 1.0 - diff), axis=2)


def _first_hits(sys: CodingSystem, phase, targets: np.ndarray, gamma: float, budget: int) -> np.ndarray:
    hits = np.full(targets.shape[0], -1, dtype=np.int64)
    for start in range(0, budget, HIT_CHUNK):
        pts = orbit_points(sys, phase, start, min(start + HIT_CHUNK, budget))
        open_targets = np.nonzero(hits < 0)[0]
        inside = _torus_distance(pts, targets[open_targets]) < gamma
        found = inside.any(axis=0)
        hits[open_targets[found]] = start + inside[:, found].argmax(axis=0)
        if np.all(hits >= 0):
            break
    return hits


def dense_hitting_time(
    sys: CodingSystem,
    gammas: Union[float, Sequence[float]],
    phases: int = 16,
    targets: int = 64,
    budget: int = 10**5,
    rng: Optional[np.random.Generator] = None,
) -> HittingReport:
    """Worst first entry time of sampled orbits into sampled gamma-balls.

    Phases and targets are drawn once, so the times are monotone in gamma.
    The exponent is the log-log slope of the time against 1/gamma.
    """
    if sys.variant != "torus":
        raise DomainError("Dense hitting times are defined for torus translations")
    gammas = tuple(float(g) for g in np.atleast_1d(gammas))
    if any(not 0 < g for g in gammas):
        raise DomainError("Ball radii must be positive")
    rng = rng or np.random.default_rng(0)
    starts = rng.random((phases, sys.dim))
    centers = rng.random((targets, sys.dim))

    max_times: List[int] = []
    for gamma in gammas:
        worst = 0
        for phase in starts:
            hits = _first_hits(sys, phase, centers, gamma, budget)
            if np.any(hits < 0):
                raise BudgetError(
                    f"Orbit missed {int(np.sum(hits < 0))} balls of radius {gamma} within {budget} steps",
                    partial={"gamma": list(gammas), "max_time": max_times},
                    gamma=gamma,
                )
            worst = max(worst, int(hits.max()))
        max_times.append(worst)

    exponent = None
    if len(gammas) >= 2:
        times = np.maximum(np.asarray(max_times, dtype=float), 1.0)
        exponent = float(np.polyfit(np.log(1.0 / np.asarray(gammas)), np.log(times), 1)[0])
    logger.info("Hitting times %s for gamma %s (exponent %s)", max_times, gammas, exponent)
    return HittingReport(gammas, tuple(max_times), exponent)


@dataclass(frozen=True)
class DeviationReport:
    """sup over phases of |S_N f - N * mean(f)| per N."""

    Ns: Tuple[int, ...]
    deviations: Tuple[float, ...]
    exponent: Optional[float]

    @property
    def sqrt_ratios(self) -> Tuple[float, ...]:
        return tuple(d / math.sqrt(N) for N, d in zip(self.Ns, self.deviations))

    @property
    def mean_ratios(self) -> Tuple[float, ...]:
        return tuple(d / N for N, d in zip(self.Ns, self.deviations))

    def to_dict(self) -> Dict:
        return {
            "N": list(self.Ns),
            "deviation": list(self.deviations),
            "sqrt_ratio": list(self.sqrt_ratios),
            "exponent": self.exponent,
        }


def birkhoff_deviation(
    sys: CodingSystem,
    f: FourierPolynomial,
    Ns: Sequence[int],
    phases: int = 8,
    rng: Optional[np.random.Generator] = None,
) -> DeviationReport:
    """Birkhoff sum deviations of ``f`` along sampled skew-shift orbits."""
    if sys.variant != "skew":
        raise DomainError("Birkhoff deviations are computed along skew-shift orbits")
    Ns = tuple(sorted(int(N) for N in Ns))
    if not Ns or Ns[0] < 1:
        raise DomainError("Orbit lengths must be positive")
    rng = rng or np.random.default_rng(0)
    index = np.asarray(Ns) - 1
    worst = np.zeros(len(Ns))
    for phase in sample_phases(sys, phases, rng):
        pts = orbit_points(sys, phase, 0, Ns[-1])
        sums = np.cumsum(f(pts[:, 0], pts[:, 1]))[index]
        worst = np.maximum(worst, np.abs(sums - np.asarray(Ns) * f.mean))

    exponent = None
    positive = worst > 1e-12
    if positive.sum() >= 2:
        exponent = float(np.polyfit(np.log(np.asarray(Ns)[positive]), np.log(worst[positive]), 1)[0])
    return DeviationReport(Ns, tuple(float(v) for v in worst), exponent)
