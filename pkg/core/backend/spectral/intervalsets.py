# Python module: intervalsets.py

"""Finite unions of disjoint closed intervals.

``BandSet`` carries every spectrum in the lab: band sets of periodic words,
construction stages, the sets of the quasi-periodic toolkit. Bands whose
gap is below ``MERGE_TOL`` are one band.
"""

# Import the required libraries
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from core.errors import DomainError

MERGE_TOL = 1e-9

Interval = Tuple[float, float]


def _validated(raw: Iterable[Sequence[float]]) -> List[Interval]:
    out: List[Interval] = []
    for item in raw:
        lo, hi = float(item[0]), float(item[1])
        if lo > hi:
            raise DomainError(f"Interval ({lo}, {hi}) has lo > hi")
        out.append((lo, hi))
    return out


@dataclass(frozen=True)
class BandSet:
    """Canonical sorted tuple of disjoint closed intervals."""

    intervals: Tuple[Interval, ...] = ()

    @staticmethod
    def empty() -> "BandSet":
        return BandSet(())

    @staticmethod
    def interval(lo: float, hi: float) -> "BandSet":
        return normalize([(lo, hi)])

    @staticmethod
    def from_list(pairs: Iterable[Sequence[float]]) -> "BandSet":
        return normalize(pairs)

    def to_list(self) -> List[List[float]]:
        return [[lo, hi] for lo, hi in self.intervals]

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def count(self) -> int:
        return len(self.intervals)

    @property
    def lo(self) -> float:
        return self.intervals[0][0]

    @property
    def hi(self) -> float:
        return self.intervals[-1][1]

    def measure(self) -> float:
        return measure(self)

    def gaps(self) -> "BandSet":
        """Bounded open gaps between consecutive bands, stored by their closures."""
        return BandSet(tuple((self.intervals[i][1], self.intervals[i + 1][0]) for i in range(self.count - 1)))

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.distance_to(x) <= tol

    def distance_to(self, x):
        """Distance from a point (float result) or an array of points."""
        arr = np.asarray(x, dtype=float)
        dist = _distance(self, np.atleast_1d(arr))
        return float(dist[0]) if arr.ndim == 0 else dist

    def widen(self, radius: float) -> "BandSet":
        if radius < 0:
            raise DomainError("Widening radius must be nonnegative")
        return normalize([(lo - radius, hi + radius) for lo, hi in self.intervals])

    def clip(self, lo: float, hi: float) -> "BandSet":
        return intersect(self, BandSet.interval(lo, hi))

    def __or__(self, other: "BandSet") -> "BandSet":
        return union(self, other)

    def __and__(self, other: "BandSet") -> "BandSet":
        return intersect(self, other)

    def __sub__(self, other: "BandSet") -> "BandSet":
        return difference(self, other)

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        return iter(self.intervals)


def normalize(raw: Iterable[Sequence[float]]) -> BandSet:
    """Sort and merge overlapping, abutting or nearly abutting intervals."""
    items = sorted(_validated(raw))
    merged: List[List[float]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1] + MERGE_TOL:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return BandSet(tuple((lo, hi) for lo, hi in merged))


def measure(S: BandSet) -> float:
    return float(sum(hi - lo for lo, hi in S.intervals))


def union(S1: BandSet, S2: BandSet) -> BandSet:
    return normalize(list(S1.intervals) + list(S2.intervals))


def union_all(sets: Iterable[BandSet]) -> BandSet:
    pairs: List[Interval] = []
    for s in sets:
        pairs.extend(s.intervals)
    return normalize(pairs)


def intersect(S1: BandSet, S2: BandSet) -> BandSet:
    out: List[Interval] = []
    i = j = 0
    a, b = S1.intervals, S2.intervals
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo <= hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return normalize(out)


def difference(S1: BandSet, S2: BandSet) -> BandSet:
    """Closure of S1 minus S2; slivers no wider than ``MERGE_TOL`` are dropped."""
    out: List[Interval] = []
    b = S2.intervals
    j = 0
    for lo, hi in S1.intervals:
        while j < len(b) and b[j][1] < lo:
            j += 1
        cursor = lo
        k = j
        while k < len(b) and b[k][0] <= hi:
            if b[k][0] > cursor:
                out.append((cursor, b[k][0]))
            cursor = max(cursor, b[k][1])
            k += 1
        if cursor < hi:
            out.append((cursor, hi))
    return normalize([(lo, hi) for lo, hi in out if hi - lo > MERGE_TOL])


def _distance(S: BandSet, xs: np.ndarray) -> np.ndarray:
    if S.is_empty:
        raise DomainError("Distance to an empty set")
    los = np.array([lo for lo, _ in S.intervals])
    his = np.array([hi for _, hi in S.intervals])
    idx = np.searchsorted(los, xs, side="right") - 1
    left = np.clip(idx, 0, len(los) - 1)
    right = np.clip(idx + 1, 0, len(los) - 1)
    d_left = np.where(idx >= 0, np.maximum(xs - his[left], 0.0), np.inf)
    d_right = np.where(idx + 1 < len(los), np.maximum(los[right] - xs, 0.0), np.inf)
    return np.minimum(d_left, d_right)


def _nearest_points(S: BandSet, xs: np.ndarray) -> np.ndarray:
    los = np.array([lo for lo, _ in S.intervals])
    his = np.array([hi for _, hi in S.intervals])
    idx = np.clip(np.searchsorted(los, xs, side="right") - 1, 0, len(los) - 1)
    nxt = np.minimum(idx + 1, len(los) - 1)
    stacked = np.stack([np.clip(xs, los[idx], his[idx]), np.clip(xs, los[nxt], his[nxt])])
    best = np.argmin(np.abs(stacked - xs), axis=0)
    return stacked[best, np.arange(xs.size)]


def _directed_hausdorff(S1: BandSet, S2: BandSet) -> float:
    ends = np.array([x for pair in S1.intervals for x in pair])
    if S2.count > 1:
        mids = np.array([(g_lo + g_hi) / 2.0 for g_lo, g_hi in S2.gaps().intervals])
        ends = np.concatenate([ends, _nearest_points(S1, mids)])
    return float(np.max(_distance(S2, ends)))


def hausdorff_distance(S1: BandSet, S2: BandSet) -> float:
    """Symmetrised max-min distance; candidates are endpoints and gap midpoints."""
    if S1.is_empty or S2.is_empty:
        raise DomainError("Hausdorff distance needs two nonempty sets")
    return max(_directed_hausdorff(S1, S2), _directed_hausdorff(S2, S1))


def grid_indicator(S: BandSet, xs: np.ndarray) -> np.ndarray:
    """Boolean membership of grid points, used by grid oracles."""
    return _distance(S, np.asarray(xs, dtype=float)) == 0.0
