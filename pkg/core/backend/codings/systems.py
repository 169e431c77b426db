# Python module: systems.py

# Import the required libraries
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.stats import kstest

from core.errors import BudgetError, DomainError
from core.util.utils import parallel_map

logger = logging.getLogger(__name__)

VARIANTS = ("torus", "skew", "iet", "bernoulli")
BOUNDARY_TOL = 1e-13
AREA_TOL = 1e-14
CELL_CAP = 2_000_000
SKEW_GEOMETRIC_MAX = 6
BIRKHOFF_SAMPLES = 10**6
EXACT_CYLINDER_CAP = 2**20

Phase = Union[float, int, Sequence[float]]


@dataclass(frozen=True)
class Rectangle:
    """Half-open box prod [lo_i, hi_i) inside the unit torus."""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise DomainError(f"Rectangle corners disagree in dimension: {lo} vs {hi}")
        for a, b in zip(lo, hi):
            if not 0.0 <= a < b <= 1.0:
                raise DomainError(f"Rectangle side [{a}, {b}) is not inside [0, 1)")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.all((pts >= np.asarray(self.lo)) & (pts < np.asarray(self.hi)), axis=1)

    def overlap(self, other: "Rectangle") -> float:
        sides = np.minimum(self.hi, other.hi) - np.maximum(self.lo, other.lo)
        return float(np.prod(np.clip(sides, 0.0, None)))


def grid_rectangles(shape: Sequence[int]) -> List[Rectangle]:
    """Equal boxes of a product grid, in row-major order."""
    axes = [np.linspace(0.0, 1.0, int(m) + 1) for m in shape]
    rects = []
    for cell in itertools.product(*[range(int(m)) for m in shape]):
        rects.append(Rectangle(tuple(axes[i][c] for i, c in enumerate(cell)), tuple(axes[i][c + 1] for i, c in enumerate(cell))))
    return rects


@dataclass(frozen=True)
class CodingSystem:
    """A minimal system together with the partition that codes its orbits.

    ``torus`` and ``skew`` use rectangle partitions of T^d and T^2, ``iet``
    codes by the exchanged interval, ``bernoulli`` draws i.i.d. symbols.
    For an IET ``permutation[j]`` is the position interval j takes after
    the exchange; for ``bernoulli`` ``lengths`` holds the probabilities.
    """

    variant: str
    labels: Tuple[float, ...]
    alpha: Tuple[float, ...] = ()
    rectangles: Tuple[Rectangle, ...] = ()
    permutation: Tuple[int, ...] = ()
    lengths: Tuple[float, ...] = ()
    allow_constant: bool = False
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"Unknown coding variant '{self.variant}', expected one of {VARIANTS}")
        object.__setattr__(self, "labels", tuple(float(v) for v in self.labels))
        object.__setattr__(self, "alpha", tuple(float(a) % 1.0 for a in self.alpha))
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        object.__setattr__(self, "permutation", tuple(int(p) for p in self.permutation))
        object.__setattr__(self, "rectangles", tuple(self.rectangles))
        if len(set(self.labels)) < 2 and not self.allow_constant:
            raise DomainError("Coding labels must take at least two distinct values")
        getattr(self, f"_validate_{self.variant}")()

    def _validate_rectangles(self, dim: int):
        if not self.rectangles:
            raise DomainError("Partition has no rectangles")
        if len(self.labels) != len(self.rectangles):
            raise DomainError(f"{len(self.labels)} labels for {len(self.rectangles)} rectangles")
        for rect in self.rectangles:
            if rect.dim != dim:
                raise DomainError(f"Rectangle of dimension {rect.dim} in a {dim}-dimensional partition")
        total = sum(r.volume for r in self.rectangles)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"Partition rectangles have total measure {total}, not 1")
        for a, b in itertools.combinations(self.rectangles, 2):
            if a.overlap(b) > 1e-12:
                raise DomainError(f"Rectangles {a} and {b} overlap")

    def _validate_torus(self):
        if not self.alpha:
            raise DomainError("Torus translation needs a frequency vector")
        self._validate_rectangles(len(self.alpha))

    def _validate_skew(self):
        if len(self.alpha) != 1:
            raise DomainError("Skew-shift takes a single frequency")
        self._validate_rectangles(2)

    def _validate_iet(self):
        r = len(self.lengths)
        if sorted(self.permutation) != list(range(r)) or r < 2:
            raise DomainError(f"IET permutation {self.permutation} is not a permutation of {r} >= 2 items")
        if any(v <= 0 for v in self.lengths) or abs(sum(self.lengths) - 1.0) > 1e-12:
            raise DomainError("IET lengths must be positive and sum to 1")
        for k in range(1, r):
            if set(self.permutation[:k]) == set(range(k)):
                raise DomainError(f"IET permutation {self.permutation} is reducible at {k}")
        if len(self.labels) != r:
            raise DomainError(f"{len(self.labels)} labels for {r} intervals")

    def _validate_bernoulli(self):
        if len(self.lengths) != len(self.labels):
            raise DomainError("Bernoulli system needs one probability per label")
        if len(set(self.labels)) != len(self.labels):
            raise DomainError("Bernoulli labels must be distinct")
        if any(p < 0 for p in self.lengths) or abs(sum(self.lengths) - 1.0) > 1e-12:
            raise DomainError("Bernoulli probabilities must be nonnegative and sum to 1")

    @classmethod
    def torus(cls, alpha: Sequence[float], rectangles: Sequence[Rectangle], labels: Sequence[float], **kwargs) -> "CodingSystem":
        return cls("torus", tuple(labels), alpha=tuple(np.atleast_1d(alpha)), rectangles=tuple(rectangles), **kwargs)

    @classmethod
    def skew(cls, alpha: float, rectangles: Sequence[Rectangle], labels: Sequence[float], **kwargs) -> "CodingSystem":
        return cls("skew", tuple(labels), alpha=(float(alpha),), rectangles=tuple(rectangles), **kwargs)

    @classmethod
    def iet(cls, permutation: Sequence[int], lengths: Sequence[float], labels: Optional[Sequence[float]] = None) -> "CodingSystem":
        labels = tuple(range(len(lengths))) if labels is None else tuple(labels)
        return cls("iet", labels, permutation=tuple(permutation), lengths=tuple(lengths))

    @classmethod
    def random_iet(cls, permutation: Sequence[int], rng: np.random.Generator, labels: Optional[Sequence[float]] = None) -> "CodingSystem":
        """IET with lengths drawn uniformly on the simplex."""
        lengths = rng.dirichlet(np.ones(len(permutation)))
        lengths[-1] = 1.0 - lengths[:-1].sum()
        return cls.iet(permutation, lengths, labels)

    @classmethod
    def bernoulli(cls, probabilities: Sequence[float], labels: Optional[Sequence[float]] = None) -> "CodingSystem":
        labels = tuple(range(len(probabilities))) if labels is None else tuple(labels)
        return cls("bernoulli", labels, lengths=tuple(probabilities))

    @classmethod
    def sturmian(cls, alpha: float, values: Sequence[float] = (0.0, 1.0)) -> "CodingSystem":
        """Rotation by alpha coded by [0, 1 - alpha) and [1 - alpha, 1)."""
        cut = 1.0 - float(alpha) % 1.0
        return cls.torus((alpha,), [Rectangle((0.0,), (cut,)), Rectangle((cut,), (1.0,))], values)

    @property
    def alphabet(self) -> Tuple[float, ...]:
        return tuple(sorted(set(self.labels)))

    @property
    def piece_symbols(self) -> np.ndarray:
        lookup = {a: i for i, a in enumerate(self.alphabet)}
        return np.array([lookup[v] for v in self.labels], dtype=np.int64)

    @property
    def dim(self) -> int:
        return {"torus": len(self.alpha), "skew": 2, "iet": 1, "bernoulli": 0}[self.variant]

    def domain_singularities(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.lengths)])

    def range_singularities(self) -> np.ndarray:
        order = np.argsort(self.permutation)
        return np.concatenate([[0.0], np.cumsum(np.asarray(self.lengths)[order])])

    def translations(self) -> np.ndarray:
        dom = self.domain_singularities()
        rng = self.range_singularities()
        return np.array([rng[self.permutation[j]] - dom[j] for j in range(len(self.lengths))])

    def step(self, point: Phase) -> Phase:
        if self.variant == "torus":
            return tuple(np.mod(np.asarray(point, dtype=float) + self.alpha, 1.0))
        if self.variant == "skew":
            x, y = point
            return ((x + self.alpha[0]) % 1.0, (x + y) % 1.0)
        if self.variant == "iet":
            return float(iet_map(self, np.array([point]))[0])
        raise DomainError("Bernoulli phases are seeds and have no dynamics")


def iet_map(sys: CodingSystem, x: np.ndarray) -> np.ndarray:
    """Apply the exchange to an array of points in [0, 1)."""
    starts = sys.domain_singularities()[:-1]
    j = np.searchsorted(starts, x, side="right") - 1
    return np.mod(x + sys.translations()[j], 1.0)


def iet_inverse(sys: CodingSystem, y: np.ndarray) -> np.ndarray:
    starts = sys.range_singularities()[:-1]
    p = np.searchsorted(starts, y, side="right") - 1
    j = np.argsort(sys.permutation)[p]
    return np.mod(y - sys.translations()[j], 1.0)


def iet_pushforward_ks(sys: CodingSystem, n_points: int = 10**6, rng: Optional[np.random.Generator] = None) -> float:
    """Kolmogorov-Smirnov distance between T(uniform) and uniform."""
    rng = rng or np.random.default_rng(0)
    return float(kstest(iet_map(sys, rng.random(n_points)), "uniform").statistic)


@dataclass(frozen=True, eq=False)
class Coding:
    """Alphabet indices s_n for n in [n_lo, n_lo + len)."""

    symbols: np.ndarray
    alphabet: Tuple[float, ...]
    n_lo: int = 0
    ambiguous: int = 0

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.alphabet)[self.symbols]

    def __len__(self) -> int:
        return int(self.symbols.size)


def _skew_points(alpha: float, x0: float, y0: float, n_lo: int, n_hi: int) -> np.ndarray:
    xs_pos = np.mod(x0 + alpha * np.arange(0, max(n_hi, 0)), 1.0)
    ys_pos = y0 + np.concatenate([[0.0], np.cumsum(xs_pos[:-1])]) if xs_pos.size else np.empty(0)
    xs_neg = np.mod(x0 + alpha * np.arange(min(n_lo, 0), 0), 1.0)
    ys_neg = y0 - np.cumsum(xs_neg[::-1])[::-1]
    xs = np.concatenate([xs_neg, xs_pos])
    ys = np.mod(np.concatenate([ys_neg, ys_pos]), 1.0)
    start = n_lo - min(n_lo, 0)
    return np.column_stack([xs, ys])[start : start + (n_hi - n_lo)]


def _iet_points(sys: CodingSystem, x0: np.ndarray, n_lo: int, n_hi: int) -> np.ndarray:
    """Orbits of several phases at once, shape (phases, n_hi - n_lo)."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    columns: Dict[int, np.ndarray] = {0: x0}
    x = x0
    for n in range(1, n_hi):
        x = iet_map(sys, x)
        columns[n] = x
    x = x0
    for n in range(-1, n_lo - 1, -1):
        x = iet_inverse(sys, x)
        columns[n] = x
    return np.column_stack([columns[n] for n in range(n_lo, n_hi)]) if n_hi > n_lo else np.empty((x0.size, 0))


def orbit_points(sys: CodingSystem, x0: Phase, n_lo: int, n_hi: int) -> np.ndarray:
    if sys.variant == "torus":
        base = np.asarray(x0, dtype=float).reshape(-1)
        if base.size != sys.dim:
            raise DomainError(f"Phase {x0} is not a point of T^{sys.dim}")
        n = np.arange(n_lo, n_hi, dtype=float)
        return np.mod(base[None, :] + n[:, None] * np.asarray(sys.alpha)[None, :], 1.0)
    if sys.variant == "skew":
        x, y = (float(v) for v in x0)
        return _skew_points(sys.alpha[0], x % 1.0, y % 1.0, n_lo, n_hi)
    if sys.variant == "iet":
        return _iet_points(sys, np.array([float(x0) % 1.0]), n_lo, n_hi)[0][:, None]
    raise DomainError("Bernoulli codings have no orbit points")


def _boundary_hits(sys: CodingSystem, pts: np.ndarray) -> int:
    if sys.variant == "iet":
        cuts = [sys.domain_singularities()]
    else:
        cuts = [np.unique([v for r in sys.rectangles for v in (r.lo[i], r.hi[i])]) for i in range(sys.dim)]
    hits = np.zeros(pts.shape[0], dtype=bool)
    for axis, axis_cuts in enumerate(cuts):
        diff = np.abs(pts[:, axis][:, None] - axis_cuts[None, :])
        hits |= np.any(np.minimum(diff, 1.0 - diff) < BOUNDARY_TOL, axis=1)
    return int(hits.sum())


def code_points(sys: CodingSystem, pts: np.ndarray) -> np.ndarray:
    """Alphabet index of the partition piece holding each point."""
    if sys.variant == "iet":
        starts = sys.domain_singularities()[:-1]
        piece = np.searchsorted(starts, pts.reshape(-1), side="right") - 1
        return sys.piece_symbols[piece].reshape(pts.shape[:-1] if pts.ndim > 1 else pts.shape)
    flat = pts.reshape(-1, sys.dim)
    piece = np.full(flat.shape[0], -1, dtype=np.int64)
    for j, rect in enumerate(sys.rectangles):
        piece[rect.contains(flat)] = j
    if np.any(piece < 0):
        raise DomainError("Orbit point outside every partition rectangle")
    return sys.piece_symbols[piece].reshape(pts.shape[:-1])


def orbit_coding(sys: CodingSystem, x0: Phase, n_range: Tuple[int, int]) -> Coding:
    """Symbols s_n for n in the half-open range ``[n_lo, n_hi)``.

    For ``bernoulli`` the phase is the seed of the symbol stream.
    """
    n_lo, n_hi = (int(v) for v in n_range)
    if n_hi < n_lo:
        raise DomainError(f"Empty orbit range [{n_lo}, {n_hi})")
    if sys.variant == "bernoulli":
        rng = np.random.default_rng(int(x0))
        symbols = rng.choice(len(sys.lengths), size=n_hi - n_lo, p=sys.lengths)
        return Coding(sys.piece_symbols[symbols], sys.alphabet, n_lo)
    pts = orbit_points(sys, x0, n_lo, n_hi)
    ambiguous = _boundary_hits(sys, pts)
    if ambiguous:
        logger.warning("%d orbit points within %.0e of a partition boundary; half-open rule applied", ambiguous, BOUNDARY_TOL)
    return Coding(code_points(sys, pts), sys.alphabet, n_lo, ambiguous)


def sample_phases(sys: CodingSystem, count: int, rng: np.random.Generator) -> List[Phase]:
    """Phases for sampling: stratified on the circle, uniform on higher tori."""
    if sys.variant == "bernoulli":
        return [int(s) for s in rng.integers(0, 2**32, size=count)]
    if sys.dim == 1:
        return [float(v) for v in (np.arange(count) + rng.random(count)) / count]
    return [tuple(p) for p in rng.random((count, sys.dim))]


def sample_codings(sys: CodingSystem, phases: Sequence[Phase], length: int, threads: int = 1) -> List[np.ndarray]:
    """Symbol segments of the given length starting at each phase."""
    if sys.variant == "iet":
        pts = _iet_points(sys, np.asarray(phases, dtype=float), 0, length)
        return list(code_points(sys, pts[..., None]))
    codings = parallel_map(lambda p: orbit_coding(sys, p, (0, length)).symbols, list(phases), threads=threads, desc="orbits")
    return codings


@dataclass(frozen=True)
class CylinderMeasures:
    """Measure of each length-n cylinder, with the method that produced it."""

    n: int
    method: str
    measures: Dict[Tuple[int, ...], float]

    @property
    def total(self) -> float:
        return float(sum(self.measures.values()))

    def masses(self) -> np.ndarray:
        return np.sort(np.fromiter(self.measures.values(), dtype=float))[::-1]


def _aggregate(codes: np.ndarray, weights: np.ndarray) -> Dict[Tuple[int, ...], float]:
    keys, inverse = np.unique(codes, axis=0, return_inverse=True)
    sums = np.bincount(inverse.reshape(-1), weights=weights, minlength=len(keys))
    return {tuple(int(s) for s in key): float(m) for key, m in zip(keys, sums) if m > 0}


def _pieces(cuts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    points = np.unique(np.concatenate([np.mod(cuts, 1.0), [0.0, 1.0]]))
    lo, hi = points[:-1], points[1:]
    keep = hi - lo > 1e-15
    return lo[keep], hi[keep]


def _torus_geometric(sys: CodingSystem, n: int) -> Optional[Dict[Tuple[int, ...], float]]:
    steps = np.arange(n, dtype=float)
    axes = []
    for i in range(sys.dim):
        bounds = np.unique([v % 1.0 for r in sys.rectangles for v in (r.lo[i], r.hi[i])])
        axes.append(_pieces((bounds[None, :] - steps[:, None] * sys.alpha[i]).ravel()))
    if math.prod(lo.size for lo, _ in axes) > CELL_CAP:
        return None
    mids = np.meshgrid(*[0.5 * (lo + hi) for lo, hi in axes], indexing="ij")
    sizes = np.meshgrid(*[hi - lo for lo, hi in axes], indexing="ij")
    centers = np.column_stack([m.ravel() for m in mids])
    volume = np.prod(np.column_stack([s.ravel() for s in sizes]), axis=1)
    alpha = np.asarray(sys.alpha)
    codes = np.column_stack([code_points(sys, np.mod(centers + k * alpha, 1.0)) for k in range(n)])
    return _aggregate(codes, volume)


def _iet_geometric(sys: CodingSystem, n: int) -> Dict[Tuple[int, ...], float]:
    starts = sys.domain_singularities()[:-1]
    cuts = [starts]
    x = starts
    for _ in range(1, n):
        x = iet_inverse(sys, x)
        cuts.append(x)
    lo, hi = _pieces(np.concatenate(cuts))
    pts = _iet_points(sys, 0.5 * (lo + hi), 0, n)
    return _aggregate(code_points(sys, pts[..., None]), hi - lo)


def _clip(poly: np.ndarray, a: float, b: float, c: float) -> np.ndarray:
    """Part of a convex polygon where a*x + b*y <= c."""
    if len(poly) == 0:
        return poly
    vals = poly @ np.array([a, b]) - c
    out = []
    for i in range(len(poly)):
        j = (i + 1) % len(poly)
        if vals[i] <= 0:
            out.append(poly[i])
        if vals[i] * vals[j] < 0:
            t = vals[i] / (vals[i] - vals[j])
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.array(out) if len(out) >= 3 else np.empty((0, 2))


def polygon_area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _skew_pieces(sys: CodingSystem, n: int) -> List[Tuple[Tuple[int, ...], np.ndarray]]:
    """Convex pieces of the torus on which the first n symbols are constant.

    Step k pulls back through (x, y) -> (x + k a, y + k x + a k(k-1)/2).
    """
    alpha = sys.alpha[0]
    symbols = sys.piece_symbols
    pieces = [((), np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))]
    for k in range(n):
        shift = (k * alpha) % 1.0
        c_k = (alpha * k * (k - 1) / 2.0) % 1.0
        refined = []
        for prefix, poly in pieces:
            for j, rect in enumerate(sys.rectangles):
                (a1, a2), (b1, b2) = rect.lo, rect.hi
                for m in (0, 1):
                    xl, xh = max(a1 - shift + m, 0.0), min(b1 - shift + m, 1.0)
                    if xh <= xl:
                        continue
                    strip = _clip(_clip(poly, 1.0, 0.0, xh), -1.0, 0.0, -xl)
                    if len(strip) == 0:
                        continue
                    for mm in range(math.floor(c_k - b2), math.ceil(c_k + k + 1 - a2) + 1):
                        lower, upper = a2 + mm - c_k, b2 + mm - c_k
                        part = _clip(_clip(strip, -float(k), -1.0, -lower), float(k), 1.0, upper)
                        if polygon_area(part) > AREA_TOL:
                            refined.append((prefix + (int(symbols[j]),), part))
        pieces = refined
    return pieces


def skew_cylinder_polygons(sys: CodingSystem, word: Sequence[int]) -> List[np.ndarray]:
    """Convex pieces of the pulled-back cylinder of ``word`` (alphabet indices)."""
    if sys.variant != "skew":
        raise DomainError("Cylinder polygons are defined for skew-shift codings")
    key = tuple(int(s) for s in word)
    return [poly for prefix, poly in _skew_pieces(sys, len(key)) if prefix == key]


def _birkhoff(sys: CodingSystem, n: int, samples: int, seed: int) -> Dict[Tuple[int, ...], float]:
    phase = sample_phases(sys, 1, np.random.default_rng(seed))[0]
    symbols = orbit_coding(sys, phase, (0, samples + n - 1)).symbols.astype(np.int16)
    windows = sliding_window_view(symbols, n)
    keys, counts = np.unique(windows, axis=0, return_counts=True)
    return {tuple(int(s) for s in key): float(c) / windows.shape[0] for key, c in zip(keys, counts)}


def cylinder_measures(sys: CodingSystem, n: int, method: str = "auto", samples: int = BIRKHOFF_SAMPLES, seed: int = 0) -> CylinderMeasures:
    """Lebesgue (or Bernoulli) measure of every nonempty length-n cylinder.

    Geometric volumes are used where the pieces are few enough; the Birkhoff
    fallback counts factor frequencies along one long orbit.
    """
    if n < 1:
        raise DomainError("Cylinder length must be >= 1")
    key = (n, method, samples, seed)
    if key in sys._cache:
        return sys._cache[key]

    result: Optional[CylinderMeasures] = None
    if sys.variant == "bernoulli":
        size = len(sys.lengths)
        if size**n > EXACT_CYLINDER_CAP:
            raise BudgetError(f"{size}^{n} Bernoulli cylinders exceed the enumeration cap", required=size**n)
        probs = np.asarray(sys.lengths)
        symbols = sys.piece_symbols
        measures = {}
        for word in itertools.product(range(size), repeat=n):
            mass = float(np.prod(probs[list(word)]))
            if mass > 0:
                measures[tuple(int(symbols[w]) for w in word)] = mass
        result = CylinderMeasures(n, "exact", measures)
    elif method in ("auto", "geometric"):
        measures = None
        if sys.variant == "torus":
            measures = _torus_geometric(sys, n)
        elif sys.variant == "iet":
            measures = _iet_geometric(sys, n)
        elif sys.variant == "skew" and n <= SKEW_GEOMETRIC_MAX:
            measures = {}
            for prefix, poly in _skew_pieces(sys, n):
                measures[prefix] = measures.get(prefix, 0.0) + polygon_area(poly)
        if measures is not None:
            result = CylinderMeasures(n, "geometric", measures)
        elif method == "geometric":
            raise BudgetError(f"Geometric cylinder measures at n={n} exceed the cell cap", required=n)
    elif method != "birkhoff":
        raise DomainError(f"Unknown cylinder measure method '{method}'")

    if result is None:
        result = CylinderMeasures(n, "birkhoff", _birkhoff(sys, n, samples, seed))
    logger.debug("%d cylinders of length %d (%s)", len(result.measures), n, result.method)
    sys._cache[key] = result
    return result
