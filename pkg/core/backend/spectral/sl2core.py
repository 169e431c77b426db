# Python module: sl2core.py

# Import the required libraries
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, List, Sequence, Tuple, Union

import numpy as np

from core.errors import (
    ClassificationError,
    DomainError,
    IndexOutOfWindowError,
    RefinementNeededError,
    UndefinedDirectionError,
)

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-10
DET_TOL = 1e-9
RENORM_EVERY = 32
MAX_ANGLE_JUMP = math.pi / 4


@dataclass(frozen=True)
class Mat2:
    """Real 2x2 matrix [[a, b], [c, d]], row-major.

    All transfer and monodromy products are carried as Mat2 values. The class
    does not force unit determinant; products of unit-determinant factors are
    corrected by :func:`transfer` when the drift exceeds ``DET_TOL``.
    """

    a: float
    b: float
    c: float
    d: float

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def rotation(theta: float) -> "Mat2":
        """Rotation by the angle 2*pi*theta."""
        cs, sn = math.cos(2 * math.pi * theta), math.sin(2 * math.pi * theta)
        return Mat2(cs, -sn, sn, cs)

    @staticmethod
    def diag(x: float, y: float) -> "Mat2":
        return Mat2(x, 0.0, 0.0, y)

    @staticmethod
    def from_array(arr) -> "Mat2":
        arr = np.asarray(arr, dtype=float)
        return Mat2(float(arr[0, 0]), float(arr[0, 1]), float(arr[1, 0]), float(arr[1, 1]))

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def scaled(self, factor: float) -> "Mat2":
        return Mat2(self.a * factor, self.b * factor, self.c * factor, self.d * factor)

    def apply(self, vec: Tuple[float, float]) -> Tuple[float, float]:
        x, y = vec
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def norm(self) -> float:
        """Spectral norm from the closed-form 2x2 singular values."""
        frob = self.a**2 + self.b**2 + self.c**2 + self.d**2
        two_det = 2.0 * abs(self.det)
        return 0.5 * (math.sqrt(frob + two_det) + math.sqrt(max(frob - two_det, 0.0)))

    def inverse(self) -> "Mat2":
        det = self.det
        if det == 0.0:
            raise DomainError("Singular matrix has no inverse")
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def allclose(self, other: "Mat2", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.as_array(), other.as_array(), rtol=0.0, atol=atol))


@dataclass(frozen=True)
class Direction:
    """A point of the real projective line, stored as an angle in [0, pi)."""

    angle: float

    def __post_init__(self):
        reduced = math.fmod(self.angle, math.pi)
        if reduced < 0:
            reduced += math.pi
        if reduced >= math.pi:
            reduced = 0.0
        object.__setattr__(self, "angle", reduced)

    @property
    def vector(self) -> Tuple[float, float]:
        return (math.cos(self.angle), math.sin(self.angle))

    def distance(self, other: "Direction") -> float:
        diff = abs(self.angle - other.angle)
        return min(diff, math.pi - diff)


@dataclass(frozen=True)
class EnergyGrid:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"Energy grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if not self.step > 0:
            raise DomainError(f"Energy grid step must be positive, got {self.step}")

    @staticmethod
    def from_count(lo: float, hi: float, count: int) -> "EnergyGrid":
        if count < 2:
            raise DomainError("Energy grid needs at least two points")
        return EnergyGrid(lo, hi, (hi - lo) / (count - 1))

    @property
    def size(self) -> int:
        return int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1

    def points(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.size)


@dataclass(frozen=True)
class PotentialWindow:
    """Finite two-sided potential, ``values[i + offset]`` is the value at site i."""

    values: Tuple[float, ...]
    offset: int

    @staticmethod
    def centered(values: Sequence[float]) -> "PotentialWindow":
        """Window over sites [-n, n-1] (even length) or [-n, n] (odd length)."""
        vals = tuple(float(v) for v in values)
        return PotentialWindow(vals, len(vals) // 2)

    @staticmethod
    def periodic(word: Sequence[float], n: int) -> "PotentialWindow":
        """Periodic extension of a word over sites [-n, n-1]."""
        word = [float(v) for v in getattr(word, "symbols", word)]
        vals = tuple(word[i % len(word)] for i in range(-n, n))
        return PotentialWindow(vals, n)

    @property
    def lo(self) -> int:
        return -self.offset

    @property
    def hi(self) -> int:
        return len(self.values) - self.offset - 1

    def __getitem__(self, site: int) -> float:
        if not self.lo <= site <= self.hi:
            raise IndexOutOfWindowError(f"Site {site} outside window [{self.lo}, {self.hi}]")
        return self.values[site + self.offset]


class Conjugacy(str, Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class DirectionSignReport:
    k1: int
    k2: int
    energies: Tuple[float, ...]
    skipped: Tuple[float, ...]
    forward_violations: Tuple[float, ...]
    backward_violations: Tuple[float, ...]
    sign_changes: int
    bound: int

    @property
    def passed(self) -> bool:
        return (
            not self.forward_violations
            and not self.backward_violations
            and self.sign_changes <= self.bound
        )

    def to_dict(self) -> dict:
        return {
            "k1": self.k1,
            "k2": self.k2,
            "retained": len(self.energies),
            "skipped": len(self.skipped),
            "forward_violations": list(self.forward_violations),
            "backward_violations": list(self.backward_violations),
            "sign_changes": self.sign_changes,
            "bound": self.bound,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class UniformHyperbolicityFit:
    c: float
    lam: float
    log_norms: Tuple[float, ...] = field(repr=False)


def _symbols(w) -> Sequence[float]:
    return getattr(w, "symbols", w)


def schrodinger_step(E: float, v: float) -> Mat2:
    return Mat2(E - v, -1.0, 1.0, 0.0)


def transfer_log(w, E: float) -> Tuple[Mat2, float]:
    """Transfer product over ``w`` as (normalised matrix, log scale).

    The true product equals ``exp(log_scale) * matrix``; the running product is
    rescaled every ``RENORM_EVERY`` factors so long words never overflow.
    """
    values = _symbols(w)
    if len(values) == 0:
        raise DomainError("Transfer product over an empty word")
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    log_scale = 0.0
    for i, v in enumerate(values, start=1):
        x = E - v
        a, b, c, d = x * a - c, x * b - d, a, b
        if i % RENORM_EVERY == 0:
            s = max(abs(a), abs(b), abs(c), abs(d))
            a, b, c, d = a / s, b / s, c / s, d / s
            log_scale += math.log(s)
    return Mat2(a, b, c, d), log_scale


def transfer(w, E: float) -> Mat2:
    """Monodromy matrix over ``w``, first symbol applied first (rightmost factor)."""
    mat, log_scale = transfer_log(w, E)
    if log_scale > 700.0:
        raise DomainError(f"Transfer product at E={E} overflows (log scale {log_scale:.1f}); use transfer_log")
    if log_scale > 0.0:
        mat = mat.scaled(math.exp(log_scale))
    det = mat.det
    if abs(det - 1.0) > DET_TOL and det > 0:
        mat = mat.scaled(1.0 / math.sqrt(det))
    return mat


def transfer_entries(w, energies: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`transfer_log` over an array of energies.

    Returns the four normalised entry arrays and the log scale array.
    """
    values = _symbols(w)
    if len(values) == 0:
        raise DomainError("Transfer product over an empty word")
    energies = np.asarray(energies, dtype=float)
    a = np.ones_like(energies)
    b = np.zeros_like(energies)
    c = np.zeros_like(energies)
    d = np.ones_like(energies)
    log_scale = np.zeros_like(energies)
    for i, v in enumerate(values, start=1):
        x = energies - v
        a, b, c, d = x * a - c, x * b - d, a, b
        if i % RENORM_EVERY == 0:
            s = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c), np.abs(d)])
            a, b, c, d = a / s, b / s, c / s, d / s
            log_scale += np.log(s)
    return a, b, c, d, log_scale


def two_sided_transfer(window: PotentialWindow, E: float, m: int) -> Mat2:
    """The product A_m over a two-sided window.

    A_0 is the identity, A_m = A(m-1)...A(0) for m >= 1 and
    A_m = A(m)^-1 ... A(-1)^-1 for m <= -1.
    """
    if m > window.hi + 1 or -m > window.offset:
        raise IndexOutOfWindowError(
            f"Index {m} outside window [{window.lo}, {window.hi}]"
        )
    if m == 0:
        return Mat2.identity()
    if m > 0:
        return transfer([window[i] for i in range(m)], E)
    prod = Mat2.identity()
    for site in range(-1, m - 1, -1):
        # A(site)^-1 = [[0, 1], [-1, E - v]]
        prod = Mat2(0.0, 1.0, -1.0, E - window[site]) @ prod
    return prod


def classify(A: Mat2) -> Conjugacy:
    t = abs(A.trace)
    if abs(t - 2.0) <= TRACE_TOL:
        return Conjugacy.PARABOLIC
    return Conjugacy.ELLIPTIC if t < 2.0 else Conjugacy.HYPERBOLIC


def most_contracted_direction(A: Mat2) -> Direction:
    """Input direction realising the smaller singular value of ``A``."""
    if A.norm <= 1.0 + TRACE_TOL:
        raise UndefinedDirectionError(f"Conformal matrix (norm {A.norm:.3g}) has no contracted direction")
    p = A.a**2 + A.c**2
    s = A.b**2 + A.d**2
    r = A.a * A.b + A.c * A.d
    expanded = 0.5 * math.atan2(2.0 * r, p - s)
    return Direction(expanded + math.pi / 2)


def stable_direction(A: Mat2) -> Direction:
    """Eigendirection of the eigenvalue of modulus below one."""
    if classify(A) is not Conjugacy.HYPERBOLIC:
        raise ClassificationError(f"Stable direction needs a hyperbolic matrix, trace {A.trace:.6g}")
    t = A.trace
    mu_unstable = 0.5 * (t + math.copysign(math.sqrt(t * t - 4.0 * A.det), t))
    mu = A.det / mu_unstable
    v1 = (A.b, mu - A.a)
    v2 = (mu - A.d, A.c)
    x, y = v1 if math.hypot(*v1) >= math.hypot(*v2) else v2
    return Direction(math.atan2(y, x))


def rotation_angle(A: Mat2) -> float:
    """Rotation number theta in (0, 1/2) with Tr A = 2 cos(2 pi theta)."""
    if classify(A) is not Conjugacy.ELLIPTIC:
        raise ClassificationError(f"Rotation angle needs an elliptic matrix, trace {A.trace:.6g}")
    return math.acos(A.trace / 2.0) / (2.0 * math.pi)


def _segments(mask: np.ndarray, breaks: np.ndarray) -> List[np.ndarray]:
    """Maximal index runs where ``mask`` holds and no break separates neighbours."""
    runs: List[np.ndarray] = []
    current: List[int] = []
    for i, ok in enumerate(mask):
        if ok and current and breaks[i]:
            runs.append(np.array(current))
            current = []
        if ok:
            current.append(i)
        elif current:
            runs.append(np.array(current))
            current = []
    if current:
        runs.append(np.array(current))
    return runs


def _lift(angles: np.ndarray, energies: np.ndarray) -> np.ndarray:
    steps = np.diff(angles)
    steps = (steps + math.pi / 2) % math.pi - math.pi / 2
    bad = np.abs(steps) > MAX_ANGLE_JUMP
    if np.any(bad):
        at = float(energies[1:][bad][0])
        raise RefinementNeededError(
            f"Direction jumps more than pi/4 between grid neighbours near E={at:.6g}; refine the grid",
            energy=at,
        )
    return np.concatenate([[angles[0]], angles[0] + np.cumsum(steps)])


def direction_derivative_signs(window: PotentialWindow, grid: EnergyGrid, k1: int, k2: int) -> DirectionSignReport:
    """Check the energy monotonicity of the stable directions of A_k1 and A_-k2.

    The stable direction of A_k1 must increase with E, that of A_-k2 must
    decrease, and their difference may vanish at most 2*max(k1, k2) times.
    """
    if k1 < 1 or k2 < 1:
        raise DomainError("k1 and k2 must be positive")
    energies = grid.points()
    n = energies.size
    forward = np.full(n, np.nan)
    backward = np.full(n, np.nan)
    tr_f = np.zeros(n)
    tr_b = np.zeros(n)
    retained = np.zeros(n, dtype=bool)
    for i, E in enumerate(energies):
        Af = two_sided_transfer(window, float(E), k1)
        Ab = two_sided_transfer(window, float(E), -k2)
        tr_f[i], tr_b[i] = Af.trace, Ab.trace
        if classify(Af) is Conjugacy.HYPERBOLIC and classify(Ab) is Conjugacy.HYPERBOLIC:
            forward[i] = stable_direction(Af).angle
            backward[i] = stable_direction(Ab).angle
            retained[i] = True
    # A trace sign flip between neighbours means a band was crossed.
    breaks = np.zeros(n, dtype=bool)
    breaks[1:] = (np.sign(tr_f[1:]) != np.sign(tr_f[:-1])) | (np.sign(tr_b[1:]) != np.sign(tr_b[:-1]))

    skipped = tuple(float(E) for E in energies[~retained])
    if skipped:
        logger.warning("Skipped %d non-hyperbolic grid energies", len(skipped))

    fwd_bad: List[float] = []
    bwd_bad: List[float] = []
    sign_changes = 0
    for seg in _segments(retained, breaks):
        if seg.size < 2:
            continue
        seg_e = energies[seg]
        mf = _lift(forward[seg], seg_e)
        mb = _lift(backward[seg], seg_e)
        dmf = np.gradient(mf, seg_e)
        dmb = np.gradient(mb, seg_e)
        fwd_bad.extend(float(E) for E in seg_e[dmf <= 0])
        bwd_bad.extend(float(E) for E in seg_e[dmb >= 0])
        sgn = np.sign(np.sin(mf - mb))
        sgn = sgn[sgn != 0]
        sign_changes += int(np.count_nonzero(sgn[1:] != sgn[:-1]))

    return DirectionSignReport(
        k1=k1,
        k2=k2,
        energies=tuple(float(E) for E in energies[retained]),
        skipped=skipped,
        forward_violations=tuple(fwd_bad),
        backward_violations=tuple(bwd_bad),
        sign_changes=sign_changes,
        bound=2 * max(k1, k2),
    )


Potential = Union[Sequence[float], np.ndarray, Callable[[int], float], Iterable[float]]


def take_potential(potential: Potential, n: int) -> np.ndarray:
    """First ``n`` values of a potential given as array, callable or iterator."""
    if callable(potential):
        return np.array([potential(i) for i in range(n)], dtype=float)
    if isinstance(potential, (list, tuple, np.ndarray)) or hasattr(potential, "symbols"):
        values = np.asarray(_symbols(potential), dtype=float)
        if values.size < n:
            raise DomainError(f"Potential has {values.size} values, {n} requested")
        return values[:n]
    values = np.fromiter(potential, dtype=float, count=n)
    return values


def lyapunov_estimate(potential: Potential, E: float, n: int) -> float:
    """(1/n) log of the transfer norm over the first ``n`` sites."""
    if n < 1:
        raise DomainError("Lyapunov estimate needs n >= 1")
    mat, log_scale = transfer_log(take_potential(potential, n), E)
    return (log_scale + math.log(mat.norm)) / n


def lyapunov_scan(potential: Potential, energies: np.ndarray, n: int) -> np.ndarray:
    """Vectorised :func:`lyapunov_estimate` over an energy array."""
    if n < 1:
        raise DomainError("Lyapunov estimate needs n >= 1")
    a, b, c, d, log_scale = transfer_entries(take_potential(potential, n), energies)
    frob = a**2 + b**2 + c**2 + d**2
    two_det = 2.0 * np.abs(a * d - b * c)
    norm = 0.5 * (np.sqrt(frob + two_det) + np.sqrt(np.maximum(frob - two_det, 0.0)))
    return (log_scale + np.log(norm)) / n


def hyperbolicity_certificate(A: Mat2, delta: float = 0.5, C: float = 1.0) -> bool:
    """True when ||A^2|| > C ||A||^(1 + delta), which forces A to be hyperbolic."""
    return (A @ A).norm > C * A.norm ** (1.0 + delta)


def uniform_hyperbolicity_fit(w, E: float, j_max: int = 20) -> UniformHyperbolicityFit:
    """Fit ||A^{E, w^j}|| >= c * lam^j over 1 <= j <= j_max."""
    if j_max < 2:
        raise DomainError("Need j_max >= 2 for a growth fit")
    base, base_log = transfer_log(w, E)
    prod, log_scale = Mat2.identity(), 0.0
    log_norms: List[float] = []
    for _ in range(j_max):
        prod = base @ prod
        log_scale += base_log
        s = max(abs(prod.a), abs(prod.b), abs(prod.c), abs(prod.d))
        prod = prod.scaled(1.0 / s)
        log_scale += math.log(s)
        log_norms.append(log_scale + math.log(prod.norm))
    j = np.arange(1, j_max + 1)
    slope, _ = np.polyfit(j, log_norms, 1)
    log_c = float(np.min(np.asarray(log_norms) - slope * j))
    return UniformHyperbolicityFit(c=math.exp(log_c), lam=math.exp(slope), log_norms=tuple(log_norms))
