# Python module: dos.py

# Import the required libraries
import logging
import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import minimize_scalar

from core.backend.codings.systems import CodingSystem, orbit_coding, sample_phases
from core.backend.spectral.intervalsets import BandSet, grid_indicator, normalize
from core.backend.spectral.periodic import Word, band_edges
from core.backend.spectral.sl2core import EnergyGrid, PotentialWindow, lyapunov_scan
from core.errors import DomainError, PreconditionError, RefinementNeededError
from core.util.utils import parallel_map

logger = logging.getLogger(__name__)

PIVOT_SHIFT = 1e-12
THETA_POINTS = 256
EDGE_CLEARANCE = 1e-2
GRID_POINTS = 4001
GRID_MARGIN = 2.5
# Frequencies or lengths this close to p/q with q <= 1000 count as rational.
RATIONAL_DENOMINATOR = 1000
RATIONAL_TOL = 1e-9

# (phase index, length) -> potential values on sites 0..length-1
PotentialSampler = Callable[[int, int], np.ndarray]


def constant_sampler(value: float = 0.0) -> PotentialSampler:
    return lambda phase, length: np.full(length, float(value))


def periodic_sampler(w: Word) -> PotentialSampler:
    """Phase j starts the periodic potential at the j-th cyclic shift."""
    base = np.asarray(w.symbols)
    return lambda phase, length: np.resize(np.roll(base, -(phase % base.size)), length)


def coding_sampler(sys: CodingSystem, seed: int = 0) -> PotentialSampler:
    def sample(phase: int, length: int) -> np.ndarray:
        start = sample_phases(sys, 1, np.random.default_rng([seed, phase]))[0]
        return orbit_coding(sys, start, (0, length)).values

    return sample


def eigenvalue_counts(values: np.ndarray, energies: Union[float, np.ndarray]) -> np.ndarray:
    """Number of Dirichlet eigenvalues strictly below each energy.

    Negative pivots of the LDL^T factorisation of H - E, swept site by site
    for all energies at once. An exact zero pivot moves that energy down by
    1e-12 and the sweep is repeated.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 1:
        raise DomainError("Truncation size must be >= 1")
    E = np.atleast_1d(np.asarray(energies, dtype=float)).copy()
    counts = np.zeros(E.size, dtype=np.int64)
    pending = np.arange(E.size)
    for attempt in range(4):
        shift = E[pending] - attempt * PIVOT_SHIFT
        q = v[0] - shift
        count = (q < 0).astype(np.int64)
        broken = q == 0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            for vi in v[1:]:
                q = (vi - shift) - 1.0 / q
                count += q < 0
                broken |= q == 0
        counts[pending] = count
        if not broken.any():
            break
        logger.debug("Zero pivot at %d energies; shifting by %g", int(broken.sum()), PIVOT_SHIFT)
        pending = pending[broken]
    return counts


def eigenvalue_count(values: np.ndarray, E: float) -> int:
    return int(eigenvalue_counts(values, E)[0])


@dataclass(frozen=True, eq=False)
class IdsSample:
    """k(E) on an energy grid from phase-averaged eigenvalue counts."""

    energies: np.ndarray
    k: np.ndarray
    N: int
    phases: int

    @property
    def max_jump(self) -> float:
        return float(np.max(np.diff(self.k))) if self.k.size > 1 else 0.0

    def dk(self) -> Tuple[np.ndarray, np.ndarray]:
        """Cell edges and the dk mass of each cell."""
        return self.energies, np.diff(self.k)

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.energies.tolist(), self.k.tolist()))


def default_grid(values: Sequence[float], points: int = GRID_POINTS) -> EnergyGrid:
    return EnergyGrid.from_count(min(values) - GRID_MARGIN, max(values) + GRID_MARGIN, points)


def ids_curve(
    potential: Union[PotentialSampler, np.ndarray, Word],
    N: int,
    grid: Optional[EnergyGrid] = None,
    phases: int = 64,
    threads: int = 1,
) -> IdsSample:
    """Integrated density of states of the size-N Dirichlet truncation."""
    if N < 1:
        raise DomainError("Truncation size must be >= 1")
    if isinstance(potential, Word):
        potential = periodic_sampler(potential)
    if not callable(potential):
        fixed = np.asarray(potential, dtype=float)[:N]
        if fixed.size < N:
            raise DomainError(f"Potential has {fixed.size} values, {N} requested")
        potential, phases = (lambda phase, length: fixed), 1
    grid = grid or default_grid(potential(0, N))
    energies = grid.points()
    counts = parallel_map(lambda j: eigenvalue_counts(potential(j, N), energies), range(phases), threads=threads, desc="ids")
    k = np.mean(counts, axis=0) / N
    return IdsSample(energies, k, N, phases)


def _cell_log_average(E: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Mean of log|E - x| over each cell [lo, hi]."""

    def primitive(x):
        t = x - E
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t == 0, 0.0, t * (np.log(np.abs(t)) - 1.0))

    width = hi - lo
    return (primitive(hi) - primitive(lo)) / width


def thouless_lyapunov(ids: IdsSample, energies: np.ndarray) -> np.ndarray:
    """integral of log|E - E'| dk(E') with dk spread uniformly over grid cells."""
    edges, mass = ids.dk()
    keep = mass > 0
    lo, hi, mass = edges[:-1][keep], edges[1:][keep], mass[keep]
    return np.array([float(np.dot(mass, _cell_log_average(E, lo, hi))) for E in np.atleast_1d(energies)])


def thouless_check(w: Word, grid: EnergyGrid, N: int = 2000, ids_grid: Optional[EnergyGrid] = None) -> float:
    """Largest gap between the transfer-matrix and Thouless-formula exponents."""
    energies = grid.points()
    edges = np.array([e for band in band_edges(w) for e in band])
    clearance = np.min(np.abs(energies[:, None] - edges[None, :]), axis=1)
    if np.any(clearance < EDGE_CLEARANCE):
        bad = float(energies[int(np.argmin(clearance))])
        raise PreconditionError(f"Energy {bad} lies within {EDGE_CLEARANCE} of a band edge", energy=bad)
    ids = ids_curve(w, N, ids_grid, phases=len(w))
    lyap = lyapunov_scan(np.resize(np.asarray(w.symbols), N), energies, N)
    error = float(np.max(np.abs(lyap - thouless_lyapunov(ids, energies))))
    logger.info("Thouless check for %s at N=%d: max error %.3g", w, N, error)
    return error


def approximate_spectrum(values: np.ndarray, width: float) -> BandSet:
    """Union of width-neighbourhoods of the truncation eigenvalues."""
    v = np.asarray(values, dtype=float)
    eigs = eigvalsh_tridiagonal(v, np.ones(v.size - 1)) if v.size > 1 else v
    return normalize([(e - width, e + width) for e in eigs])


def lyapunov_fraction(
    potential: Union[np.ndarray, Word],
    grid: EnergyGrid,
    n: int,
    delta: float,
    spectrum: Optional[BandSet] = None,
    spectrum_sites: int = 4000,
) -> float:
    """Fraction of spectral grid energies whose Lyapunov estimate is below delta.

    Without an explicit spectrum the eigenvalues of a finite truncation,
    widened by one grid step, stand in for it.
    """
    if isinstance(potential, Word):
        values = np.resize(np.asarray(potential.symbols), n)
    else:
        values = np.asarray(potential, dtype=float)
    if values.size < n:
        raise DomainError(f"Potential has {values.size} values, {n} requested")
    energies = grid.points()
    if spectrum is None:
        spectrum = approximate_spectrum(values[: min(n, spectrum_sites)], max(grid.step, 1e-9))
    inside = grid_indicator(spectrum, energies)
    if not inside.any():
        return 0.0
    lyap = lyapunov_scan(values[:n], energies[inside], n)
    return float(np.mean(lyap < delta))


@dataclass(frozen=True)
class KotaniReport:
    """Lyapunov fractions on a fixed spectrum estimate, one per orbit length."""

    variant: str
    delta: float
    ns: Tuple[int, ...]
    fractions: Tuple[float, ...]
    energies: int

    @property
    def shrinking(self) -> bool:
        return all(b <= a for a, b in zip(self.fractions, self.fractions[1:]))

    def rows(self) -> List[Tuple[int, float]]:
        return list(zip(self.ns, self.fractions))

    def to_dict(self) -> Dict:
        return {
            "variant": self.variant,
            "delta": self.delta,
            "n": list(self.ns),
            "fraction": list(self.fractions),
            "energies": self.energies,
            "shrinking": self.shrinking,
        }


def _near_rational(x: float) -> bool:
    return abs(x - float(Fraction(x).limit_denominator(RATIONAL_DENOMINATOR))) < RATIONAL_TOL


def periodic_reason(sys: CodingSystem) -> Optional[str]:
    """Why every coded potential of ``sys`` is periodic, or None."""
    if len(set(sys.labels)) < 2:
        return "a single label"
    if sys.variant == "torus" and all(_near_rational(a) for a in sys.alpha):
        return f"rational frequency {list(sys.alpha)}"
    if sys.variant == "iet" and all(_near_rational(v) for v in sys.lengths):
        return f"rational lengths {list(sys.lengths)}"
    if sys.variant == "bernoulli" and max(sys.lengths) >= 1.0:
        return "a certain symbol"
    return None


def kotani_diagnostic(
    system: CodingSystem,
    grid: EnergyGrid,
    n: Union[int, Sequence[int]],
    delta: float,
    spectrum: Optional[BandSet] = None,
    seed: int = 0,
    spectrum_sites: int = 4000,
) -> KotaniReport:
    """Lyapunov fraction of an aperiodic coding along increasing orbit lengths.

    All lengths read prefixes of one sampled orbit and share one spectrum
    estimate, so the fractions are comparable; ``shrinking`` reports the trend.
    """
    if not isinstance(system, CodingSystem):
        raise PreconditionError(f"Kotani diagnostic needs a coding system, got {type(system).__name__}")
    reason = periodic_reason(system)
    if reason is not None:
        raise PreconditionError(f"Coding is periodic ({reason})", variant=system.variant)
    ns = tuple(sorted({int(v) for v in np.atleast_1d(n)}))
    if not ns or ns[0] < 1:
        raise DomainError("Orbit lengths must be positive")
    values = coding_sampler(system, seed)(0, ns[-1])
    if spectrum is None:
        spectrum = approximate_spectrum(values[: min(ns[-1], spectrum_sites)], max(grid.step, 1e-9))
    fractions = tuple(lyapunov_fraction(values, grid, k, delta, spectrum) for k in ns)
    report = KotaniReport(system.variant, float(delta), ns, fractions, int(grid_indicator(spectrum, grid.points()).sum()))
    logger.info("Kotani diagnostic delta=%g: fractions %s over n=%s", delta, fractions, ns)
    return report


@dataclass(frozen=True, eq=False)
class PolyBoundedSet:
    """Energies in Lambda with a solution bounded by gamma (1 + |n|) on [-N, N]."""

    gamma: float
    N: int
    Lambda: BandSet
    estimate: BandSet
    measure: float
    energies: np.ndarray
    members: np.ndarray
    resolution: float

    def to_dict(self) -> Dict:
        return {
            "gamma": self.gamma,
            "N": self.N,
            "Lambda": self.Lambda.to_list(),
            "estimate": self.estimate.to_list(),
            "measure": self.measure,
            "resolution": self.resolution,
            "theta_points": THETA_POINTS,
        }


def _window_values(window: PotentialWindow, N: int) -> np.ndarray:
    if window.lo > -N or window.hi < N:
        raise DomainError(f"Window [{window.lo}, {window.hi}] does not cover [-{N}, {N}]")
    return np.asarray(window.values[window.offset - N : window.offset + N + 1], dtype=float)


def _fundamental_solutions(values: np.ndarray, energies: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Solutions with (u(0), u(1)) = (1, 0) and (0, 1) on sites -N..N, one row per energy."""
    N = values.size // 2
    a = np.zeros((energies.size, values.size))
    b = np.zeros_like(a)
    a[:, N] = 1.0
    if N >= 1:
        b[:, N + 1] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(N + 1, 2 * N):
            c = energies - values[i]
            a[:, i + 1] = c * a[:, i] - a[:, i - 1]
            b[:, i + 1] = c * b[:, i] - b[:, i - 1]
        for i in range(N, 0, -1):
            c = energies - values[i]
            a[:, i - 1] = c * a[:, i] - a[:, i + 1]
            b[:, i - 1] = c * b[:, i] - b[:, i + 1]
    return a, b


def _growth_profile(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    def profile(theta):
        theta = np.atleast_1d(theta)
        with np.errstate(over="ignore", invalid="ignore"):
            u = np.abs(np.cos(theta)[:, None] * a[None, :] + np.sin(theta)[:, None] * b[None, :]) * weights[None, :]
        return np.nan_to_num(np.max(u, axis=1), nan=np.inf)

    return profile


def _min_growth(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
    profile = _growth_profile(a, b, weights)
    thetas = np.linspace(0.0, math.pi, THETA_POINTS, endpoint=False)
    values = profile(thetas)
    best = int(np.argmin(values))
    step = math.pi / THETA_POINTS
    refined = minimize_scalar(
        lambda t: float(profile(t)[0]),
        bounds=(thetas[best] - step, thetas[best] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(values[best], refined.fun))


def min_growth(window: PotentialWindow, E: float, N: int) -> float:
    """min over theta of max_{|n| <= N} |u_theta(n)| / (1 + |n|)."""
    values = _window_values(window, N)
    a, b = _fundamental_solutions(values, np.array([float(E)]))
    return _min_growth(a[0], b[0], 1.0 / (1.0 + np.abs(np.arange(-N, N + 1))))


def poly_bounded_energy_set(
    window: PotentialWindow,
    N: int,
    gamma: float,
    Lambda: BandSet,
    resolution: float = 1e-3,
    threads: int = 1,
    chunk: int = 256,
) -> PolyBoundedSet:
    """Grid estimate of the energies admitting a polynomially bounded solution."""
    if gamma < 1.0:
        raise PreconditionError(f"gamma={gamma} < 1 admits no normalised solution", gamma=gamma)
    if Lambda.is_empty:
        raise DomainError("Lambda is empty")
    values = _window_values(window, N)
    energies = EnergyGrid(Lambda.lo, Lambda.hi, resolution).points()
    missed = [iv for iv in Lambda.intervals if not np.any((energies >= iv[0]) & (energies <= iv[1]))]
    if missed:
        raise RefinementNeededError(f"{len(missed)} components of Lambda contain no grid energy at step {resolution}", components=len(missed))
    energies = energies[grid_indicator(Lambda, energies)]
    weights = 1.0 / (1.0 + np.abs(np.arange(-N, N + 1)))

    def chunk_growth(start: int) -> np.ndarray:
        a, b = _fundamental_solutions(values, energies[start : start + chunk])
        return np.array([_min_growth(a[i], b[i], weights) for i in range(a.shape[0])])

    parts = parallel_map(chunk_growth, range(0, energies.size, chunk), threads=threads, desc=f"N={N}")
    growth = np.concatenate(parts) if parts else np.empty(0)
    members = growth <= gamma
    half = 0.5 * resolution
    estimate = normalize([(E - half, E + half) for E in energies[members]]) & Lambda
    result = PolyBoundedSet(gamma, N, Lambda, estimate, estimate.measure(), energies, members, resolution)
    logger.info("Poly-bounded set gamma=%g N=%d: measure %.4g", gamma, N, result.measure)
    return result


def singularity_indicator(ids: IdsSample, mass: float) -> float:
    """Least total length of grid cells carrying ``mass`` of dk, densest first."""
    if not 0.0 < mass < 1.0:
        raise DomainError(f"mass must lie in (0, 1), got {mass}")
    edges, dk = ids.dk()
    widths = np.diff(edges)
    total = dk.sum()
    if total <= 0:
        return 0.0
    order = np.argsort(-(dk / widths), kind="stable")
    carried = np.cumsum(dk[order])
    needed = int(np.searchsorted(carried, mass * total - 1e-15)) + 1
    return float(widths[order][: min(needed, order.size)].sum())
