# Python module: quasiperiodic.py

# Import the required libraries
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.backend.quasiperiodic.sampling import SamplingFunction, as_fraction, sup_distance
from core.backend.spectral.intervalsets import BandSet, hausdorff_distance, normalize
from core.backend.spectral.periodic import Word, band_edges, periodic_ids_curve
from core.errors import DomainError, PreconditionError, ResolutionError, SupportBudgetError
from core.util.utils import parallel_map

logger = logging.getLogger(__name__)

MAX_DENOMINATOR = 200
PHASES_PER_SITE = 8
SPECTRUM_TOL = 1e-3
VERIFY_TOL = 1e-4
MAX_DOUBLINGS = 6
SMALLNESS = 10
TIE_TOL = 1e-12
TEST_MODES = 5

Rational = Union[Fraction, str, int, float]


def as_rational(alpha: Rational) -> Fraction:
    """Frequency reduced to p/q in [0, 1)."""
    return as_fraction(alpha) % 1


def golden_convergents(max_q: int) -> List[Fraction]:
    """Continued fraction convergents F(n-1)/F(n) of the golden mean with denominator <= max_q."""
    out: List[Fraction] = []
    p, q = 1, 1
    while q <= max_q:
        out.append(Fraction(p, q))
        p, q = q, p + q
    return out


def _orbit_steps(alpha: Fraction) -> np.ndarray:
    return np.array([float((n * alpha) % 1) for n in range(alpha.denominator)])


def _orbit_values(alpha: Fraction, f: SamplingFunction, phases: np.ndarray) -> np.ndarray:
    """Row j holds the period word (f(w_j), f(w_j + alpha), ..., f(w_j + (q-1) alpha))."""
    return f(np.add.outer(np.asarray(phases, dtype=float), _orbit_steps(alpha)))


def orbit_word(alpha: Rational, f: SamplingFunction, omega: float) -> Word:
    alpha = as_rational(alpha)
    return Word(tuple(_orbit_values(alpha, f, np.array([omega]))[0]))


@dataclass(frozen=True)
class QPModel:
    """Quasi-periodic potential v_n = f(omega + n alpha).

    A rational frequency (``"p/q"``, Fraction or int) is stored reduced;
    a float frequency is kept real.
    """

    alpha: Union[Fraction, float]
    f: SamplingFunction
    phase: float = 0.0

    def __post_init__(self):
        alpha = self.alpha
        if isinstance(alpha, float):
            alpha = alpha % 1.0
        else:
            alpha = as_rational(alpha)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "phase", float(self.phase) % 1.0)

    @property
    def is_rational(self) -> bool:
        return isinstance(self.alpha, Fraction)

    @property
    def q(self) -> int:
        if not self.is_rational:
            raise DomainError("An irrational frequency has no period")
        return self.alpha.denominator

    def potential(self, n_range: Tuple[int, int]) -> np.ndarray:
        """Values v_n for n in the half-open range [n_lo, n_hi)."""
        n = np.arange(*n_range)
        if self.is_rational:
            steps = np.array([float((int(k) * self.alpha) % 1) for k in n])
        else:
            steps = np.mod(n * self.alpha, 1.0)
        return self.f(self.phase + steps)

    def word(self) -> Word:
        return orbit_word(self.alpha, self.f, self.phase) if self.is_rational else self._irrational()

    def spectrum(self, **kwargs) -> "RationalSpectrum":
        if not self.is_rational:
            self._irrational()
        return rational_spectrum(self.alpha, self.f, **kwargs)

    def ids(self, energies: np.ndarray, **kwargs) -> np.ndarray:
        if not self.is_rational:
            self._irrational()
        return rational_ids_curve(self.alpha, self.f, energies, **kwargs)

    def _irrational(self):
        raise DomainError("Spectra are computed for rational frequencies only; use a rational approximant")


@dataclass(frozen=True, eq=False)
class RationalSpectrum:
    """Sampled union of the phase spectra and its continuity-widened outer set."""

    alpha: Fraction
    P: int
    inner: BandSet
    outer: BandSet
    widening: float
    change: float
    tol: float
    phases: np.ndarray = field(repr=False)
    bands: Tuple[Tuple[Tuple[float, float], ...], ...] = field(repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": str(self.alpha),
            "P": self.P,
            "samples": int(self.phases.size),
            "inner": self.inner.to_list(),
            "outer": self.outer.to_list(),
            "widening": self.widening,
            "hausdorff_change": self.change,
            "tol": self.tol,
            "caveat": "inner is a union over sampled phases; outer adds the modulus-of-continuity widening",
        }


def _check_frequency(alpha: Rational) -> Fraction:
    alpha = as_rational(alpha)
    if alpha.denominator > MAX_DENOMINATOR:
        raise DomainError(f"Denominator {alpha.denominator} exceeds {MAX_DENOMINATOR}", q=alpha.denominator)
    return alpha


def _cells(q: int, P: int, f: SamplingFunction, extra: Sequence[float] = ()) -> Tuple[np.ndarray, np.ndarray]:
    """Left ends and lengths of the cells of [0, 1/q) cut by the phase grid and the jumps of f."""
    width = 1.0 / q
    cuts = np.unique(np.concatenate([np.arange(P) / (q * P), np.mod(f.cut_points(), width), np.mod(extra, width)]))
    cuts = cuts[cuts < width]
    return cuts, np.append(cuts[1:], width) - cuts


def _spectrum_phases(q: int, P: int, f: SamplingFunction, resolution: float) -> np.ndarray:
    cuts, lengths = _cells(q, P, f)
    local = np.mod(f.local_phases(resolution), 1.0 / q)
    return np.unique(np.concatenate([cuts, cuts + lengths / 2, local]))


def _phase_bands(alpha: Fraction, f: SamplingFunction, phases: np.ndarray, threads: int) -> List[Tuple[Tuple[float, float], ...]]:
    rows = list(_orbit_values(alpha, f, phases))
    return parallel_map(lambda row: band_edges(Word(tuple(row))), rows, threads=threads, desc=f"phases {alpha}")


def rational_spectrum(
    alpha: Rational,
    f: SamplingFunction,
    P: Optional[int] = None,
    tol: float = SPECTRUM_TOL,
    resolution: Optional[float] = None,
    max_doublings: int = MAX_DOUBLINGS,
    threads: int = 1,
) -> RationalSpectrum:
    """Union over omega of the bands of the period-q words, omega sampled on [0, 1/q).

    P is doubled until the Hausdorff change of the sampled union drops below
    ``tol``. Jumps of f cut the phase cells so step functions are sampled
    exactly; bump perturbations are resolved to height steps of ``resolution``.
    """
    alpha = _check_frequency(alpha)
    q = alpha.denominator
    P = P or PHASES_PER_SITE * q
    if P < PHASES_PER_SITE * q:
        raise DomainError(f"P={P} is below {PHASES_PER_SITE}q={PHASES_PER_SITE * q}")
    resolution = resolution or tol

    def sampled(count: int):
        phases = _spectrum_phases(q, count, f, resolution)
        bands = _phase_bands(alpha, f, phases, threads)
        return phases, bands, normalize([b for row in bands for b in row])

    phases, bands, previous = sampled(P)
    change = math.inf
    for _ in range(max_doublings):
        P *= 2
        phases, bands, current = sampled(P)
        change = hausdorff_distance(previous, current)
        previous = current
        if change < tol:
            break
    else:
        raise ResolutionError(
            f"Spectrum of alpha={alpha} did not settle: Hausdorff change {change:.3g} >= {tol} at P={P}",
            P=P,
            change=change,
        )

    widening = f.smooth_modulus(1.0 / (q * P))
    spectrum = RationalSpectrum(alpha, P, previous, previous.widen(widening), widening, change, tol, phases, tuple(bands))
    logger.info(
        "Spectrum alpha=%s: %d components, measure %.6g (P=%d, change %.2g, widening %.2g)",
        alpha,
        previous.count,
        previous.measure(),
        P,
        change,
        widening,
    )
    return spectrum


def rational_ids_curve(
    alpha: Rational,
    f: SamplingFunction,
    energies: np.ndarray,
    P: Optional[int] = None,
    threads: int = 1,
) -> np.ndarray:
    """k(E) averaged over omega by the midpoint rule on the phase cells."""
    alpha = _check_frequency(alpha)
    q = alpha.denominator
    P = P or max(PHASES_PER_SITE * q, 32)
    energies = np.asarray(energies, dtype=float)
    extra = [x for c, w, _ in _all_bumps(f) for x in (c - w, c, c + w)]
    cuts, lengths = _cells(q, P, f, extra)
    rows = list(_orbit_values(alpha, f, cuts + lengths / 2))
    curves = parallel_map(lambda row: periodic_ids_curve(Word(tuple(row)), energies), rows, threads=threads, desc=f"ids {alpha}")
    return (lengths * q) @ np.vstack(curves)


def _all_bumps(f: SamplingFunction) -> List[Tuple[float, float, float]]:
    if f.kind != "perturbed":
        return []
    return list(f.bumps) + _all_bumps(f.base)


def step_error_bound(f: SamplingFunction, B: int) -> float:
    return f.modulus(1.0 / B)


def step_approximation(f: SamplingFunction, B: int) -> SamplingFunction:
    """Step function on the rational breakpoints j/B taking f's left-endpoint values."""
    if B < 1:
        raise DomainError("Breakpoint count must be >= 1")
    if not f.continuous:
        raise DomainError("Step approximation needs a continuous function")
    s = SamplingFunction.step([Fraction(j, B) for j in range(B)], f(np.arange(B) / B))
    logger.debug("Step approximation with B=%d: error bound %.4g", B, step_error_bound(f, B))
    return s


@dataclass(frozen=True)
class GapClosingReport:
    beta: Fraction
    interval: Tuple[float, float]
    eps: float
    r: float
    gaps: Tuple[Tuple[float, float], ...]
    omegas: Tuple[float, ...]
    reaches: Tuple[float, ...]
    supports: Tuple[Tuple[float, float], ...]
    support_total: float
    adjustments: Tuple[Tuple[int, float, float], ...]
    unlocated: Tuple[int, ...]
    sup_distance: float
    verified: bool
    surviving: Tuple[float, ...]
    tolerance: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": str(self.beta),
            "interval": list(self.interval),
            "eps": self.eps,
            "r": self.r,
            "gaps": [list(g) for g in self.gaps],
            "omegas": list(self.omegas),
            "reaches": list(self.reaches),
            "supports": [list(j) for j in self.supports],
            "support_total": self.support_total,
            "adjustments": [{"gap": i, "from": a, "to": b} for i, a, b in self.adjustments],
            "unlocated": list(self.unlocated),
            "sup_distance": self.sup_distance,
            "verified": self.verified,
            "surviving": list(self.surviving),
            "tolerance": self.tolerance,
        }


def _abutting_phase(spectrum: RationalSpectrum, edge: float, tol: float) -> Tuple[float, float]:
    """Sampled phase whose highest band below ``edge`` reaches furthest towards it.

    Among tied phases the middle of the longest consecutive run is taken.
    """
    reach = np.array([max((hi for _, hi in row if hi <= edge + tol), default=-math.inf) for row in spectrum.bands])
    best = float(reach.max())
    ties = np.nonzero(reach >= best - TIE_TOL)[0]
    runs = np.split(ties, np.nonzero(np.diff(ties) > 1)[0] + 1)
    run = max(runs, key=len)
    return float(spectrum.phases[run[len(run) // 2]]), best


def _circle_gap(x: float, y: float, period: float) -> float:
    d = abs(x - y) % period
    return min(d, period - d)


def _place(omegas: List[float], width: float, period: float, step: float) -> Tuple[List[float], List[Tuple[int, float, float]]]:
    """Move coinciding phases by the least multiple of ``step`` that keeps supports disjoint."""
    placed: List[float] = []
    adjustments: List[Tuple[int, float, float]] = []
    tries = int(math.ceil(period / step))
    for i, omega in enumerate(omegas):
        candidate = omega
        if any(_circle_gap(candidate, other, period) <= width for other in placed):
            for m in range(1, tries + 1):
                options = [(omega + s * m * step) % period for s in (1, -1)]
                free = [c for c in options if all(_circle_gap(c, other, period) > width for other in placed)]
                if free:
                    candidate = free[0]
                    break
            else:
                raise SupportBudgetError(
                    f"No room for {len(omegas)} disjoint supports of width {width:.3g} in a cell of length {period:.3g}",
                    width=width,
                    count=len(omegas),
                )
            adjustments.append((i, omega, candidate))
            logger.warning("Bump phase for gap %d moved from %.6g to %.6g", i, omega, candidate)
        placed.append(candidate)
    return placed, adjustments


def gap_closing_perturbation(
    beta: Rational,
    g: SamplingFunction,
    interval: Tuple[float, float],
    eps: Optional[float] = None,
    r: float = 1e-3,
    tol: float = SPECTRUM_TOL,
    verify_tol: float = VERIFY_TOL,
    threads: int = 1,
) -> Tuple[SamplingFunction, GapClosingReport]:
    """Close the small gaps of the beta-spectrum of g inside ``interval`` with hat bumps.

    For every gap a phase omega_i is found where a band abuts the gap from
    the left. A bump of height eps is placed at omega_i and its q translates
    by multiples of beta, so the band sweeps the gap as the bump rises.
    Supports have total length q * sum |J_i| < r and ||g - h|| <= eps.
    """
    beta = _check_frequency(beta)
    q = beta.denominator
    lo, hi = (float(v) for v in interval)
    if not lo < hi:
        raise DomainError(f"Interval needs lo < hi, got [{lo}, {hi}]")
    if not 0.0 < r <= 1.0:
        raise DomainError(f"Support budget r must lie in (0, 1], got {r}")

    spectrum = rational_spectrum(beta, g, tol=tol, resolution=verify_tol, threads=threads)
    inner = spectrum.inner
    if not (inner.contains(lo, verify_tol) and inner.contains(hi, verify_tol)):
        raise PreconditionError(f"Interval [{lo}, {hi}] does not start and end inside the spectrum", interval=[lo, hi])
    gaps = [(a, b) for a, b in BandSet.interval(lo, hi) - inner if b - a > verify_tol]
    widest = max((b - a for a, b in gaps), default=0.0)
    if eps is None:
        eps = 2.0 * widest
    if gaps and not eps < (hi - lo) / SMALLNESS:
        raise PreconditionError(f"eps={eps:.4g} is not small against |I|/{SMALLNESS}={(hi - lo) / SMALLNESS:.4g}", eps=eps)
    wide = [(a, b) for a, b in gaps if b - a >= eps]
    if wide:
        raise PreconditionError(f"{len(wide)} gaps in I are at least eps={eps:.4g} wide", gaps=[list(w) for w in wide])

    if not gaps:
        logger.info("No gaps of the beta=%s spectrum inside [%g, %g]; nothing to close", beta, lo, hi)
        report = GapClosingReport(beta, (lo, hi), eps, r, (), (), (), (), 0.0, (), (), 0.0, True, (), verify_tol)
        return g, report

    located = [_abutting_phase(spectrum, a, verify_tol) for a, _ in gaps]
    unlocated = tuple(i for i, ((a, _), (_, reach)) in enumerate(zip(gaps, located)) if a - reach > verify_tol)
    for i in unlocated:
        logger.warning("No band abutting gap %s located to %.1e (reach %.6g)", gaps[i], verify_tol, located[i][1])

    period = 1.0 / q
    width = r / (2.0 * q * len(gaps))
    omegas, adjustments = _place([omega % period for omega, _ in located], width, period, period / spectrum.P)
    support_total = q * len(gaps) * width
    if support_total >= r:
        raise SupportBudgetError(f"Bump supports total {support_total:.3g} >= r={r}", total=support_total)

    bumps = [((omega + k * period) % 1.0, width / 2.0, eps) for omega in omegas for k in range(q)]
    h = SamplingFunction.perturbed(g, bumps)

    check = rational_spectrum(beta, h, tol=tol, resolution=verify_tol, threads=threads)
    grid = np.arange(lo, hi + 0.5 * verify_tol, verify_tol)
    surviving = grid[check.inner.distance_to(grid) > verify_tol]
    if surviving.size:
        logger.warning("%d grid points of [%g, %g] remain outside the perturbed spectrum", surviving.size, lo, hi)

    report = GapClosingReport(
        beta=beta,
        interval=(lo, hi),
        eps=float(eps),
        r=r,
        gaps=tuple((float(a), float(b)) for a, b in gaps),
        omegas=tuple(omegas),
        reaches=tuple(reach for _, reach in located),
        supports=tuple((omega - width / 2.0, omega + width / 2.0) for omega in omegas),
        support_total=support_total,
        adjustments=tuple(adjustments),
        unlocated=unlocated,
        sup_distance=sup_distance(h, g),
        verified=not surviving.size,
        surviving=tuple(float(x) for x in surviving[:100]),
        tolerance=verify_tol,
    )
    logger.info("Closed %d gaps at beta=%s with eps=%.4g, support %.3g: verified=%s", len(gaps), beta, eps, support_total, report.verified)
    return h, report


@dataclass(frozen=True)
class DosBoundReport:
    r: float
    support: float
    bound: float
    discrepancies: Tuple[float, ...]
    sigmas: Tuple[float, ...]

    @property
    def passed(self) -> bool:
        return all(abs(d) <= self.bound + 3.0 * s for d, s in zip(self.discrepancies, self.sigmas))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r": self.r,
            "support": self.support,
            "bound": self.bound,
            "discrepancies": list(self.discrepancies),
            "sigmas": list(self.sigmas),
            "passed": self.passed,
        }


def _perturbation_support(g: SamplingFunction, h: SamplingFunction) -> List[Tuple[float, float]]:
    if h == g:
        return []
    if h.kind == "perturbed" and h.base == g:
        return [(c - w, c + w) for c, w, _ in h.bumps]
    logger.warning("h is not a bump perturbation of g; sampling the whole circle")
    return [(0.0, 1.0)]


def _stratified(support: List[Tuple[float, float]], count: int) -> np.ndarray:
    lengths = np.array([b - a for a, b in support])
    ends = np.cumsum(lengths)
    u = (np.arange(count) + 0.5) / count * ends[-1]
    j = np.searchsorted(ends, u, side="right")
    starts = np.array([a for a, _ in support])
    return np.mod(starts[j] + u - (ends[j] - lengths[j]), 1.0)


def _test_functions(rng: np.random.Generator, count: int, t: np.ndarray) -> np.ndarray:
    """Random trigonometric polynomials in t in [0, 1], normalised to sup-norm 1."""
    fine = np.linspace(0.0, 1.0, 8 * t.size)
    out = []
    for _ in range(count):
        a, b = rng.normal(size=TEST_MODES), rng.normal(size=TEST_MODES)
        modes = np.arange(1, TEST_MODES + 1)

        def psi(x):
            phase = 2 * math.pi * np.outer(x, modes)
            return np.cos(phase) @ a + np.sin(phase) @ b

        out.append(psi(t) / np.max(np.abs(psi(fine))))
    return np.vstack(out)


def dos_perturbation_bound(
    beta: Rational,
    g: SamplingFunction,
    h: SamplingFunction,
    r: float,
    energies: Optional[np.ndarray] = None,
    tests: int = 10,
    phases: int = 64,
    rng: Optional[np.random.Generator] = None,
    threads: int = 1,
) -> DosBoundReport:
    """Measured |int psi dk_g - int psi dk_h| for random |psi| <= 1 against the bound 2r.

    g and h agree off a beta-invariant support S, so the difference is |S|
    times the mean phase-resolved difference over S; phases in S are stratified.
    """
    beta = _check_frequency(beta)
    support = _perturbation_support(g, h)
    total = float(sum(b - a for a, b in support))
    if total > r * (1.0 + 1e-9):
        raise DomainError(f"Perturbation support {total:.4g} exceeds the declared r={r}", support=total)
    if not support:
        return DosBoundReport(r, 0.0, 2.0 * r, (0.0,) * tests, (0.0,) * tests)

    omegas = _stratified(support, phases)
    words_g = _orbit_values(beta, g, omegas)
    words_h = _orbit_values(beta, h, omegas)
    if energies is None:
        lo = min(words_g.min(), words_h.min()) - 2.5
        hi = max(words_g.max(), words_h.max()) + 2.5
        energies = np.linspace(lo, hi, 2001)
    energies = np.asarray(energies, dtype=float)
    mids = 0.5 * (energies[1:] + energies[:-1])
    psi = _test_functions(rng or np.random.default_rng(0), tests, (mids - energies[0]) / (energies[-1] - energies[0]))

    def difference(j: int) -> np.ndarray:
        kg = periodic_ids_curve(Word(tuple(words_g[j])), energies)
        kh = periodic_ids_curve(Word(tuple(words_h[j])), energies)
        return psi @ (np.diff(kg) - np.diff(kh))

    diffs = np.vstack(parallel_map(difference, range(omegas.size), threads=threads, desc="dos bound"))
    discrepancies = total * diffs.mean(axis=0)
    sigmas = total * diffs.std(axis=0, ddof=1) / math.sqrt(omegas.size) if omegas.size > 1 else np.zeros(tests)
    report = DosBoundReport(r, total, 2.0 * r, tuple(float(d) for d in discrepancies), tuple(float(s) for s in sigmas))
    logger.info("DOS perturbation: max discrepancy %.3g against bound %.3g", float(np.max(np.abs(discrepancies))), 2.0 * r)
    return report


@dataclass(frozen=True)
class ContinuityReport:
    labels: Tuple[str, ...]
    to_limit: Tuple[float, ...]
    consecutive: Tuple[float, ...]

    @property
    def decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.consecutive, self.consecutive[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "labels": list(self.labels),
            "to_limit": list(self.to_limit),
            "consecutive": list(self.consecutive),
            "decreasing": self.decreasing,
        }


def _continuity_report(labels: List[str], items: List[Any], distance) -> ContinuityReport:
    consecutive = tuple(float(distance(a, b)) for a, b in zip(items, items[1:]))
    to_limit = tuple(float(distance(a, items[-1])) for a in items[:-1])
    return ContinuityReport(tuple(labels), to_limit, consecutive)


def hausdorff_continuity_probe(
    sequence: Sequence[Tuple[Rational, SamplingFunction]],
    tol: float = SPECTRUM_TOL,
    threads: int = 1,
) -> ContinuityReport:
    """Hausdorff distances between the spectra along a sequence of rational models."""
    if len(sequence) < 2:
        raise DomainError("A continuity probe needs at least two models")
    spectra = [rational_spectrum(alpha, f, tol=tol, threads=threads).inner for alpha, f in sequence]
    report = _continuity_report([str(as_rational(a)) for a, _ in sequence], spectra, hausdorff_distance)
    logger.info("Hausdorff probe: consecutive %s", ["%.3g" % d for d in report.consecutive])
    return report


def ids_continuity_probe(
    sequence: Sequence[Tuple[Rational, SamplingFunction]],
    energies: np.ndarray,
    P: Optional[int] = None,
    threads: int = 1,
) -> ContinuityReport:
    """Sup-norm distances between the IDS curves on a shared energy grid."""
    if len(sequence) < 2:
        raise DomainError("A continuity probe needs at least two models")
    curves = [rational_ids_curve(alpha, f, energies, P=P, threads=threads) for alpha, f in sequence]
    report = _continuity_report(
        [str(as_rational(a)) for a, _ in sequence], curves, lambda a, b: np.max(np.abs(a - b))
    )
    logger.info("IDS probe: consecutive %s", ["%.3g" % d for d in report.consecutive])
    return report


@dataclass(frozen=True)
class PipelineStage:
    beta: Fraction
    interval: Tuple[float, float]
    eps: Optional[float] = None
    r: float = 1e-3

    @staticmethod
    def from_config(block: Dict[str, Any]) -> "PipelineStage":
        return PipelineStage(
            as_rational(block["beta"]),
            tuple(float(v) for v in block["interval"]),
            block.get("eps"),
            float(block.get("r", 1e-3)),
        )


@dataclass(frozen=True)
class PipelineResult:
    function: SamplingFunction
    reports: Tuple[GapClosingReport, ...]
    drifts: Tuple[float, ...]
    trust: Optional[float]

    @property
    def within_trust(self) -> bool:
        return self.trust is None or all(d <= self.trust for d in self.drifts)

    @property
    def verified(self) -> bool:
        return all(rep.verified for rep in self.reports)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stages": [rep.to_dict() for rep in self.reports],
            "drifts": list(self.drifts),
            "trust": self.trust,
            "within_trust": self.within_trust,
            "function": self.function.to_dict(),
        }


def gap_closing_pipeline(
    g: SamplingFunction,
    stages: Sequence[PipelineStage],
    trust: Optional[float] = None,
    tol: float = SPECTRUM_TOL,
    verify_tol: float = VERIFY_TOL,
    threads: int = 1,
) -> PipelineResult:
    """Finitely many rounds of gap closing at successive rational frequencies.

    After each round the spectrum of the new function is compared at the
    current and the next frequency; drifts above ``trust`` are logged.
    """
    if not stages:
        raise DomainError("The pipeline needs at least one stage")
    h = g
    reports: List[GapClosingReport] = []
    drifts: List[float] = []
    for i, stage in enumerate(stages):
        logger.info("Pipeline stage %d: beta=%s, I=%s", i + 1, stage.beta, stage.interval)
        h, report = gap_closing_perturbation(stage.beta, h, stage.interval, stage.eps, stage.r, tol, verify_tol, threads)
        reports.append(report)
        if i + 1 < len(stages):
            here = rational_spectrum(stage.beta, h, tol=tol, resolution=verify_tol, threads=threads).inner
            there = rational_spectrum(stages[i + 1].beta, h, tol=tol, resolution=verify_tol, threads=threads).inner
            drift = hausdorff_distance(here, there)
            drifts.append(drift)
            if trust is not None and drift > trust:
                logger.warning("Spectrum drift %.4g between beta=%s and beta=%s exceeds trust %.4g", drift, stage.beta, stages[i + 1].beta, trust)
    return PipelineResult(h, tuple(reports), tuple(drifts), trust)
