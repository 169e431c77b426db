# Python module: periodic.py

# Import the required libraries
import logging
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvals_banded
from scipy.optimize import brentq

from core.backend.spectral.intervalsets import BandSet, normalize
from core.backend.spectral.sl2core import transfer_entries, transfer_log
from core.errors import DomainError, OutsideBandError, SolverResolutionError, StageTooDeepError

logger = logging.getLogger(__name__)

WORD_LENGTH_CAP = 20000
EDGE_XTOL = 1e-14
SCAN_STEP = 1e-4


@dataclass(frozen=True)
class Word:
    """A finite potential block over a declared real alphabet.

    Example:
        ```python
        w = Word.parse("0,1")
        (w ** 3).symbols   # (0.0, 1.0, 0.0, 1.0, 0.0, 1.0)
        ```
    """

    symbols: Tuple[float, ...]
    alphabet: Tuple[float, ...] = ()

    def __post_init__(self):
        symbols = tuple(float(s) for s in self.symbols)
        if not symbols:
            raise DomainError("Word must be nonempty")
        alphabet = tuple(sorted(set(float(a) for a in self.alphabet))) or tuple(sorted(set(symbols)))
        missing = set(symbols) - set(alphabet)
        if missing:
            raise DomainError(f"Symbols {sorted(missing)} not in alphabet {alphabet}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "alphabet", alphabet)

    @staticmethod
    def parse(text: str, alphabet: Sequence[float] = ()) -> "Word":
        """Parse ``"0,1,1"`` or ``"[0 1 1]"`` into a word."""
        tokens = [t for t in re.split(r"[,\s]+", text.strip().strip("[]")) if t]
        try:
            return Word(tuple(float(t) for t in tokens), tuple(alphabet))
        except ValueError as exc:
            raise DomainError(f"Cannot parse word '{text}': {exc}") from exc

    @staticmethod
    def from_indices(indices: Sequence[int], alphabet: Sequence[float]) -> "Word":
        table = tuple(float(a) for a in alphabet)
        try:
            return Word(tuple(table[i] for i in indices), table)
        except IndexError as exc:
            raise DomainError(f"Alphabet index out of range: {exc}") from exc

    def indices(self) -> List[int]:
        lookup = {a: i for i, a in enumerate(self.alphabet)}
        return [lookup[s] for s in self.symbols]

    def with_alphabet(self, alphabet: Sequence[float]) -> "Word":
        return Word(self.symbols, tuple(alphabet))

    def cyclic_shift(self, k: int = 1) -> "Word":
        k %= len(self.symbols)
        return Word(self.symbols[k:] + self.symbols[:k], self.alphabet)

    def __add__(self, other: "Word") -> "Word":
        return Word(self.symbols + other.symbols, tuple(set(self.alphabet) | set(other.alphabet)))

    def __pow__(self, k: int) -> "Word":
        if k < 1:
            raise DomainError("Word power must be >= 1")
        return Word(self.symbols * k, self.alphabet)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return ",".join(f"{s:g}" for s in self.symbols)


@dataclass(frozen=True)
class BandSpectrum:
    """Bands of a period-n word before tangency merging, plus the merged set.

    Unpacks as ``(band_set, band_count)``.
    """

    bands: Tuple[Tuple[float, float], ...]
    band_set: BandSet

    @property
    def count(self) -> int:
        return len(self.bands)

    def __iter__(self) -> Iterator:
        return iter((self.band_set, self.count))


def _check_length(n: int):
    if n > WORD_LENGTH_CAP:
        raise StageTooDeepError(f"Word length {n} exceeds cap {WORD_LENGTH_CAP}", length=n)


def discriminant(w: Word, E: float) -> float:
    """Trace of the monodromy matrix over ``w`` at energy ``E``."""
    mat, log_scale = transfer_log(w, E)
    if log_scale > 700.0:
        return math.copysign(math.inf, mat.trace)
    return mat.trace * math.exp(log_scale)


def discriminant_curve(w: Word, energies: np.ndarray) -> np.ndarray:
    a, _, _, d, log_scale = transfer_entries(w, energies)
    with np.errstate(over="ignore"):
        return (a + d) * np.exp(log_scale)


def _fold_order(n: int) -> np.ndarray:
    """Site order 0, n-1, 1, n-2, ... turning a cyclic chain into bandwidth 2."""
    order = np.empty(n, dtype=int)
    order[0::2] = np.arange((n + 1) // 2)
    order[1::2] = n - 1 - np.arange(n // 2)
    return order


def _bloch_eigenvalues(values: np.ndarray, corner: float) -> np.ndarray:
    """Eigenvalues of the period-n operator with u(j + n) = corner * u(j)."""
    n = values.size
    if n == 1:
        return np.array([values[0] + 2.0 * corner])
    if n == 2:
        off = 1.0 + corner
        return np.linalg.eigvalsh(np.array([[values[0], off], [off, values[1]]]))
    pos = np.empty(n, dtype=int)
    pos[_fold_order(n)] = np.arange(n)
    band = np.zeros((3, n))
    band[0, pos] = values
    links = [(i, i + 1, 1.0) for i in range(n - 1)] + [(0, n - 1, corner)]
    for s, t, val in links:
        p, q = sorted((pos[s], pos[t]))
        band[q - p, p] += val
    return np.sort(eigvals_banded(band, lower=True))


def _polish(w: Word, edge: float, target: float) -> float:
    if abs(discriminant(w, edge) - target) <= 1e-13:
        return edge
    h = 1e-9 * max(1.0, abs(edge))
    lo, hi = edge - h, edge + h
    f_lo, f_hi = discriminant(w, lo) - target, discriminant(w, hi) - target
    if np.isfinite(f_lo) and np.isfinite(f_hi) and f_lo * f_hi < 0:
        return brentq(lambda E: discriminant(w, E) - target, lo, hi, xtol=EDGE_XTOL)
    return edge


@lru_cache(maxsize=4096)
def _band_edges(symbols: Tuple[float, ...]) -> Tuple[Tuple[float, float], ...]:
    w = Word(symbols)
    values = np.asarray(symbols)
    upper = _bloch_eigenvalues(values, 1.0)
    lower = _bloch_eigenvalues(values, -1.0)
    edges = [(_polish(w, float(e), 2.0), 2.0) for e in upper] + [(_polish(w, float(e), -2.0), -2.0) for e in lower]
    edges.sort()
    points = np.array([e for e, _ in edges])
    bands = tuple((points[2 * j], points[2 * j + 1]) for j in range(len(symbols)))

    mids = np.array([0.5 * (lo + hi) for lo, hi in bands])
    d_mid = np.abs(discriminant_curve(w, mids))
    if np.any(d_mid > 2.5):
        bad = int(np.argmax(d_mid))
        raise SolverResolutionError(
            f"Band edge pairing failed for word of length {len(symbols)}: |D| = {d_mid[bad]:.3g} inside band {bad}",
            band=bad,
        )
    return tuple((float(lo), float(hi)) for lo, hi in bands)


def band_edges(w: Word) -> Tuple[Tuple[float, float], ...]:
    """The n bands of ``w`` from bottom to top, tangencies not merged."""
    _check_length(len(w))
    return _band_edges(w.symbols)


def band_spectrum(w: Word) -> BandSpectrum:
    bands = band_edges(w)
    return BandSpectrum(bands=bands, band_set=normalize(bands))


def rotation_number(w: Word, E: float) -> float:
    """Rotation number theta(E) in (0, 1/2) inside a band."""
    D = discriminant(w, E)
    if not abs(D) < 2.0:
        raise OutsideBandError(f"E={E} is outside every band interior (D={D:.6g})", energy=E)
    return math.acos(D / 2.0) / (2.0 * math.pi)


def _ids_from_bands(bands: Sequence[Tuple[float, float]], D: np.ndarray, energies: np.ndarray) -> np.ndarray:
    n = len(bands)
    los = np.array([lo for lo, _ in bands])
    his = np.array([hi for _, hi in bands])
    j = np.searchsorted(his, energies, side="left")
    inside = (j < n) & (los[np.minimum(j, n - 1)] <= energies)
    t = np.arccos(np.clip(D / 2.0, -1.0, 1.0)) / math.pi
    frac = np.where((n - 1 - j) % 2 == 0, 1.0 - t, t)
    return np.where(inside, (j + frac) / n, j / n)


def periodic_ids(w: Word, E: float) -> float:
    """Integrated density of states of the periodic operator over ``w``.

    Full bands below E count 1/n each; inside band j the fractional part
    runs from 0 to 1 through the rotation number. Gaps are plateaus.
    """
    bands = band_edges(w)
    D = np.array([discriminant(w, E)])
    return float(_ids_from_bands(bands, D, np.array([float(E)]))[0])


def periodic_ids_curve(w: Word, energies: np.ndarray) -> np.ndarray:
    energies = np.asarray(energies, dtype=float)
    return _ids_from_bands(band_edges(w), discriminant_curve(w, energies), energies)


def a_priori_interval(w: Word, margin: float = 0.0) -> Tuple[float, float]:
    return (min(w.symbols) - 2.0 - margin, max(w.symbols) + 2.0 + margin)


def grid_band_scan(w: Word, step: float = SCAN_STEP, margin: float = 1e-3) -> BandSet:
    """Dense scan of {|D| <= 2}; a slow oracle for the band solver."""
    lo, hi = a_priori_interval(w, margin)
    energies = np.arange(lo, hi + step, step)
    inside = np.abs(discriminant_curve(w, energies)) <= 2.0
    runs: List[Tuple[float, float]] = []
    start: Optional[int] = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((energies[start], energies[i - 1]))
            start = None
    if start is not None:
        runs.append((energies[start], energies[-1]))
    return normalize(runs)
