# Python module: construction.py

"""Staged construction of a subshift whose spectrum keeps positive measure.

Stage 1 holds k_1 >= 2 seed words. Stage l+1 holds the words W_l w^s for
every stage-l word w and 1 <= s <= m(w), where W_l is the concatenation of
the stage-l words and the powers m(w) >= 2 are chosen so that the spectrum
lost from stage l to l+1 stays below a geometric budget. The budgets sum
to less than half the measure of the stage-1 spectrum, so every finite
chain certifies ``Leb >= Leb(Sigma_1) / 2``.

Example:
    ```python
    seeds = [Word((0.0,)), Word((1.0,))]
    stages, ledger = build_stages(seeds, n_stages=3, m_cap=64)
    lower_bound_certificate(stages)   # >= 0.5 * stages[0].spectrum_measure
    ```
"""

# Import the required libraries
import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Set, Tuple

from core.backend.spectral.intervalsets import BandSet, difference, hausdorff_distance, measure, union_all
from core.backend.spectral.periodic import WORD_LENGTH_CAP, Word, band_spectrum, discriminant
from core.errors import (
    BudgetFailureError,
    ConstructionPreconditionError,
    DomainError,
    StageParseError,
    StageTooDeepError,
)
from core.util.utils import parallel_map, write_json

logger = logging.getLogger(__name__)

STAGE_SCHEMA = "subshiftlab.stage/1"
SPECTRUM_CHECK_TOL = 1e-7


@dataclass(frozen=True)
class Stage:
    """Level-l state: stage words, the powers that produced them and Sigma_l.

    ``parent_words`` are the stage-(l-1) words and ``powers`` their chosen
    powers; both are empty at level 1.
    """

    level: int
    words: Tuple[Word, ...]
    powers: Tuple[int, ...]
    parent_words: Tuple[Word, ...]
    spectrum: BandSet
    spectrum_measure: float
    sigma1_measure: float

    @staticmethod
    def from_words(
        level: int,
        words: Sequence[Word],
        powers: Sequence[int] = (),
        parent_words: Sequence[Word] = (),
        sigma1_measure: Optional[float] = None,
    ) -> "Stage":
        alphabet = tuple(sorted({a for w in list(words) + list(parent_words) for a in w.alphabet}))
        words = tuple(w.with_alphabet(alphabet) for w in words)
        spectrum = union_all(band_spectrum(w).band_set for w in words)
        spectrum_measure = measure(spectrum)
        return Stage(
            level=level,
            words=words,
            powers=tuple(int(m) for m in powers),
            parent_words=tuple(w.with_alphabet(alphabet) for w in parent_words),
            spectrum=spectrum,
            spectrum_measure=spectrum_measure,
            sigma1_measure=spectrum_measure if sigma1_measure is None else sigma1_measure,
        )

    @property
    def alphabet(self) -> Tuple[float, ...]:
        return self.words[0].alphabet

    @property
    def W(self) -> Word:
        symbols: Tuple[float, ...] = ()
        for w in self.words:
            symbols += w.symbols
        return Word(symbols, self.alphabet)

    @property
    def k(self) -> int:
        return len(self.words)

    @property
    def length(self) -> int:
        """n_l = |W_l|."""
        return sum(len(w) for w in self.words)


@dataclass(frozen=True)
class PowerChoice:
    power: int
    residual: float
    residuals: Tuple[float, ...]


@dataclass(frozen=True)
class BudgetLedger:
    """One row per completed transition l -> l+1."""

    sigma1_measure: float
    rows: Tuple[Dict, ...] = ()

    def add(self, level: int, budget: float, loss: float, choices: Sequence[PowerChoice]) -> "BudgetLedger":
        row = {
            "level": level,
            "budget": budget,
            "measured_loss": loss,
            "powers": [c.power for c in choices],
            "residuals": [c.residual for c in choices],
            "satisfied": loss < budget,
        }
        return replace(self, rows=self.rows + (row,))

    @property
    def total_loss(self) -> float:
        return float(sum(r["measured_loss"] for r in self.rows))

    @property
    def satisfied(self) -> bool:
        return all(r["satisfied"] for r in self.rows) and self.total_loss < self.sigma1_measure / 2

    def to_dict(self) -> Dict:
        return {
            "sigma1_measure": self.sigma1_measure,
            "rows": list(self.rows),
            "total_loss": self.total_loss,
            "satisfied": self.satisfied,
            "note": "numerical certification by the band solver, not a proof",
        }


@dataclass(frozen=True)
class WindowReport:
    level: int
    max_gap: int
    gap_bound: int
    factor_length: int
    factors_checked: int
    missing_factors: Tuple[Tuple[int, ...], ...]
    structure_violations: Tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.missing_factors and not self.structure_violations and self.max_gap <= self.gap_bound

    def to_dict(self) -> Dict:
        return {
            "level": self.level,
            "max_gap": self.max_gap,
            "gap_bound": self.gap_bound,
            "factor_length": self.factor_length,
            "factors_checked": self.factors_checked,
            "missing_factors": [list(f) for f in self.missing_factors],
            "structure_violations": list(self.structure_violations),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class AperiodicityWitness:
    depth: int
    found: bool
    factor: Tuple[int, ...] = ()
    extensions: Tuple[int, ...] = ()
    corpus_size: int = 0

    @property
    def verdict(self) -> str:
        return "witness" if self.found else "inconclusive"

    def to_dict(self) -> Dict:
        return {
            "depth": self.depth,
            "verdict": self.verdict,
            "factor": list(self.factor),
            "extensions": list(self.extensions),
            "corpus_size": self.corpus_size,
        }


def initial_stage(seed_words: Sequence[Word]) -> Stage:
    if len(seed_words) < 2:
        raise ConstructionPreconditionError(f"Need at least 2 seed words, got {len(seed_words)}")
    alphabet = {a for w in seed_words for a in w.alphabet}
    if len(alphabet) < 2:
        raise ConstructionPreconditionError("Seed alphabet needs at least 2 letters")
    if len({w.symbols for w in seed_words}) < 2:
        raise ConstructionPreconditionError("Seed words must contain two distinct words")
    stage = Stage.from_words(1, seed_words)
    if stage.spectrum_measure <= 0:
        raise ConstructionPreconditionError("Stage-1 spectrum has zero measure")
    logger.info("Stage 1: %d words, Leb(Sigma_1) = %.6f", stage.k, stage.spectrum_measure)
    return stage


def geometric_budget(sigma1_measure: float, level: int) -> float:
    """Leb(Sigma_1) * 2^-(1 + l), the allowed loss from stage l to l+1."""
    return sigma1_measure * 2.0 ** (-(1 + level))


def choose_power(v: Word, w: Word, residual_budget: float, m_cap: int) -> PowerChoice:
    """Smallest m >= 2 with Leb(Sigma(w) minus the union of Sigma(v w^k), k <= m) below budget."""
    if residual_budget <= 0:
        raise DomainError("Residual budget must be positive")
    if m_cap < 2:
        raise DomainError("Power cap must be at least 2")
    target = band_spectrum(w).band_set
    uncovered = target
    residuals: List[float] = []
    best = (float("inf"), 0)
    for m in range(1, m_cap + 1):
        if len(v) + m * len(w) > WORD_LENGTH_CAP:
            raise StageTooDeepError(
                f"Word v w^{m} has length {len(v) + m * len(w)} above cap {WORD_LENGTH_CAP}",
                partial=tuple(residuals),
            )
        uncovered = difference(uncovered, band_spectrum(v + w**m).band_set)
        residual = measure(uncovered)
        residuals.append(residual)
        if m >= 2 and residual < best[0]:
            best = (residual, m)
        if m >= 2 and residual < residual_budget:
            return PowerChoice(power=m, residual=residual, residuals=tuple(residuals))
    raise BudgetFailureError(
        f"Residual {best[0]:.3g} above budget {residual_budget:.3g} at power cap {m_cap}",
        best_residual=best[0],
        best_power=best[1],
    )


def expand_words(prefix: Word, bases: Sequence[Word], powers: Sequence[int]) -> Tuple[Word, ...]:
    """Words prefix * base^s ordered by (k, s)."""
    return tuple(prefix + base**s for base, m in zip(bases, powers) for s in range(1, m + 1))


def next_stage(s: Stage, budget: float, m_cap: int, threads: int = 1) -> Tuple[Stage, List[PowerChoice], float]:
    """Build stage l+1; returns the stage, the power choices and the measured loss."""
    limit = geometric_budget(s.sigma1_measure, s.level)
    if budget > limit * (1 + 1e-12):
        raise DomainError(f"Budget {budget:.6g} exceeds Leb(Sigma_1) 2^-(1+l) = {limit:.6g}")
    prefix = s.W
    share = budget / s.k
    choices = parallel_map(
        lambda w: choose_power(prefix, w, share, m_cap),
        list(s.words),
        threads=threads,
        desc=f"stage {s.level + 1} powers",
    )
    powers = [c.power for c in choices]
    words = expand_words(prefix, s.words, powers)
    longest = max(len(w) for w in words)
    if longest > WORD_LENGTH_CAP:
        raise StageTooDeepError(f"Stage {s.level + 1} word length {longest} exceeds cap {WORD_LENGTH_CAP}")
    nxt = Stage.from_words(s.level + 1, words, powers, s.words, s.sigma1_measure)
    loss = measure(difference(s.spectrum, nxt.spectrum))
    logger.info(
        "Stage %d: %d words, powers %s, loss %.3g (budget %.3g)",
        nxt.level, nxt.k, powers, loss, budget,
    )
    if not loss < budget:
        raise BudgetFailureError(
            f"Measured loss {loss:.6g} not below budget {budget:.6g} at level {s.level}",
            best_residual=loss,
            best_power=max(powers),
        )
    return nxt, choices, loss


def build_stages(
    seed_words: Sequence[Word],
    n_stages: int,
    m_cap: int = 64,
    schedule: str = "geometric",
    threads: int = 1,
) -> Tuple[List[Stage], BudgetLedger]:
    if n_stages < 1:
        raise DomainError("Need at least one stage")
    if schedule != "geometric":
        raise DomainError(f"Unknown budget schedule '{schedule}'")
    stages = [initial_stage(seed_words)]
    ledger = BudgetLedger(sigma1_measure=stages[0].spectrum_measure)
    while len(stages) < n_stages:
        current = stages[-1]
        budget = geometric_budget(current.sigma1_measure, current.level)
        nxt, choices, loss = next_stage(current, budget, m_cap, threads)
        ledger = ledger.add(current.level, budget, loss, choices)
        stages.append(nxt)
    return stages, ledger


def _check_consecutive(stages: Sequence[Stage]) -> None:
    if not stages:
        raise DomainError("No stages given")
    for a, b in zip(stages, stages[1:]):
        if b.level != a.level + 1:
            raise DomainError(f"Stages {a.level} and {b.level} are not consecutive")


def certificate_set(stages: Sequence[Stage]) -> BandSet:
    """Sigma_1 with every measured loss Sigma_l minus Sigma_{l+1} removed."""
    _check_consecutive(stages)
    cert = stages[0].spectrum
    for a, b in zip(stages, stages[1:]):
        cert = difference(cert, difference(a.spectrum, b.spectrum))
    return cert


def lower_bound_certificate(stages: Sequence[Stage]) -> float:
    return measure(certificate_set(stages))


def gap_hyperbolicity_check(stage: Stage) -> Dict:
    """Every stage word must be hyperbolic at every gap midpoint of Sigma_l."""
    failures = []
    mids = [0.5 * (lo + hi) for lo, hi in stage.spectrum.gaps().intervals]
    for E in mids:
        for i, w in enumerate(stage.words):
            if not abs(discriminant(w, E)) > 2.0:
                failures.append({"energy": E, "word": i})
    return {"level": stage.level, "gaps": len(mids), "failures": failures, "passed": not failures}


def _encode(word: Word, alphabet: Sequence[float]) -> bytes:
    lookup = {a: i for i, a in enumerate(alphabet)}
    return bytes(lookup[x] for x in word.symbols)


def _occurrences(haystack: bytes, needle: bytes) -> List[int]:
    found, start = [], haystack.find(needle)
    while start != -1:
        found.append(start)
        start = haystack.find(needle, start + 1)
    return found


def _structure_violations(s_next: Stage, s: Stage, alphabet: Sequence[float]) -> List[int]:
    prefix = _encode(s.W, alphabet)
    bases = [_encode(w, alphabet) for w in s.words]
    bad = []
    for i, word in enumerate(s_next.words):
        enc = _encode(word, alphabet)
        tail = enc[len(prefix):]
        ok = enc.startswith(prefix) and any(
            len(b) > 0 and len(tail) % len(b) == 0 and len(tail) > 0 and tail == b * (len(tail) // len(b))
            for b in bases
        )
        if not ok:
            bad.append(i)
    return bad


def minimality_window_check(s_next: Stage, s: Stage, s_prev: Optional[Stage] = None) -> WindowReport:
    """Finite window checks behind minimality of the limit subshift.

    (a) W_l recurs inside every concatenation u v of stage-(l+1) words, from
    its start on, with gaps bounded by the longest stage-(l+1) word.
    (b) Every factor of length |W_{l-1}| (1 when no stage l-1 is given) of
    every concatenation u v of stage-(l+1) words occurs in W_{l+1}.
    (c) Every stage-(l+1) word has the form W_l w^s.
    """
    if s_next.level != s.level + 1 or (s_prev is not None and s.level != s_prev.level + 1):
        raise DomainError("Window check needs consecutive stages")
    alphabet = tuple(sorted(set(s_next.alphabet) | set(s.alphabet)))
    prefix = _encode(s.W, alphabet)
    words = [_encode(w, alphabet) for w in s_next.words]
    big = b"".join(words)
    L = s_prev.length if s_prev is not None else 1

    violations = _structure_violations(s_next, s, alphabet)

    max_gap = 0
    for u in words:
        for v in words:
            hits = _occurrences(u + v, prefix)
            if not hits:
                max_gap = max(max_gap, len(u) + len(v))
                continue
            gaps = [hits[0]] + [b - a for a, b in zip(hits, hits[1:])]
            max_gap = max([max_gap] + gaps)
    gap_bound = max(len(u) for u in words)

    known: Set[bytes] = {big[i:i + L] for i in range(len(big) - L + 1)}
    # Each word begins with W_l, so straddling factors only see W_l[:L-1].
    if len(prefix) >= L - 1 and not violations:
        corpus = [u + prefix[: L - 1] for u in words]
    else:
        corpus = [u + v for u in words for v in words]
    checked: Set[bytes] = set()
    missing: List[Tuple[int, ...]] = []
    for text in corpus:
        for i in range(len(text) - L + 1):
            factor = text[i:i + L]
            if factor in checked:
                continue
            checked.add(factor)
            if factor not in known:
                missing.append(tuple(factor))

    report = WindowReport(
        level=s.level,
        max_gap=max_gap,
        gap_bound=gap_bound,
        factor_length=L,
        factors_checked=len(checked),
        missing_factors=tuple(missing),
        structure_violations=tuple(violations),
    )
    if not report.passed:
        logger.warning("Minimality window check failed at level %d: %s", s.level, report.to_dict())
    return report


def aperiodicity_check(s: Stage, l0: int) -> AperiodicityWitness:
    """Search a factor of length l0 with two distinct right extensions."""
    if l0 < 1:
        raise DomainError("Aperiodicity depth must be >= 1")
    alphabet = s.alphabet
    words = [_encode(w, alphabet) for w in s.words]
    common = os.path.commonprefix(words)
    if len(common) >= l0 and len(words) > 1:
        corpus = [u + common for u in words]
    else:
        corpus = [u + v for u in words for v in words]
    extensions: Dict[bytes, Set[int]] = {}
    for text in corpus:
        for i in range(len(text) - l0):
            factor = text[i:i + l0]
            seen = extensions.setdefault(factor, set())
            seen.add(text[i + l0])
            if len(seen) > 1:
                return AperiodicityWitness(
                    depth=l0, found=True, factor=tuple(factor), extensions=tuple(sorted(seen)), corpus_size=len(corpus)
                )
    logger.info("No aperiodicity witness at depth %d (inconclusive)", l0)
    return AperiodicityWitness(depth=l0, found=False, corpus_size=len(corpus))


def truncate_word(stage: Stage, index: int) -> Stage:
    """Copy of ``stage`` with one word shortened by a symbol; a negative control."""
    words = list(stage.words)
    if len(words[index]) < 2:
        raise DomainError("Cannot truncate a one-letter word")
    words[index] = Word(words[index].symbols[:-1], stage.alphabet)
    return replace(stage, words=tuple(words))


def stage_to_dict(s: Stage, ledger: Optional[BudgetLedger] = None) -> Dict:
    alphabet = s.alphabet
    payload = {
        "schema": STAGE_SCHEMA,
        "level": s.level,
        "alphabet": list(alphabet),
        "words": [w.indices() for w in s.words],
        "powers": list(s.powers),
        "parent_words": [w.with_alphabet(alphabet).indices() for w in s.parent_words],
        "spectrum": s.spectrum.to_list(),
        "spectrum_measure": s.spectrum_measure,
        "sigma1_measure": s.sigma1_measure,
        "word_order": "lexicographic by (k, s)",
    }
    if ledger is not None:
        payload["ledger"] = ledger.to_dict()
    return payload


def persist_stage(s: Stage, path: str, ledger: Optional[BudgetLedger] = None) -> str:
    return write_json(path, stage_to_dict(s, ledger))


def _require(payload: Dict, key: str, kind, path: str):
    if key not in payload:
        raise StageParseError(f"Missing key '{key}'", path=path, location=key)
    value = payload[key]
    if not isinstance(value, kind):
        raise StageParseError(f"Key '{key}' has type {type(value).__name__}", path=path, location=key)
    return value


def load_stage(path: str) -> Stage:
    """Read a stage file and re-validate powers, word structure and spectra."""
    try:
        with open(path) as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise StageParseError(f"Invalid JSON: {exc.msg}", path=path, location=f"line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(payload, dict) or payload.get("schema") != STAGE_SCHEMA:
        raise StageParseError(f"Not a {STAGE_SCHEMA} file", path=path, location="schema")

    level = _require(payload, "level", int, path)
    alphabet = [float(a) for a in _require(payload, "alphabet", list, path)]
    powers = _require(payload, "powers", list, path)
    try:
        words = [Word.from_indices(ix, alphabet) for ix in _require(payload, "words", list, path)]
        parents = [Word.from_indices(ix, alphabet) for ix in _require(payload, "parent_words", list, path)]
    except (DomainError, TypeError) as exc:
        raise StageParseError(f"Bad word data: {exc}", path=path, location="words") from exc

    for i, m in enumerate(powers):
        if not isinstance(m, int) or m < 2:
            raise StageParseError(f"Power {m!r} is below 2", path=path, location=f"powers[{i}]")
    if level > 1:
        if len(powers) != len(parents):
            raise StageParseError("powers and parent_words differ in length", path=path, location="powers")
        expected = expand_words(Word(sum((w.symbols for w in parents), ()), tuple(alphabet)), parents, powers)
        if tuple(w.symbols for w in expected) != tuple(w.symbols for w in words):
            raise StageParseError("Words do not match W_(l-1) w^s structure", path=path, location="words")

    stage = Stage.from_words(level, words, powers, parents, float(_require(payload, "sigma1_measure", (int, float), path)))
    stored = BandSet.from_list(_require(payload, "spectrum", list, path))
    if stored.is_empty or hausdorff_distance(stored, stage.spectrum) > SPECTRUM_CHECK_TOL:
        raise StageParseError("Stored spectrum disagrees with recomputed spectrum", path=path, location="spectrum")
    return stage
