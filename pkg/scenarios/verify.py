# Python module: verify.py

"""Property and oracle battery over every backend package.

Each group adds one or more checks to the shared result; ``scale`` picks the
``desk`` or ``full`` size of any parameter given as a ``{desk, full}`` pair.
"""

# Import the required libraries
import itertools
import logging
import math
from typing import Any, Callable, Dict, List

import numpy as np

from config import ExperimentConfig
from core.backend.codings.complexity import complexity_bound_check
from core.backend.codings.systems import CodingSystem, grid_rectangles, orbit_coding
from core.backend.construction.construction import (
    Stage,
    aperiodicity_check,
    build_stages,
    choose_power,
    lower_bound_certificate,
    minimality_window_check,
    truncate_word,
)
from core.backend.dos.dos import approximate_spectrum, constant_sampler, ids_curve, poly_bounded_energy_set, thouless_check
from core.backend.quasiperiodic.quasiperiodic import (
    dos_perturbation_bound,
    gap_closing_perturbation,
    golden_convergents,
    hausdorff_continuity_probe,
    ids_continuity_probe,
)
from core.backend.quasiperiodic.sampling import SamplingFunction
from core.backend.spectral.periodic import Word, band_edges, band_spectrum, discriminant, periodic_ids_curve
from core.backend.spectral.sl2core import EnergyGrid, PotentialWindow, direction_derivative_signs
from core.errors import BudgetFailureError, ConfigError
from scenarios.common import RunContext, ScenarioResult

logger = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5) - 1) / 2
FAILURE_SAMPLE = 10

Group = Callable[[Dict[str, Any], str, RunContext, ScenarioResult], None]


def _scaled(value: Any, scale: str) -> Any:
    return value[scale] if isinstance(value, dict) else value


def check_bands(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    max_length = _scaled(block["max_length"], scale)
    words = [Word(bits, (0.0, 1.0)) for n in range(1, max_length + 1) for bits in itertools.product((0.0, 1.0), repeat=n)]
    exhaustive = len(words) <= block["exhaustive_cap"]
    if not exhaustive:
        picks = ctx.rng(4).choice(len(words), size=block["sample"], replace=False)
        words = [words[i] for i in sorted(picks)]
    count_failures: List[str] = []
    edge_failures: List[str] = []
    worst = 0.0
    for w in words:
        bands = band_edges(w)
        if len(bands) != len(w):
            count_failures.append(str(w))
        for edge in (e for band in bands for e in band):
            residual = abs(abs(discriminant(w, edge)) - 2.0)
            worst = max(worst, residual)
            if residual > block["edge_tol"]:
                edge_failures.append(str(w))
                break
    result.check("band_count", not count_failures, words=len(words), exhaustive=exhaustive, failures=count_failures[:FAILURE_SAMPLE])
    result.check("band_edges", not edge_failures, max_residual=worst, failures=edge_failures[:FAILURE_SAMPLE])


def check_closed_forms(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    tol = block["tol"]
    free = band_spectrum(Word((0.0,))).band_set.to_list()
    result.check("free_spectrum", len(free) == 1 and abs(free[0][0] + 2) <= tol and abs(free[0][1] - 2) <= tol, bands=free)
    root = math.sqrt(17.0)
    expected = [(1 - root) / 2, 0.0, 1.0, (1 + root) / 2]
    edges = sorted(e for band in band_edges(Word((0.0, 1.0))) for e in band)
    error = max(abs(a - b) for a, b in zip(edges, expected))
    result.check("period_two_edges", len(edges) == 4 and error <= tol, edges=edges, error=error)


def check_power_witness(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    v, w = Word((1.0,)), Word((0.0,))
    budget = block["fraction"] * band_spectrum(w).band_set.measure()
    try:
        choice = choose_power(v, w, budget, block["m_cap"])
    except BudgetFailureError as exc:
        result.check("power_witness", False, best_residual=exc.best_residual, best_power=exc.best_power, budget=budget)
        return
    residuals = list(choice.residuals)
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))
    result.check("power_witness", nonincreasing and choice.residual < budget, power=choice.power, residuals=residuals, budget=budget)


def check_construction(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    stages, ledger = build_stages([Word((0.0,)), Word((1.0,))], block["stages"], block["m_cap"], threads=ctx.threads)
    sigma1 = ledger.sigma1_measure
    floor = sigma1 * (1.0 - sum(2.0 ** (-(1 + level)) for level in range(1, len(stages))))
    bound = lower_bound_certificate(stages)
    result.check("construction_ledger", ledger.satisfied, total_loss=ledger.total_loss, rows=len(ledger.rows))
    result.check("construction_certificate", bound >= floor - 1e-12 and bound > sigma1 / 2, lower_bound=bound, floor=floor)
    if len(stages) >= 3:
        report = minimality_window_check(stages[2], stages[1], stages[0])
        result.check("minimality_window", report.passed, detail=report.to_dict())
        control = minimality_window_check(truncate_word(stages[2], 0), stages[1], stages[0])
        result.check("minimality_negative_control", not control.passed)
    if len(stages) >= 2:
        witness = aperiodicity_check(stages[1], stages[0].length)
        result.check("aperiodicity_witness", witness.found, detail=witness.to_dict())
    periodic = aperiodicity_check(Stage.from_words(1, [Word((0.0, 1.0))]), 2)
    result.check("aperiodicity_periodic_control", not periodic.found, verdict=periodic.verdict)


def check_directions(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    rng = ctx.rng(7)
    grid = EnergyGrid.from_count(block["lo"], block["hi"], block["points"])
    failures = []
    for _ in range(_scaled(block["words"], scale)):
        length = int(rng.integers(1, block["max_length"] + 1))
        word = [float(v) for v in rng.choice([0.0, 3.0], size=length)]
        report = direction_derivative_signs(PotentialWindow.periodic(word, length), grid, length, length)
        if not report.passed:
            failures.append({"word": word, **report.to_dict()})
    result.check("direction_monotonicity", not failures, failures=failures[:FAILURE_SAMPLE])


def check_complexity(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    rng = ctx.rng(5)
    for r in (3, 4):
        system = CodingSystem.random_iet(tuple(range(r - 1, -1, -1)), rng)
        profile = complexity_bound_check(system, range(1, block["iet_n"] + 1), 10**6, rng=ctx.rng(10 + r))
        result.check(f"iet_complexity_{r}", bool(profile.affine_exact), p=list(profile.counts))

    sturmian = CodingSystem.sturmian(GOLDEN)
    ns = range(1, block["sturmian_n"] + 1)
    profile = complexity_bound_check(sturmian, ns, block["sample_length"], rng=ctx.rng(12))
    result.check("sturmian_complexity", list(profile.counts) == [n + 1 for n in ns], p=list(profile.counts))

    skew = CodingSystem.skew(GOLDEN, grid_rectangles((2, 2)), (0, 1, 2, 3))
    skew_n = _scaled(block["skew_n"], scale)
    profile = complexity_bound_check(skew, range(1, skew_n + 1), block["sample_length"], rng=ctx.rng(15))
    fitted = max(p / n**3 for n, p in zip(profile.ns, profile.counts) if n <= block["skew_fit_n"])
    holds = all(p <= fitted * n**3 * (1 + 1e-12) for n, p in zip(profile.ns, profile.counts))
    result.check("skew_cubic_bound", holds, C=fitted, p=list(profile.counts))


def check_ids(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    N = block["N"]
    free = ids_curve(constant_sampler(0.0), N, EnergyGrid.from_count(-1.9, 1.9, 39), phases=1, threads=ctx.threads)
    error = float(np.max(np.abs(free.k - np.arccos(-free.energies / 2) / math.pi)))
    result.check("free_ids", error < 5e-3, error=error)

    rng = ctx.rng(6)
    worst = []
    for _ in range(_scaled(block["words"], scale)):
        w = Word(tuple(float(v) for v in rng.choice([0.0, 1.0], size=int(rng.integers(1, 7)))), (0.0, 1.0))
        grid = EnergyGrid.from_count(-2.5, 3.5, 121)
        ids = ids_curve(w, N, grid, threads=ctx.threads)
        gap = float(np.max(np.abs(ids.k - periodic_ids_curve(w, ids.energies))))
        worst.append({"word": list(w.symbols), "error": gap, "tolerance": (len(w) + 2) / N})
    result.check("periodic_ids", all(item["error"] <= item["tolerance"] for item in worst), words=worst)

    errors = {
        "[0] outside": thouless_check(Word((0.0,)), EnergyGrid(3.0, 3.5, 0.5), N=N),
        "[0] inside": thouless_check(Word((0.0,)), EnergyGrid(-1.0, 1.0, 0.5), N=N),
        "[0,1] outside": thouless_check(Word((0.0, 1.0)), EnergyGrid(3.0, 3.5, 0.5), N=N),
        "[0,1] inside": thouless_check(Word((0.0, 1.0)), EnergyGrid(-1.0, -0.5, 0.5), N=N),
    }
    result.check("thouless", max(errors.values()) < block["thouless_tol"], errors=errors)


def check_poly_bounded(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    Ns = sorted(_scaled(block["N"], scale))
    values = orbit_coding(CodingSystem.sturmian(GOLDEN, (0.0, 3.0)), (0.2,), (-Ns[-1], Ns[-1] + 1)).values
    window = PotentialWindow(tuple(values), Ns[-1])
    Lambda = approximate_spectrum(np.asarray(values), block["resolution"])
    measures = [
        poly_bounded_energy_set(window, N, block["gamma"], Lambda, block["resolution"], ctx.threads).measure for N in Ns
    ]
    result.check("poly_bounded_decay", all(b < a for a, b in zip(measures, measures[1:])), N=Ns, measures=measures)


def check_gap_closing(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    g = SamplingFunction.step(["0", "1/2"], [0.0, 4.5])
    h, report = gap_closing_perturbation("0/1", g, (-1.5, 6.0), eps=block["eps"], r=block["r"], threads=ctx.threads)
    result.check(
        "gap_closing",
        report.verified and report.sup_distance <= report.eps and report.support_total < report.r,
        gaps=len(report.gaps),
        sup_distance=report.sup_distance,
        support=report.support_total,
    )
    bound = dos_perturbation_bound("0/1", g, h, report.r, rng=ctx.rng(9), threads=ctx.threads)
    result.check("dos_perturbation_bound", bound.passed, detail=bound.to_dict())


def check_continuity(block: Dict[str, Any], scale: str, ctx: RunContext, result: ScenarioResult) -> None:
    f = SamplingFunction.cosine(1.0)
    sequence = [(alpha, f) for alpha in golden_convergents(_scaled(block["max_q"], scale))[1:]]
    hausdorff = hausdorff_continuity_probe(sequence, threads=ctx.threads)
    ids = ids_continuity_probe(sequence, np.linspace(-3.2, 3.2, 641), threads=ctx.threads)
    result.check("hausdorff_continuity", hausdorff.decreasing, detail=hausdorff.to_dict())
    result.check("ids_continuity", ids.decreasing, detail=ids.to_dict())


GROUPS: Dict[str, Group] = {
    "bands": check_bands,
    "closed_forms": check_closed_forms,
    "power_witness": check_power_witness,
    "construction": check_construction,
    "directions": check_directions,
    "complexity": check_complexity,
    "ids": check_ids,
    "poly_bounded": check_poly_bounded,
    "gap_closing": check_gap_closing,
    "continuity": check_continuity,
}


def run(config: ExperimentConfig, ctx: RunContext) -> ScenarioResult:
    """Run the selected check groups and write the battery report."""
    params = config.params
    scale = params["scale"]
    if scale not in ("desk", "full"):
        raise ConfigError(f"Unknown scale '{scale}', expected desk or full", key="scale")
    selected = params["checks"] or list(GROUPS)
    unknown = [name for name in selected if name not in GROUPS]
    if unknown:
        raise ConfigError(f"Unknown checks {unknown}, expected a subset of {list(GROUPS)}", key="checks")

    result = ScenarioResult("verify")
    for name in selected:
        logger.info("Running check group %s (%s scale)", name, scale)
        GROUPS[name](params[name], scale, ctx, result)
    result.summary = {"scale": scale, "groups": selected, "checks": len(result.checks)}
    ctx.write_json("battery.json", result)
    return result
