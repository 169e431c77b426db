# Python module: dos.py

# Import the required libraries
import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np

from config import ExperimentConfig
from core.backend.codings.systems import CodingSystem
from core.backend.dos.dos import (
    PotentialSampler,
    approximate_spectrum,
    coding_sampler,
    ids_curve,
    kotani_diagnostic,
    periodic_sampler,
    poly_bounded_energy_set,
    singularity_indicator,
    thouless_check,
    thouless_lyapunov,
)
from core.backend.spectral.periodic import Word
from core.backend.spectral.sl2core import EnergyGrid, PotentialWindow, lyapunov_scan
from core.errors import ConfigError
from scenarios.common import RunContext, ScenarioResult

logger = logging.getLogger(__name__)

SOURCES = ("word", "sturmian", "random")
MARGIN = 2.5


def build_sampler(
    params: Dict[str, Any], seed: int
) -> Tuple[PotentialSampler, Tuple[float, ...], Optional[CodingSystem]]:
    """Potential sampler for the configured source, its value set and coding system."""
    source = params["source"]
    if source == "word":
        w = Word(tuple(params["word"]))
        return periodic_sampler(w), w.alphabet, None
    if source == "sturmian":
        block = params["sturmian"]
        system = CodingSystem.sturmian(block["alpha"], block["labels"])
    elif source == "random":
        block = params["random"]
        system = CodingSystem.bernoulli(block["probabilities"], block["labels"])
    else:
        raise ConfigError(f"Unknown potential source '{source}', expected one of {SOURCES}", key="source")
    return coding_sampler(system, seed=seed), system.alphabet, system


def run(config: ExperimentConfig, ctx: RunContext) -> ScenarioResult:
    """IDS, Lyapunov and singularity scans of one potential family."""
    params = config.params
    sampler, values, system = build_sampler(params, ctx.seed)
    result = ScenarioResult("dos")

    grid_block = params["grid"]
    lo = grid_block["lo"] if grid_block["lo"] is not None else min(values) - MARGIN
    hi = grid_block["hi"] if grid_block["hi"] is not None else max(values) + MARGIN
    grid = EnergyGrid.from_count(float(lo), float(hi), grid_block["points"])
    N = params["N"]
    phases = 1 if params["source"] == "word" and len(params["word"]) == 1 else params["phases"]
    metadata = {"source": params["source"], "N": N, "phases": phases, "grid": [grid.lo, grid.hi, grid.step]}

    ids = ids_curve(sampler, N, grid, phases=phases, threads=ctx.threads)
    ctx.write_csv("ids.csv", ["E", "k"], ids.rows(), metadata)
    result.check("ids_monotone", bool(np.all(np.diff(ids.k) >= 0)))
    result.check("ids_range", bool(ids.k[0] >= 0.0 and ids.k[-1] <= 1.0), k_lo=float(ids.k[0]), k_hi=float(ids.k[-1]))

    lyap = params["lyapunov"]
    potential = sampler(0, lyap["n"])
    energies = ids.energies
    L = lyapunov_scan(potential, energies, lyap["n"])
    thouless = thouless_lyapunov(ids, energies)
    ctx.write_csv("lyapunov.csv", ["E", "L", "thouless"], zip(energies.tolist(), L.tolist(), thouless.tolist()), {**metadata, "n": lyap["n"]})
    kotani = params["kotani"]
    if kotani["enabled"] and system is not None:
        report = kotani_diagnostic(system, grid, kotani["n"], kotani["delta"], seed=ctx.seed)
        ctx.write_csv("kotani.csv", ["n", "fraction"], report.rows(), {**metadata, "delta": report.delta, "energies": report.energies})
        result.summary["kotani"] = {"n": list(report.ns), "fraction": list(report.fractions), "shrinking": report.shrinking}
    elif kotani["enabled"]:
        result.summary["kotani"] = {"skipped": "periodic word potential"}

    mass = params["indicator"]["mass"]
    result.summary["singularity_indicator"] = {"mass": mass, "length": singularity_indicator(ids, mass), "max_jump": ids.max_jump}

    th = params["thouless"]
    if th["enabled"] and params["source"] == "word":
        error = thouless_check(Word(tuple(params["word"])), EnergyGrid(th["lo"], th["hi"], th["step"]), N=N)
        result.check("thouless", error < th["tol"], error=error, tol=th["tol"])

    pb = params["poly_bounded"]
    if pb["enabled"]:
        Ns = sorted(int(n) for n in pb["N"])
        window = PotentialWindow(tuple(sampler(0, 2 * Ns[-1] + 1)), Ns[-1])
        Lambda = approximate_spectrum(np.asarray(window.values), pb["resolution"])
        sets = [poly_bounded_energy_set(window, n, pb["gamma"], Lambda, pb["resolution"], ctx.threads) for n in Ns]
        ctx.write_csv(
            "poly_bounded.csv",
            ["N", "measure"],
            [(s.N, s.measure) for s in sets],
            {"gamma": pb["gamma"], "resolution": pb["resolution"], "Lambda": Lambda.to_list()},
        )
        measures = [s.measure for s in sets]
        result.check("poly_bounded_decay", all(b < a for a, b in zip(measures, measures[1:])), measures=measures)

    ctx.write_json("summary.json", result.summary)
    logger.info("DOS scan %s: %d checks", params["source"], len(result.checks))
    return result
