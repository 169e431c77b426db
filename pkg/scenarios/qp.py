# Python module: qp.py

# Import the required libraries
import logging

import numpy as np

from config import ExperimentConfig
from core.backend.quasiperiodic.quasiperiodic import (
    PipelineStage,
    dos_perturbation_bound,
    gap_closing_perturbation,
    gap_closing_pipeline,
    golden_convergents,
    hausdorff_continuity_probe,
    ids_continuity_probe,
    rational_ids_curve,
    rational_spectrum,
)
from core.backend.quasiperiodic.sampling import SamplingFunction
from core.errors import ConfigError
from scenarios.common import RunContext, ScenarioResult

logger = logging.getLogger(__name__)

MODES = ("spectrum", "gap_closing", "pipeline", "continuity")


def _spectrum(config: ExperimentConfig, ctx: RunContext, f: SamplingFunction, result: ScenarioResult):
    params = config.params
    block = params["spectrum"]
    spectrum = rational_spectrum(params["alpha"], f, P=block["P"], tol=block["tol"], threads=ctx.threads)
    ctx.write_json("spectrum.json", {**spectrum.to_dict(), "function": f.to_dict()})
    result.check("outer_contains_inner", (spectrum.inner - spectrum.outer).is_empty, widening=spectrum.widening)

    margin = params["ids"]["margin"]
    energies = np.linspace(spectrum.outer.lo - margin, spectrum.outer.hi + margin, params["ids"]["points"])
    k = rational_ids_curve(params["alpha"], f, energies, P=spectrum.P, threads=ctx.threads)
    ctx.write_csv("ids.csv", ["E", "k"], zip(energies.tolist(), k.tolist()), {"alpha": str(spectrum.alpha), "P": spectrum.P})
    result.check("ids_monotone", bool(np.all(np.diff(k) >= -1e-12)))
    result.summary["spectrum"] = {"measure": spectrum.inner.measure(), "bands": spectrum.inner.count, "P": spectrum.P}


def _gap_closing(config: ExperimentConfig, ctx: RunContext, f: SamplingFunction, result: ScenarioResult):
    params = config.params
    block = params["gap_closing"]
    h, report = gap_closing_perturbation(
        block["beta"],
        f,
        tuple(block["interval"]),
        eps=block["eps"],
        r=block["r"],
        tol=params["spectrum"]["tol"],
        verify_tol=block["verify_tol"],
        threads=ctx.threads,
    )
    ctx.write_json("perturbation.json", {"report": report, "function": h.to_dict()})
    result.check("gaps_closed", report.verified, surviving=list(report.surviving))
    result.check("sup_distance", report.sup_distance <= report.eps, sup_distance=report.sup_distance, eps=report.eps)
    result.check("support_budget", report.support_total < report.r or not report.gaps, support=report.support_total, r=report.r)

    bound = dos_perturbation_bound(
        block["beta"], f, h, report.r, tests=block["dos_tests"], phases=block["dos_phases"], rng=ctx.rng(3), threads=ctx.threads
    )
    ctx.write_json("dos_bound.json", bound)
    result.check("dos_bound", bound.passed, bound=bound.bound)
    result.summary["gap_closing"] = {"gaps": len(report.gaps), "eps": report.eps, "verified": report.verified}


def _pipeline(config: ExperimentConfig, ctx: RunContext, f: SamplingFunction, result: ScenarioResult):
    params = config.params
    block = params["pipeline"]
    try:
        stages = [PipelineStage.from_config(item) for item in block["stages"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"Bad pipeline stage: {exc}", key="pipeline.stages") from exc
    trust = None if block["trust"] is None else float(block["trust"])
    outcome = gap_closing_pipeline(f, stages, trust=trust, tol=params["spectrum"]["tol"], threads=ctx.threads)
    ctx.write_json("pipeline.json", outcome)
    result.check("pipeline_verified", outcome.verified)
    result.check("pipeline_trust", outcome.within_trust, drifts=list(outcome.drifts), trust=trust)
    result.summary["pipeline"] = {"stages": len(stages), "drifts": list(outcome.drifts)}


def _continuity(config: ExperimentConfig, ctx: RunContext, f: SamplingFunction, result: ScenarioResult):
    params = config.params
    block = params["continuity"]
    sequence = [(alpha, f) for alpha in golden_convergents(block["max_q"])[1:]]
    hausdorff = hausdorff_continuity_probe(sequence, tol=params["spectrum"]["tol"], threads=ctx.threads)
    reach = 2.0 + f.sup_norm() + params["ids"]["margin"]
    energies = np.linspace(-reach, reach, block["energies"])
    ids = ids_continuity_probe(sequence, energies, threads=ctx.threads)
    ctx.write_json("continuity.json", {"hausdorff": hausdorff, "ids": ids})
    ctx.write_csv(
        "continuity.csv",
        ["alpha", "hausdorff_next", "ids_next"],
        zip(hausdorff.labels, hausdorff.consecutive, ids.consecutive),
        {"energies": block["energies"], "max_q": block["max_q"]},
    )
    result.check("hausdorff_decreasing", hausdorff.decreasing, consecutive=list(hausdorff.consecutive))
    result.check("ids_decreasing", ids.decreasing, consecutive=list(ids.consecutive))


def run(config: ExperimentConfig, ctx: RunContext) -> ScenarioResult:
    """Rational spectra, gap closing, the gap-closing pipeline or continuity probes."""
    mode = config.params["mode"]
    handlers = {"spectrum": _spectrum, "gap_closing": _gap_closing, "pipeline": _pipeline, "continuity": _continuity}
    if mode not in handlers:
        raise ConfigError(f"Unknown qp mode '{mode}', expected one of {MODES}", key="mode")
    f = SamplingFunction.from_config(config.params["function"])
    result = ScenarioResult("qp")
    result.summary["mode"] = mode
    handlers[mode](config, ctx, f, result)
    logger.info("qp %s finished", mode)
    return result
