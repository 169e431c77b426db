# Python module: construct.py

# Import the required libraries
import logging

from config import ExperimentConfig
from core.backend.construction.construction import (
    aperiodicity_check,
    build_stages,
    certificate_set,
    gap_hyperbolicity_check,
    minimality_window_check,
    persist_stage,
    truncate_word,
)
from core.backend.spectral.periodic import Word
from scenarios.common import RunContext, ScenarioResult

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig, ctx: RunContext) -> ScenarioResult:
    """Staged construction with its budget ledger, certificate and window checks."""
    params = config.params
    seeds = [Word(tuple(symbols)) for symbols in params["seed_words"]]
    stages, ledger = build_stages(seeds, params["stages"], params["m_cap"], params["budget_schedule"], ctx.threads)
    result = ScenarioResult("construct")

    for stage in stages:
        path = persist_stage(stage, ctx.path(f"stage_{stage.level}.json"), ledger if stage is stages[-1] else None)
        ctx.add_file(path, "stage")
    ctx.write_json("ledger.json", ledger)
    ctx.write_csv(
        "ledger.csv",
        ["level", "budget", "measured_loss", "satisfied"],
        [(r["level"], r["budget"], r["measured_loss"], int(r["satisfied"])) for r in ledger.rows],
        {"sigma1_measure": ledger.sigma1_measure, "budget_schedule": params["budget_schedule"], "m_cap": params["m_cap"]},
    )

    sigma1 = ledger.sigma1_measure
    cert = certificate_set(stages)
    floor = sigma1 * (1.0 - sum(2.0 ** (-(1 + level)) for level in range(1, len(stages))))
    ctx.write_json(
        "certificate.json",
        {"sigma1_measure": sigma1, "lower_bound": cert.measure(), "floor": floor, "set": cert.to_list(),
         "note": "numerical certification by the band solver, not a proof"},
    )
    result.check("ledger_satisfied", ledger.satisfied, total_loss=ledger.total_loss)
    result.check("certificate_floor", cert.measure() >= floor - 1e-12, lower_bound=cert.measure(), floor=floor)
    result.check("certificate_half", cert.measure() > sigma1 / 2, lower_bound=cert.measure(), sigma1=sigma1)
    for stage in stages:
        report = gap_hyperbolicity_check(stage)
        result.check(f"gap_hyperbolicity_{stage.level}", report["passed"], gaps=report["gaps"], failures=report["failures"])

    windows = params["window_checks"]
    if windows["enabled"]:
        last = None
        for i in range(len(stages) - 1):
            s, s_next = stages[i], stages[i + 1]
            if s.level > windows["max_level"]:
                break
            s_prev = stages[i - 1] if i > 0 else None
            report = minimality_window_check(s_next, s, s_prev)
            result.check(f"minimality_window_{s.level}", report.passed, detail=report.to_dict())
            last = (s_next, s, s_prev)
        if windows["negative_control"] and last is not None:
            s_next, s, s_prev = last
            control = minimality_window_check(truncate_word(s_next, 0), s, s_prev)
            result.check("minimality_negative_control", not control.passed, detail=control.to_dict())

    if params["aperiodicity"]["enabled"]:
        depth = 1
        for stage in stages[: params["aperiodicity"]["max_level"]]:
            witness = aperiodicity_check(stage, depth)
            result.check(f"aperiodicity_{stage.level}", witness.found, detail=witness.to_dict())
            depth = stage.length

    result.summary = {
        "stages": len(stages),
        "sigma1_measure": sigma1,
        "lower_bound": cert.measure(),
        "lengths": [s.length for s in stages],
        "powers": [list(s.powers) for s in stages],
    }
    logger.info("Construction: %d stages, certificate %.6f of Leb(Sigma_1) = %.6f", len(stages), cert.measure(), sigma1)
    return result
