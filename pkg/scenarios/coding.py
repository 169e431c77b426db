# Python module: coding.py

# Import the required libraries
import logging
from typing import Any, Dict

from config import ExperimentConfig
from core.backend.codings.complexity import (
    complexity_bound_check,
    complexity_counts,
    complexity_mass_profile,
    transitivity_profile,
)
from core.backend.codings.diagnostics import FourierPolynomial, birkhoff_deviation, dense_hitting_time, diophantine_margin
from core.backend.codings.systems import CodingSystem, grid_rectangles, iet_pushforward_ks, sample_codings, sample_phases
from core.errors import ConfigError
from scenarios.common import RunContext, ScenarioResult

logger = logging.getLogger(__name__)

VARIANTS = ("sturmian", "torus", "skew", "iet", "bernoulli")


def build_system(variant: str, params: Dict[str, Any], ctx: RunContext) -> CodingSystem:
    """Coding system described by the variant's block of the coding config."""
    block = params[variant] if variant in VARIANTS else None
    if block is None:
        raise ConfigError(f"Unknown coding variant '{variant}', expected one of {VARIANTS}", key="variant")
    if variant == "sturmian":
        return CodingSystem.sturmian(block["alpha"], block["labels"])
    if variant == "torus":
        return CodingSystem.torus(block["alpha"], grid_rectangles(block["grid"]), block["labels"])
    if variant == "skew":
        return CodingSystem.skew(block["alpha"], grid_rectangles(block["grid"]), block["labels"])
    if variant == "iet":
        labels = block["labels"] or None
        if block["lengths"]:
            return CodingSystem.iet(block["permutation"], block["lengths"], labels)
        return CodingSystem.random_iet(block["permutation"], ctx.rng(1), labels)
    return CodingSystem.bernoulli(block["probabilities"], block["labels"])


def run_diagnostics(system: CodingSystem, block: Dict[str, Any], ctx: RunContext, result: ScenarioResult) -> Dict[str, Any]:
    """Frequency and orbit diagnostics that apply to the system's variant."""
    report: Dict[str, Any] = {}
    if system.variant in ("torus", "skew"):
        dio = block["diophantine"]
        margin = diophantine_margin(system.alpha, dio["tau"], dio["K"])
        report["diophantine"] = {"tau": dio["tau"], "K": dio["K"], "margin": margin}
        result.check("diophantine_positive", margin > 0.0, margin=margin)
    if system.variant == "torus":
        hit = block["hitting"]
        hitting = dense_hitting_time(system, hit["gammas"], hit["phases"], hit["targets"], hit["budget"], rng=ctx.rng(3))
        report["hitting"] = hitting.to_dict()
        times = [t for _, t in sorted(zip(hitting.gammas, hitting.max_times))]
        result.check("hitting_monotone", all(b <= a for a, b in zip(times, times[1:])), **hitting.to_dict())
    if system.variant == "skew":
        bk = block["birkhoff"]
        f = FourierPolynomial.from_terms(bk["terms"])
        deviation = birkhoff_deviation(system, f, bk["N"], bk["phases"], rng=ctx.rng(4))
        report["birkhoff"] = {**deviation.to_dict(), "mean_ratio": list(deviation.mean_ratios)}
        ratios = deviation.mean_ratios
        result.check("birkhoff_sublinear", ratios[-1] <= ratios[0], mean_ratio=list(ratios))
    if system.variant == "iet":
        pf = block["pushforward"]
        ks = iet_pushforward_ks(system, pf["points"], rng=ctx.rng(5))
        report["pushforward"] = {"points": pf["points"], "ks": ks}
        result.check("iet_measure_preserving", ks < pf["tol"], ks=ks, tol=pf["tol"])
    return report


def run(config: ExperimentConfig, ctx: RunContext) -> ScenarioResult:
    """Complexity, transitivity, mass and orbit diagnostics of one coded system."""
    params = config.params
    variant = params["variant"]
    system = build_system(variant, params, ctx)
    result = ScenarioResult("coding")
    cplx = params["complexity"]
    ns = list(range(1, cplx["n_max"] + 1))
    metadata = {"variant": variant, "sample_length": cplx["sample_length"], "seed": ctx.seed}

    if system.variant == "bernoulli":
        segment = 10 * cplx["n_max"]
        phases = sample_phases(system, max(1, cplx["sample_length"] // segment), ctx.rng(0))
        counts = [int(p) for p in complexity_counts(sample_codings(system, phases, segment, ctx.threads), ns)]
        ctx.write_csv("complexity.csv", ["n", "p"], zip(ns, counts), metadata)
        exponent = 1.0
    else:
        profile = complexity_bound_check(system, ns, cplx["sample_length"], rng=ctx.rng(0), threads=ctx.threads)
        counts = list(profile.counts)
        exponent = profile.exponent
        ctx.write_csv("complexity.csv", ["n", "p", "bound"], profile.rows(), {**metadata, "exponent": exponent, "C": profile.constant})
        ctx.write_json("complexity.json", profile)
        fitted = max(p / n**exponent for n, p in zip(ns, counts) if n <= cplx["fit_n"])
        result.check(
            "complexity_bound",
            all(p <= fitted * n**exponent * (1 + 1e-12) for n, p in zip(ns, counts)),
            C=fitted,
            exponent=exponent,
            fit_n=cplx["fit_n"],
        )
        if variant == "sturmian":
            result.check("sturmian_complexity", counts == [n + 1 for n in ns], p=counts)
        if system.variant == "iet":
            result.check("iet_affine_complexity", bool(profile.affine_exact), affine=list(profile.affine))
    result.check("complexity_monotone", all(b >= a for a, b in zip(counts, counts[1:])))
    result.summary["complexity"] = {"n_max": ns[-1], "p": counts[-1], "exponent": exponent}

    trans = params["transitivity"]
    if trans["enabled"]:
        exp = exponent if trans["exponent"] is None else float(trans["exponent"])
        tp = transitivity_profile(system, trans["n"], trans["C"], exp, trans["phases"], rng=ctx.rng(2), threads=ctx.threads)
        ctx.write_csv(
            "transitivity.csv",
            ["phase", "mass"],
            enumerate(tp.masses),
            {"n": tp.n, "window": tp.window, "quantile": tp.quantile, "method": tp.method},
        )
        ctx.write_json("transitivity.json", tp)
        result.check("transitivity_positive", tp.delta > 0.0, delta=tp.delta, window=tp.window)
        result.summary["transitivity"] = {"delta": tp.delta, "window": tp.window}

    mass = params["mass"]
    if mass["enabled"]:
        needed = complexity_mass_profile(system, mass["n"], mass["eps"])
        result.summary["mass"] = {"n": mass["n"], "eps": mass["eps"], "cylinders": needed}
        ctx.write_json("mass.json", result.summary["mass"])

    diag = params["diagnostics"]
    if diag["enabled"] and system.variant != "bernoulli":
        result.summary["diagnostics"] = run_diagnostics(system, diag, ctx, result)
        ctx.write_json("diagnostics.json", result.summary["diagnostics"])

    logger.info("Coding %s: p(%d) = %d", variant, ns[-1], counts[-1])
    return result
