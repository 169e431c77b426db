# Python module: bands.py

# Import the required libraries
import logging

import numpy as np

from config import ExperimentConfig
from core.backend.spectral.periodic import Word, a_priori_interval, band_spectrum, discriminant, discriminant_curve
from scenarios.common import RunContext, ScenarioResult

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig, ctx: RunContext) -> ScenarioResult:
    """Band set of one periodic word, written as CSV plus a JSON band set."""
    params = config.params
    w = Word(tuple(params["word"]), tuple(params["alphabet"]))
    spectrum = band_spectrum(w)
    result = ScenarioResult("bands")

    metadata = {"word": list(w.symbols), "alphabet": list(w.alphabet), "edge_tol": params["edge_tol"]}
    ctx.write_csv("bands.csv", ["band", "lo", "hi"], [(i, lo, hi) for i, (lo, hi) in enumerate(spectrum.bands)], metadata)
    ctx.write_json(
        "band_set.json",
        {"word": list(w.symbols), "bands": [list(b) for b in spectrum.bands], "band_set": spectrum.band_set.to_list(),
         "measure": spectrum.band_set.measure(), "band_count": spectrum.count},
    )

    residuals = [abs(abs(discriminant(w, e)) - 2.0) for band in spectrum.bands for e in band]
    result.check("band_count", spectrum.count == len(w), count=spectrum.count, length=len(w))
    result.check("edge_discriminant", max(residuals) <= params["edge_tol"], max_residual=max(residuals))

    if params["discriminant_points"] > 0:
        lo, hi = a_priori_interval(w, margin=0.5)
        energies = np.linspace(lo, hi, params["discriminant_points"])
        D = discriminant_curve(w, energies)
        ctx.write_csv("discriminant.csv", ["E", "D"], zip(energies.tolist(), D.tolist()), metadata)

    result.summary = {"band_count": spectrum.count, "measure": spectrum.band_set.measure()}
    logger.info("Word %s: %d bands, measure %.6f", w, spectrum.count, spectrum.band_set.measure())
    return result
