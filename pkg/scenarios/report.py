# Python module: report.py

# Import the required libraries
import logging
import os

from config import ExperimentConfig
from core.errors import ConfigError
from core.util.plots import csv_to_gnuplot
from scenarios.common import RunContext, ScenarioResult

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig, ctx: RunContext) -> ScenarioResult:
    """Convert one CSV artifact into gnuplot whitespace columns."""
    params = config.params
    source = params["input"]
    if not source:
        raise ConfigError("report needs an input CSV", key="input")
    stem = os.path.splitext(os.path.basename(source))[0]
    target = params["output"] or ctx.path(f"{stem}.dat")
    path = csv_to_gnuplot(source, target, params["columns"] or None)
    ctx.add_file(path, "dat")
    result = ScenarioResult("report")
    result.summary = {"input": source, "output": os.path.basename(path)}
    return result
