# Python module: main.py
import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from config import parse_override, resolve_experiment
from core.errors import LabError
from core.util.utils import print_banner, setup_logging, write_json
from database.schema import RunDatabase
from scenarios import bands, coding, construct, dos, qp, report, verify
from scenarios.common import RunContext

logger = logging.getLogger("subshiftlab")

SCENARIOS = {
    "bands": bands.run,
    "construct": construct.run,
    "coding": coding.run,
    "dos": dos.run,
    "qp": qp.run,
    "verify": verify.run,
    "report": report.run,
}

# Run-level results; every other file is written by the scenario.
MANIFEST = "manifest.json"
RESULT = "result.json"
LEDGER = "runs.db"


def _word_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot read word '{text}'") from exc


def _seed_words(text: str) -> List[List[float]]:
    return [_word_list(part) for part in text.split(";") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file overriding the subcommand defaults")
    common.add_argument("--threads", type=int, help="worker threads for data-parallel scans")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="unsigned 64-bit run seed")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override one dotted key, value read as YAML (repeatable)",
    )

    parser = argparse.ArgumentParser(prog="subshiftlab", description="Spectral experiments on Schrodinger operators over subshifts")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("bands", parents=[common], help="band set of one periodic word")
    p.add_argument("--word", type=_word_list, help="potential values, e.g. '0,1,1'")

    p = sub.add_parser("construct", parents=[common], help="staged construction with budget ledger")
    p.add_argument("--seed-words", type=_seed_words, help="';'-separated words, e.g. '0;1'")
    p.add_argument("--stages", type=int)
    p.add_argument("--m-cap", type=int)
    p.add_argument("--budget-schedule")

    p = sub.add_parser("coding", parents=[common], help="complexity and transitivity profiles")
    p.add_argument("--variant")

    p = sub.add_parser("dos", parents=[common], help="IDS, Lyapunov and singularity scans")
    p.add_argument("--word", type=_word_list, help="periodic potential; selects the word source")

    p = sub.add_parser("qp", parents=[common], help="quasi-periodic spectra and gap closing")
    p.add_argument("--mode")

    sub.add_parser("verify", parents=[common], help="property and oracle battery")

    p = sub.add_parser("report", parents=[common], help="CSV artifact to gnuplot columns")
    p.add_argument("--input")
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for text in args.overrides:
        overrides.update(parse_override(text))
    flags = {
        "threads": "run.threads",
        "out": "run.out_dir",
        "seed": "run.seed",
        "word": "word",
        "seed_words": "seed_words",
        "stages": "stages",
        "m_cap": "m_cap",
        "budget_schedule": "budget_schedule",
        "variant": "variant",
        "mode": "mode",
        "input": "input",
    }
    for attr, key in flags.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if args.subcommand == "dos" and getattr(args, "word", None) is not None:
        overrides["source"] = "word"
    return overrides


def run(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return the process exit code.

    0 when every check passes, 1 on a failing check or domain error, 2 on
    usage or configuration errors, 3 on resolution and budget errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = resolve_experiment(args.subcommand, args.config, collect_overrides(args))
    except LabError as exc:
        setup_logging()
        logger.error("%s", exc)
        return exc.exit_code

    setup_logging(config.logging)
    print_banner(config.app.get("name", "SubshiftLab"), config.app.get("version", ""), config.subcommand)
    os.makedirs(config.out_dir, exist_ok=True)
    manifest = config.manifest()
    write_json(os.path.join(config.out_dir, MANIFEST), manifest)

    db = RunDatabase(os.path.join(config.out_dir, LEDGER))
    run_id = db.start_run(config.subcommand, config.seed, manifest)
    ctx = RunContext(config.out_dir, config.seed, config.threads)
    try:
        result = SCENARIOS[config.subcommand](config, ctx)
    except LabError as exc:
        logger.error("%s failed: %s", config.subcommand, exc)
        write_json(os.path.join(config.out_dir, RESULT), {"subcommand": config.subcommand, "passed": False, **exc.to_dict()})
        code = exc.exit_code
    else:
        write_json(os.path.join(config.out_dir, RESULT), result)
        db.add_checks(run_id, [c.to_dict() for c in result.checks])
        code = 0 if result.passed else 1
        failed = [c.name for c in result.checks if not c.passed]
        if failed:
            logger.warning("%d of %d checks failed: %s", len(failed), len(result.checks), ", ".join(failed))
        else:
            logger.info("All %d checks passed", len(result.checks))
    db.add_artifacts(run_id, ctx.artifacts)
    db.finish_run(run_id, code)
    db.close()
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
