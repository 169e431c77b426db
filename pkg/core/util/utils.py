# Python module: utils.py

# Import the required libraries
import csv
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# config.yaml keeps the historical "level-N" names next to the standard ones.
LEVEL_NAMES = {"level-1": logging.INFO, "level-2": logging.DEBUG}


def setup_logging(block: Optional[Dict[str, Any]] = None) -> None:
    """Configure the root logger from the ``logging`` block of config.yaml.

    Args:
        block (Dict): ``enable`` (bool), ``level`` (name or ``level-N``) and an
            optional ``file`` path. A disabled block keeps WARNING and above.
    """
    block = block or {}
    level_name = str(block.get("level", "INFO"))
    level = LEVEL_NAMES.get(level_name, logging.getLevelName(level_name.upper()))
    if not isinstance(level, int):
        level = logging.INFO
    if not block.get("enable", True):
        level = logging.WARNING

    handlers: List[logging.Handler] = [logging.StreamHandler()]
    log_file = block.get("file")
    if block.get("enable", True) and log_file:
        os.makedirs(os.path.dirname(log_file) or ".", exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


def print_banner(project_name: str, project_version: str, subcommand: str) -> None:
    logger.info("=" * 30)
    logger.info("Project name    : %s", project_name)
    logger.info("Project version : %s", project_version)
    logger.info("Subcommand      : %s", subcommand)
    logger.info("=" * 30)


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators whose streams do not depend on the thread count."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def parallel_map(
    func: Callable[[T], R],
    items: Sequence[T],
    threads: int = 1,
    desc: Optional[str] = None,
) -> List[R]:
    """Order-preserving map over a thread pool; ``threads <= 1`` runs inline.

    A progress bar is shown when ``desc`` is given and INFO logging is on.
    """
    items = list(items)
    show = desc is not None and logging.getLogger().isEnabledFor(logging.INFO)
    with tqdm(total=len(items), desc=desc, disable=not show, leave=False) as bar:
        if threads <= 1 or len(items) <= 1:
            results = []
            for item in items:
                results.append(func(item))
                bar.update(1)
            return results
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(func, item) for item in items]
            results = []
            for future in futures:
                results.append(future.result())
                bar.update(1)
            return results


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def write_json(path: str, payload: Any) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as handle:
        json.dump(to_jsonable(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]], metadata: Optional[Dict[str, Any]] = None) -> str:
    """CSV with ``# key: value`` metadata lines ahead of the header row."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as handle:
        for key in sorted(metadata or {}):
            handle.write(f"# {key}: {json.dumps(to_jsonable(metadata[key]), sort_keys=True)}\n")
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path: str) -> Tuple[Dict[str, Any], List[str], List[List[str]]]:
    metadata: Dict[str, Any] = {}
    body: List[str] = []
    with open(path) as handle:
        for line in handle:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                metadata[key.strip()] = json.loads(value.strip())
            else:
                body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        return metadata, [], []
    return metadata, rows[0], rows[1:]


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def library_versions() -> Dict[str, str]:
    import scipy
    import yaml

    return {"numpy": np.__version__, "scipy": scipy.__version__, "pyyaml": yaml.__version__}
