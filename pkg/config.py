# Python module: config.py

# Import the required libraries
import copy
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

import yaml

from core.errors import ConfigError
from core.util.utils import library_versions

ROOT = os.path.dirname(os.path.abspath(__file__))
APP_CONFIG = os.path.join(ROOT, "config.yaml")
DEFAULTS_DIR = os.path.join(ROOT, "data", "config")
SUBCOMMANDS = ("bands", "construct", "coding", "dos", "qp", "verify", "report")
MANIFEST_SCHEMA = "subshiftlab.manifest/1"
U64_MAX = 2**64 - 1

# Keys whose value is a nested block validated by its consumer, not by the defaults.
FREE_FORM = frozenset({"function"})


class ConfigManager:
    def __init__(self, config_path: str):
        self.config_path = config_path
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        if not os.path.exists(self.config_path):
            raise FileNotFoundError(f"Configuration file not found at {self.config_path}")
        with open(self.config_path, "r") as file:
            try:
                loaded = yaml.safe_load(file)
            except yaml.YAMLError as exc:
                mark = getattr(exc, "problem_mark", None)
                line = mark.line + 1 if mark is not None else None
                raise ConfigError(f"Cannot parse {self.config_path}: {exc}", key="<file>", line=line) from exc
        if loaded is None:
            return {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{self.config_path} must hold a mapping at top level", key="<file>", line=1)
        return loaded

    def get(self, key: str, default=None):
        # Get a specific configuration value
        return self.config.get(key, default)

    def get_all(self) -> Dict[str, Any]:
        # Get the entire configuration as a dictionary
        return self.config

    def locate(self, key_path: str) -> Optional[int]:
        """1-based line of a dotted key, or of its deepest existing parent."""
        with open(self.config_path, "r") as file:
            node = yaml.compose(file)
        line = None
        for part in key_path.split("."):
            if not isinstance(node, yaml.MappingNode):
                break
            for key_node, value_node in node.value:
                if key_node.value == part:
                    line = key_node.start_mark.line + 1
                    node = value_node
                    break
            else:
                break
        return line


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings of one subcommand run.

    ``params`` holds the subcommand block with every default filled in.
    """

    subcommand: str
    params: Dict[str, Any]
    seed: int
    out_dir: str
    threads: int
    logging: Dict[str, Any] = field(default_factory=dict)
    app: Dict[str, Any] = field(default_factory=dict)

    def manifest(self) -> Dict[str, Any]:
        # out_dir is left out so reruns into another directory stay identical
        return {
            "schema": MANIFEST_SCHEMA,
            "app": {"name": self.app.get("name"), "version": self.app.get("version")},
            "subcommand": self.subcommand,
            "params": copy.deepcopy(self.params),
            "seed": self.seed,
            "threads": self.threads,
            "libraries": library_versions(),
        }


def _type_name(value: Any) -> str:
    return type(value).__name__


def _accepts(default: Any, value: Any) -> bool:
    if default is None:
        return True
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, list):
        return isinstance(value, list)
    if isinstance(default, dict):
        return isinstance(value, dict)
    return isinstance(value, type(default))


def _merge(base: Dict[str, Any], update: Mapping[str, Any], where: str, locate) -> Dict[str, Any]:
    """Overlay ``update`` on ``base``, rejecting keys or types the defaults do not declare."""
    merged = dict(base)
    for key, value in update.items():
        path = f"{where}.{key}" if where else str(key)
        if key not in base:
            raise ConfigError("Unknown configuration key", key=path, line=locate(path))
        default = base[key]
        if key in FREE_FORM:
            if not isinstance(value, dict):
                raise ConfigError(f"Expected a mapping, got {_type_name(value)}", key=path, line=locate(path))
            merged[key] = copy.deepcopy(value)
            continue
        if isinstance(default, dict) and isinstance(value, dict):
            merged[key] = _merge(default, value, path, locate)
            continue
        if not _accepts(default, value):
            raise ConfigError(
                f"Expected {_type_name(default)}, got {_type_name(value)}", key=path, line=locate(path)
            )
        merged[key] = float(value) if isinstance(default, float) and isinstance(value, int) else copy.deepcopy(value)
    return merged


def _nest(overrides: Mapping[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        node = nested
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError("Override addresses a child of a leaf value", key=dotted)
            node = child
        node[parts[-1]] = value
    return nested


def parse_override(text: str) -> Dict[str, Any]:
    """``key.path=value`` with the value read as YAML."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"Override '{text}' is not of the form key=value")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigError(f"Cannot parse override value '{raw}': {exc}", key=key.strip()) from exc
    return {key.strip(): value}


def resolve_experiment(
    subcommand: str,
    user_config_path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """Merge config.yaml, the subcommand defaults, a user file and CLI overrides.

    The user file and the overrides address subcommand parameters at the top
    level and the shared ``run`` and ``logging`` blocks by name. Any key the
    defaults do not declare is rejected with its dotted path and line.

    Args:
        subcommand (str): One of ``SUBCOMMANDS``.
        user_config_path (str, optional): YAML file passed with ``--config``.
        overrides (Mapping, optional): Dotted keys from the command line.

    Returns:
        ExperimentConfig: The resolved configuration.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"Unknown subcommand '{subcommand}'", key="subcommand")
    app_config = ConfigManager(APP_CONFIG)
    defaults = ConfigManager(os.path.join(DEFAULTS_DIR, f"{subcommand}_config.yaml")).get_all()
    tree = {"run": app_config.get("run", {}), "logging": app_config.get("logging", {}), **defaults}

    if user_config_path:
        try:
            user = ConfigManager(user_config_path)
        except FileNotFoundError as exc:
            raise ConfigError(str(exc), key="--config") from exc
        tree = _merge(tree, user.get_all(), "", user.locate)
    if overrides:
        tree = _merge(tree, _nest(overrides), "", lambda path: None)

    run = tree.pop("run")
    logging_block = tree.pop("logging")
    seed = run.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= U64_MAX:
        raise ConfigError(f"Seed must be an integer in [0, 2^64 - 1], got {seed!r}", key="run.seed")
    threads = run.get("threads")
    if not isinstance(threads, int) or threads < 1:
        raise ConfigError(f"Thread count must be a positive integer, got {threads!r}", key="run.threads")
    return ExperimentConfig(
        subcommand=subcommand,
        params=tree,
        seed=seed,
        out_dir=str(run.get("out_dir") or "results"),
        threads=threads,
        logging=logging_block,
        app=app_config.get("app", {}),
    )
