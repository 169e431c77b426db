# Python module: test_config.py
import pytest

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

from config import SUBCOMMANDS, ConfigManager, parse_override, resolve_experiment
from core.errors import ConfigError


def test_config_manager_reads_yaml(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("app:\n  name: demo\nrun:\n  seed: 3\n")
    manager = ConfigManager(str(path))
    assert manager.get("app")["name"] == "demo"
    assert manager.get("missing", 5) == 5
    assert manager.get_all()["run"]["seed"] == 3
    assert manager.locate("run.seed") == 4
    assert manager.locate("run.nothing") == 3


def test_config_manager_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        ConfigManager(str(tmp_path / "absent.yaml"))
    broken = tmp_path / "broken.yaml"
    broken.write_text("a: [1, 2\nb: 3\n")
    with pytest.raises(ConfigError) as info:
        ConfigManager(str(broken))
    assert info.value.exit_code == 2
    assert info.value.details["line"] is not None


@pytest.mark.parametrize("subcommand", SUBCOMMANDS)
def test_every_subcommand_resolves_defaults(subcommand):
    config = resolve_experiment(subcommand)
    assert config.subcommand == subcommand
    assert config.seed == 0
    assert config.threads == 1
    assert "run" not in config.params and "logging" not in config.params
    manifest = config.manifest()
    assert manifest["params"] == config.params
    assert set(manifest["libraries"]) == {"numpy", "scipy", "pyyaml"}


def test_user_file_and_overrides_merge(tmp_path):
    user = tmp_path / "user.yaml"
    user.write_text("run:\n  seed: 9\nN: 500\ngrid:\n  points: 101\n")
    config = resolve_experiment("dos", str(user), {"grid.lo": -1, "run.threads": 4})
    assert config.seed == 9
    assert config.threads == 4
    assert config.params["N"] == 500
    assert config.params["grid"] == {"lo": -1, "hi": None, "points": 101}
    assert config.params["kotani"]["delta"] == 0.02


def test_unknown_key_reports_path_and_line(tmp_path):
    user = tmp_path / "user.yaml"
    user.write_text("N: 500\ngrid:\n  points: 101\n  step: 0.1\n")
    with pytest.raises(ConfigError) as info:
        resolve_experiment("dos", str(user))
    assert info.value.details == {"key": "grid.step", "line": 4}


def test_type_checks():
    config = resolve_experiment("dos", overrides={"kotani.delta": 1})
    assert config.params["kotani"]["delta"] == 1.0
    assert isinstance(config.params["kotani"]["delta"], float)
    with pytest.raises(ConfigError):
        resolve_experiment("dos", overrides={"N": 2.5})
    with pytest.raises(ConfigError):
        resolve_experiment("dos", overrides={"thouless.enabled": "yes"})
    with pytest.raises(ConfigError):
        resolve_experiment("dos", overrides={"grid": 3})


def test_free_form_function_block():
    block = {"kind": "step", "breakpoints": ["0", "1/2"], "values": [0.0, 4.5]}
    config = resolve_experiment("qp", overrides={"function": block})
    assert config.params["function"] == block
    with pytest.raises(ConfigError):
        resolve_experiment("qp", overrides={"function": "cos"})


def test_seed_and_thread_ranges():
    assert resolve_experiment("bands", overrides={"run.seed": 2**64 - 1}).seed == 2**64 - 1
    for overrides in ({"run.seed": 2**64}, {"run.seed": -1}, {"run.threads": 0}):
        with pytest.raises(ConfigError):
            resolve_experiment("bands", overrides=overrides)
    with pytest.raises(ConfigError):
        resolve_experiment("plot")


def test_parse_override():
    assert parse_override("grid.points=11") == {"grid.points": 11}
    assert parse_override("word=[0, 1]") == {"word": [0, 1]}
    assert parse_override("alpha='2/5'") == {"alpha": "2/5"}
    with pytest.raises(ConfigError):
        parse_override("no-equals-sign")
