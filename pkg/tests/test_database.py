# Python module: test_database.py
import numpy as np
import pytest

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

from database.schema import RunDatabase


@pytest.fixture
def db(tmp_path):
    database = RunDatabase(str(tmp_path / "runs.db"))
    yield database
    database.close()


def test_run_lifecycle(db):
    run_id = db.start_run("bands", 2**64 - 1, {"params": {"word": [0.0]}})
    row = db.get_run(run_id)
    assert row["subcommand"] == "bands"
    assert row["seed"] == str(2**64 - 1)
    assert row["finished"] is None
    db.finish_run(run_id, 1)
    row = db.get_run(run_id)
    assert row["exit_code"] == 1
    assert row["finished"] >= row["started"]
    assert db.get_run(run_id + 1) is None


def test_checks_and_artifacts(db):
    run_id = db.start_run("verify", 0, {})
    db.add_checks(
        run_id,
        [
            {"name": "free_ids", "passed": True, "detail": {"error": np.float64(1e-3)}},
            {"name": "thouless", "passed": np.bool_(False), "detail": {"ok": np.bool_(False)}},
        ],
    )
    db.add_artifacts(run_id, [{"path": "battery.json", "kind": "json", "sha256": "ab" * 32}])
    checks = db.get_checks(run_id)
    assert [c["name"] for c in checks] == ["free_ids", "thouless"]
    assert checks[0]["passed"] is True
    assert checks[0]["detail"] == {"error": 1e-3}
    assert [c["name"] for c in db.get_checks(run_id, failed_only=True)] == ["thouless"]
    assert db.get_artifacts(run_id)[0]["path"] == "battery.json"


def test_separate_ledgers_do_not_share_connections(tmp_path):
    first = RunDatabase(str(tmp_path / "a.db"))
    second = RunDatabase(str(tmp_path / "b.db"))
    first.start_run("bands", 0, {})
    assert second.list_runs() == []
    assert len(first.list_runs("bands")) == 1
    assert first.list_runs("dos") == []
    first.close()
    second.close()
