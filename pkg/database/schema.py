# Python module: schema.py

# Import the required libraries
import json
import sqlite3
import threading
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence

from core.util.utils import to_jsonable


class RunDatabase:
    """
    A class to manage the SQLite ledger of experiment runs, their artifacts and checks.

    The ledger is the only output carrying wall-clock timestamps; result files
    themselves stay bit-reproducible.
    """

    def __init__(self, db_path: str = "runs.db"):
        """
        Initialize the RunDatabase instance and create the required tables.

        Args:
            db_path (str): Path to the SQLite database file. Defaults to "runs.db".
        """
        self.db_path = db_path
        self._local = threading.local()
        self._init_db()

    def _get_conn(self):
        """Get thread-local database connection."""
        if not hasattr(self._local, "conn"):
            self._local.conn = sqlite3.connect(self.db_path)
        return self._local.conn

    def _init_db(self):
        """Initialize the database schema."""
        conn = self._get_conn()
        conn.execute(
            """CREATE TABLE IF NOT EXISTS runs (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            subcommand TEXT NOT NULL,
            seed TEXT NOT NULL,
            manifest TEXT NOT NULL,
            started TEXT NOT NULL,
            finished TEXT,
            exit_code INTEGER
        )"""
        )
        conn.execute(
            """
            CREATE TABLE IF NOT EXISTS artifacts (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id INTEGER NOT NULL,
                path TEXT NOT NULL,
                kind TEXT NOT NULL,
                sha256 TEXT NOT NULL,
                FOREIGN KEY (run_id) REFERENCES runs (id)
            )
        """
        )
        conn.execute(
            """
            CREATE TABLE IF NOT EXISTS checks (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id INTEGER NOT NULL,
                name TEXT NOT NULL,
                passed INTEGER NOT NULL,
                detail TEXT,
                FOREIGN KEY (run_id) REFERENCES runs (id)
            )
        """
        )
        conn.commit()

    @staticmethod
    def _now() -> str:
        return datetime.now(timezone.utc).isoformat()

    def start_run(self, subcommand: str, seed: int, manifest: Dict) -> int:
        """
        Register a new run.

        Args:
            subcommand (str): The subcommand being executed.
            seed (int): The 64-bit run seed (stored as text, SQLite integers are signed).
            manifest (Dict): The resolved configuration manifest.

        Returns:
            int: The ID of the newly inserted run.
        """
        conn = self._get_conn()
        cursor = conn.cursor()
        sql = """INSERT INTO runs (subcommand, seed, manifest, started) VALUES (?, ?, ?, ?)"""
        cursor.execute(sql, (subcommand, str(seed), json.dumps(to_jsonable(manifest), sort_keys=True), self._now()))
        conn.commit()
        return cursor.lastrowid

    def add_artifacts(self, run_id: int, artifacts: Sequence[Dict]):
        """
        Record the files a run produced.

        Args:
            run_id (int): The ID of the run.
            artifacts (List[Dict]): A list of dictionaries, each containing:
                - path (str): Path of the file relative to the output directory.
                - kind (str): Artifact kind ("csv", "json", "dat", "stage").
                - sha256 (str): Hex digest of the file content.
        """
        sql = """INSERT INTO artifacts (run_id, path, kind, sha256) VALUES (?, ?, ?, ?)"""
        values = [(run_id, a["path"], a["kind"], a["sha256"]) for a in artifacts]
        with self._get_conn() as conn:
            conn.executemany(sql, values)

    def add_checks(self, run_id: int, checks: Sequence[Dict]):
        """
        Record the outcome of each check.

        Args:
            run_id (int): The ID of the run.
            checks (List[Dict]): A list of dictionaries with ``name``, ``passed``
                and an optional ``detail`` payload (stored as JSON).
        """
        sql = """INSERT INTO checks (run_id, name, passed, detail) VALUES (?, ?, ?, ?)"""
        values = [
            (run_id, c["name"], int(bool(c["passed"])), json.dumps(to_jsonable(c.get("detail")), sort_keys=True))
            for c in checks
        ]
        with self._get_conn() as conn:
            conn.executemany(sql, values)

    def finish_run(self, run_id: int, exit_code: int):
        """Stamp the finish time and exit code of a run."""
        sql = """UPDATE runs SET finished = ?, exit_code = ? WHERE id = ?"""
        with self._get_conn() as conn:
            conn.execute(sql, (self._now(), int(exit_code), run_id))

    def get_run(self, run_id: int) -> Optional[Dict]:
        """Read a single run by ID"""
        cursor = self._get_conn().execute("""SELECT * FROM runs WHERE id = ?""", (run_id,))
        row = cursor.fetchone()
        return self._row_to_dict(row, cursor.description) if row else None

    def get_artifacts(self, run_id: int) -> List[Dict]:
        cursor = self._get_conn().execute("""SELECT * FROM artifacts WHERE run_id = ? ORDER BY id""", (run_id,))
        return [self._row_to_dict(row, cursor.description) for row in cursor.fetchall()]

    def get_checks(self, run_id: int, failed_only: bool = False) -> List[Dict]:
        """
        Retrieve the checks of a run.

        Args:
            run_id (int): The ID of the run.
            failed_only (bool): Only return failing checks. Defaults to False.

        Returns:
            List[Dict]: Checks with ``passed`` as bool and ``detail`` decoded.
        """
        sql = """SELECT * FROM checks WHERE run_id = ?""" + (" AND passed = 0" if failed_only else "") + " ORDER BY id"
        cursor = self._get_conn().execute(sql, (run_id,))
        rows = [self._row_to_dict(row, cursor.description) for row in cursor.fetchall()]
        for row in rows:
            row["passed"] = bool(row["passed"])
            row["detail"] = json.loads(row["detail"]) if row["detail"] else None
        return rows

    def list_runs(self, subcommand: Optional[str] = None) -> List[Dict]:
        if subcommand is None:
            cursor = self._get_conn().execute("""SELECT * FROM runs ORDER BY id""")
        else:
            cursor = self._get_conn().execute("""SELECT * FROM runs WHERE subcommand = ? ORDER BY id""", (subcommand,))
        return [self._row_to_dict(row, cursor.description) for row in cursor.fetchall()]

    def close(self):
        """
        Close the database connection.
        """
        if hasattr(self._local, "conn"):
            self._local.conn.close()
            del self._local.conn

    def _row_to_dict(self, row, description):
        """Convert SQLite row to dictionary"""
        if row is None:
            return None
        return {description[i][0]: value for i, value in enumerate(row)}
