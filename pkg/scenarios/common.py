# Python module: common.py

# Import the required libraries
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from core.util.utils import sha256_file, spawn_rngs, write_csv, write_json

logger = logging.getLogger(__name__)

# Sub-stream count for RunContext.rng; streams are addressed by index.
RNG_STREAMS = 16


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class ScenarioResult:
    """Checks and summary values produced by one subcommand."""

    subcommand: str
    checks: List[Check] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def check(self, name: str, passed: bool, detail: Optional[Dict[str, Any]] = None, **extra: Any) -> bool:
        passed = bool(passed)
        self.checks.append(Check(name, passed, {**(detail or {}), **extra}))
        (logger.info if passed else logger.warning)("Check %-28s %s", name, "passed" if passed else "FAILED")
        return passed

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary,
        }


@dataclass
class RunContext:
    """Output directory, seed and worker count shared by a scenario's steps.

    Every file written through the context is recorded for the run ledger.
    """

    out_dir: str
    seed: int
    threads: int = 1
    artifacts: List[Dict[str, str]] = field(default_factory=list)
    _rngs: Optional[List[np.random.Generator]] = field(default=None, repr=False)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def rng(self, stream: int = 0) -> np.random.Generator:
        if self._rngs is None:
            self._rngs = spawn_rngs(self.seed, RNG_STREAMS)
        return self._rngs[stream]

    def _record(self, path: str, kind: str) -> str:
        self.artifacts.append(
            {"path": os.path.relpath(path, self.out_dir), "kind": kind, "sha256": sha256_file(path)}
        )
        return path

    def write_csv(self, name: str, header: Sequence[str], rows, metadata: Optional[Dict[str, Any]] = None) -> str:
        return self._record(write_csv(self.path(name), header, rows, metadata), "csv")

    def write_json(self, name: str, payload: Any, kind: str = "json") -> str:
        return self._record(write_json(self.path(name), payload), kind)

    def add_file(self, path: str, kind: str) -> str:
        return self._record(path, kind)
