"""Verification reports: per-check records, suite summaries, JSON export.

Each check record carries a unique id, a self-contained statement of the
claim being verified, the measured value, the tolerance it was held to,
pass/fail status, and the runtime.  The canonical report body (used for
determinism comparisons) excludes wall-clock data: the timestamp and the
per-record runtimes.
"""

from __future__ import annotations

import json
import platform
import sys
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy

from . import __version__


@dataclass(frozen=True)
class CheckRecord:
    id: str
    claim: str
    status: str  # "pass" | "fail"
    value: float
    tolerance: float
    runtime: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "claim": self.claim,
            "status": self.status,
            "value": self.value,
            "tolerance": self.tolerance,
            "runtime": self.runtime,
        }


def toolchain_stamp() -> dict:
    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


@dataclass
class Report:
    suite: str
    records: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    timestamp: float = field(default_factory=time.time)

    @property
    def passed(self) -> bool:
        return all(r.status == "pass" for r in self.records)

    def summary(self) -> dict:
        return {
            "suite": self.suite,
            "n_checks": len(self.records),
            "n_failed": sum(r.status != "pass" for r in self.records),
            "status": "pass" if self.passed else "fail",
        }

    def body(self) -> dict:
        """Deterministic content: everything except wall-clock fields."""
        recs = []
        for r in sorted(self.records, key=lambda r: r.id):
            d = r.to_dict()
            del d["runtime"]
            recs.append(d)
        return {
            "summary": self.summary(),
            "config": self.config,
            "toolchain": toolchain_stamp(),
            "records": recs,
        }

    def body_bytes(self) -> bytes:
        return json.dumps(self.body(), indent=2, sort_keys=True).encode()

    def to_dict(self) -> dict:
        out = self.body()
        out["timestamp"] = self.timestamp
        out["records"] = [r.to_dict() for r in
                          sorted(self.records, key=lambda r: r.id)]
        return out

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


class ReportBuilder:
    """Accumulates check records, enforcing unique ids."""

    def __init__(self, suite: str, config: Optional[dict] = None):
        self.suite = suite
        self.config = dict(config or {})
        self._records: list = []
        self._ids: set = set()

    def check(self, id: str, claim: str, value: float, tolerance: float,
              ok: Optional[bool] = None, runtime: float = 0.0) -> bool:
        """Record a check; by default it passes iff |value| <= tolerance."""
        if id in self._ids:
            raise ValueError(f"duplicate check id: {id}")
        self._ids.add(id)
        if ok is None:
            ok = abs(value) <= tolerance
        self._records.append(CheckRecord(
            id=id, claim=claim, status="pass" if ok else "fail",
            value=float(value), tolerance=float(tolerance),
            runtime=float(runtime)))
        return bool(ok)

    def timed(self, id: str, claim: str, tolerance: float, fn,
              lower_bound: bool = False) -> bool:
        """Run fn() -> value and record it; lower_bound checks
        value >= tolerance instead of |value| <= tolerance."""
        t0 = time.perf_counter()
        value = float(fn())
        dt = time.perf_counter() - t0
        ok = value >= tolerance if lower_bound else abs(value) <= tolerance
        return self.check(id, claim, value, tolerance, ok=ok, runtime=dt)

    def build(self) -> Report:
        return Report(suite=self.suite, records=list(self._records),
                      config=self.config)


def merge_reports(suite: str, reports: Sequence[Report],
                  config: Optional[dict] = None) -> Report:
    records: list = []
    seen: set = set()
    for rep in reports:
        for rec in rep.records:
            if rec.id in seen:
                raise ValueError(f"duplicate check id across suites: {rec.id}")
            seen.add(rec.id)
            records.append(rec)
    cfg = dict(config or {})
    return Report(suite=suite, records=records, config=cfg)


def print_summary(report: Report, stream=None) -> None:
    stream = stream or sys.stdout
    for rec in sorted(report.records, key=lambda r: r.id):
        mark = "PASS" if rec.status == "pass" else "FAIL"
        print(f"[{mark}] {rec.id}: value={rec.value:.3e} "
              f"tol={rec.tolerance:.3e}", file=stream)
    s = report.summary()
    print(f"{s['suite']}: {s['n_checks'] - s['n_failed']}/{s['n_checks']} "
          f"checks passed", file=stream)
