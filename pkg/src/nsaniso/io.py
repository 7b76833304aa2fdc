"""Writing run artifacts: CSV tables, ledgers, check rows, snapshots and the manifest."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nsaniso import __version__
from nsaniso.fields import write_snapshot
from nsaniso.ledger import EnergyLedger

CHECK_HEADER = ("name", "inputs_hash", "passed", "margin")


@dataclass
class Table:
    header: tuple
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} values, header has {len(self.header)}")
        self.rows.append(values)

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]


@dataclass
class Report:
    """Everything an experiment produces; written by :func:`write_outputs`."""

    experiment: str
    tables: dict = field(default_factory=dict)
    ledgers: dict = field(default_factory=dict)
    snapshots: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        """0 if every check passed, else the 1-based index of the first failing check."""
        for i, c in enumerate(self.checks, start=1):
            if not c.passed:
                return i
        return 0


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_table(table: Table, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_checks(checks, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CHECK_HEADER)
        for c in checks:
            w.writerow(c.row())
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def write_outputs(report: Report, out_dir, config_echo: dict | None = None) -> list[Path]:
    """Write every artifact of ``report`` into ``out_dir`` and return the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    for name, table in sorted(report.tables.items()):
        written.append(write_table(table, out / f"{name}.csv"))
    for name, ledger in sorted(report.ledgers.items()):
        written.append(ledger.to_csv(out / f"{name}.csv"))
    for name, field_ in sorted(report.snapshots.items()):
        written.append(write_snapshot(out / f"{name}.snap", field_))
    written.append(write_checks(report.checks, out / "checks.csv"))
    manifest = {
        "experiment": report.experiment,
        "version": f"nsaniso {__version__}",
        "config": config_echo or {},
        "constants": report.constants,
        "summary": report.summary,
        "checks": [{"name": c.name, "passed": bool(c.passed), "margin": c.margin} for c in report.checks],
        "files": sorted(p.name for p in written),
        "exit_code": report.exit_code,
    }
    mpath = out / "manifest.json"
    with open(mpath, "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(mpath)
    return written


def read_table(path) -> Table:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        return Table(header, [tuple(r) for r in reader])


def empty_ledger_csv(path) -> Path:
    return EnergyLedger().to_csv(path)
