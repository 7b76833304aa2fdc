"""Per-step record of the norms and dissipation integrals of a run."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from nsaniso import fields as fl
from nsaniso.fields import VectorField

STATE_COLUMNS = ("L2_sq", "d3_sq", "d33_sq", "gradh_sq", "gradh_d3_sq", "gradh_d33_sq")
INTEGRAL_COLUMNS = ("int_gradh_sq", "int_gradh_d3_sq", "int_gradh_d33_sq", "int_d3_sq")
#: scheme-consistent energy terms, accumulated so that
#: ``L2_sq + diss_scheme + num_diss + adv_work == L2_sq[0]`` holds for the scheme
BALANCE_COLUMNS = ("diss_scheme", "num_diss", "adv_work")
EXTRA_COLUMNS = ("adv_residual", "H01", "div_max")
COLUMNS = ("t",) + STATE_COLUMNS + INTEGRAL_COLUMNS + BALANCE_COLUMNS + EXTRA_COLUMNS

_STATE_FNS = {
    "L2_sq": fl.l2_sq,
    "d3_sq": fl.d3_sq,
    "d33_sq": fl.d33_sq,
    "gradh_sq": fl.gradh_sq,
    "gradh_d3_sq": fl.gradh_d3_sq,
    "gradh_d33_sq": fl.gradh_d33_sq,
}
_INTEGRANDS = {
    "int_gradh_sq": "gradh_sq",
    "int_gradh_d3_sq": "gradh_d3_sq",
    "int_gradh_d33_sq": "gradh_d33_sq",
    "int_d3_sq": "d3_sq",
}


def state_norms(u: VectorField) -> dict:
    return {name: fn(u) for name, fn in _STATE_FNS.items()}


class EnergyLedger:
    """Append-only table of ledger rows, one per accepted step plus the initial state."""

    def __init__(self):
        self._rows: list[tuple] = []

    def __len__(self):
        return len(self._rows)

    def append_state(self, t: float, u: VectorField, adv_residual: float = 0.0, div_max: float = 0.0,
                     diss: float = 0.0, num: float = 0.0, adv: float = 0.0) -> dict:
        """Record the state ``u`` at time ``t`` and the scheme increments of the step reaching it."""
        row = {"t": float(t)}
        row.update(state_norms(u))
        if self._rows:
            prev = self.last()
            if not t > prev["t"]:
                raise ValueError("ledger times must increase strictly")
            h = t - prev["t"]
            for name, src in _INTEGRANDS.items():
                row[name] = prev[name] + 0.5 * h * (prev[src] + row[src])
            row["diss_scheme"] = prev["diss_scheme"] + diss
            row["num_diss"] = prev["num_diss"] + num
            row["adv_work"] = prev["adv_work"] + adv
        else:
            for name in INTEGRAL_COLUMNS + BALANCE_COLUMNS:
                row[name] = 0.0
        row["adv_residual"] = float(adv_residual)
        row["H01"] = float(np.sqrt(row["L2_sq"] + row["d3_sq"]))
        row["div_max"] = float(div_max)
        self._rows.append(tuple(row[c] for c in COLUMNS))
        return row

    def last(self) -> dict:
        return dict(zip(COLUMNS, self._rows[-1]))

    def as_array(self) -> np.ndarray:
        if not self._rows:
            return np.zeros((0, len(COLUMNS)))
        return np.asarray(self._rows, dtype=float)

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS:
            raise KeyError(name)
        return self.as_array()[:, COLUMNS.index(name)] if self._rows else np.zeros(0)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.column(name)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(COLUMNS)
            for row in self._rows:
                writer.writerow([repr(float(v)) for v in row])
        return path

    @classmethod
    def from_csv(cls, path) -> "EnergyLedger":
        led = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != COLUMNS:
                raise ValueError(f"{path}: unexpected ledger header")
            for row in reader:
                led._rows.append(tuple(float(v) for v in row))
        return led
