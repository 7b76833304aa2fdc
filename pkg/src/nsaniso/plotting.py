"""Figures for experiment reports, rendered off-screen to PNG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from nsaniso.io import Report  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _positive(values) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    return np.where(a > 0, a, np.nan)


def plot_ledger(ledger, path: Path, title: str = "") -> Path:
    t = ledger["t"]
    fig, (ax, bx) = plt.subplots(1, 2, figsize=(10, 4))
    for name in ("L2_sq", "d3_sq", "gradh_sq", "d33_sq"):
        ax.semilogy(t, _positive(ledger[name]), label=name)
    ax.set_xlabel("t")
    ax.legend()
    ax.set_title(title or "energy ledger")
    balance = ledger["L2_sq"] + ledger["diss_scheme"] + ledger["num_diss"] + ledger["adv_work"]
    bx.plot(t, balance - balance[0])
    bx.set_xlabel("t")
    bx.set_title("energy balance drift")
    return _save(fig, path)


def plot_eps_sweep(report: Report, path: Path) -> Path:
    table = report.tables["cauchy"]
    rows = [r for r in table.rows if r[8] and not r[9]]
    d_eps = np.array([r[2] for r in rows])
    gaps = np.array([r[3] for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(d_eps, gaps, "o-", label="sup gap")
    if gaps.size:
        ax.loglog(d_eps, gaps[0] * d_eps / d_eps[0], "k--", label="first order")
    ax.set_xlabel("eps_m - eps_k")
    ax.set_ylabel("sup_t ||u_m - u_k||")
    ax.legend()
    return _save(fig, path)


def plot_smallness(report: Report, path: Path) -> Path:
    table = report.tables["classification"]
    h01 = np.array(table.column("H01"), dtype=float)
    ratio = np.array(table.column("sup_H01_ratio"), dtype=float)
    thm1 = np.array(table.column("thm1"), dtype=bool)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogx(h01[thm1], ratio[thm1], "o", label="small (first criterion)")
    ax.semilogx(h01[~thm1], ratio[~thm1], "x", label="not small")
    ax.axhline(1.0, color="k", lw=0.5)
    ax.set_xlabel("||u0||_H01")
    ax.set_ylabel("sup ||u||_H01 / ||u0||_H01")
    ax.legend()
    return _save(fig, path)


def plot_density(report: Report, path: Path) -> Path:
    table = report.tables["density"]
    lam = np.array(table.column("lam"), dtype=float)
    err = np.array(table.column("error_H01"), dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(lam - 1.0, _positive(err), "o-")
    ax.invert_xaxis()
    ax.set_xlabel("lambda - 1")
    ax.set_ylabel("H01 error")
    return _save(fig, path)


def plot_local(report: Report, path: Path) -> Path:
    table = report.tables["k0_selection"]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(table.column("k"), _positive(table.column("tail_L2_sq")), "o-", label="tail energy")
    if table.rows:
        ax.axhline(table.rows[0][2], color="k", ls="--", label="threshold")
    ax.set_xlabel("k")
    ax.legend()
    return _save(fig, path)


def plot_constants(report: Report, path: Path) -> Path:
    table = report.tables["samples"]
    fig, ax = plt.subplots(figsize=(5, 4))
    for name in ("ratio1_coarse", "ratio2_coarse", "ratio1_fine", "ratio2_fine"):
        vals = np.array(table.column(name), dtype=float)
        ax.hist(vals[np.isfinite(vals)], bins=40, histtype="step", label=name)
    ax.set_xlabel("sample ratio")
    ax.legend()
    return _save(fig, path)


SUMMARY_PLOTS = {
    "eps-sweep": ("gap_order.png", plot_eps_sweep),
    "smallness-sweep": ("classification.png", plot_smallness),
    "density-demo": ("density.png", plot_density),
    "local-existence": ("k0_selection.png", plot_local),
    "constants": ("constant_samples.png", plot_constants),
}


def render_report(report: Report, out_dir) -> list[Path]:
    """Write the experiment's figures next to its CSV files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, ledger in sorted(report.ledgers.items()):
        if len(ledger):
            paths.append(plot_ledger(ledger, out / f"{name}.png", name))
    if report.experiment in SUMMARY_PLOTS:
        fname, fn = SUMMARY_PLOTS[report.experiment]
        paths.append(fn(report, out / fname))
    return paths
