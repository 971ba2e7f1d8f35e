"""Experiment reports and their CSV / JSON / SVG renderings."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

FORMATS = ("csv", "json", "svg")


@dataclass
class ExperimentReport:
    name: str
    params: dict
    records: list
    summary: dict
    runtime: float
    plot: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(data["name"], data["params"], data["records"], data["summary"], data["runtime"],
                   data.get("plot", {}))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))


def _plain(obj):
    """JSON-ready copy: numpy scalars and arrays become Python numbers and lists."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def fit_slope(x, y) -> dict:
    """Least-squares slope of ``log y`` against ``log x`` with its standard error."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if lx.size < 3:
        raise ValueError("need at least three points for a slope with an error bar")
    fit = stats.linregress(lx, ly)
    return {"slope": float(fit.slope), "stderr": float(fit.stderr), "intercept": float(fit.intercept),
            "points": int(lx.size)}


def ratio_spread(values) -> dict:
    v = np.asarray(values, float)
    return {"min": float(v.min()), "max": float(v.max()), "max_over_min": float(v.max() / v.min())}


def emit(report: ExperimentReport, fmt: str, out_dir) -> list:
    """Write ``report`` under ``out_dir``; returns the written paths."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out / f"{report.name}.json"
        path.write_text(report.to_json())
        return [path]
    if fmt == "csv":
        return [_write_csv(report, out / f"{report.name}.csv")]
    return _write_svg(report, out)


def _cell(v):
    if isinstance(v, (dict, list, tuple, np.ndarray)):
        return json.dumps(_plain(v))
    return v


def _write_csv(report, path):
    cols = []
    for r in report.records:
        cols += [k for k in r if k not in cols]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in report.records:
            w.writerow({k: _cell(v) for k, v in r.items()})
    return path


def _write_svg(report, out):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    p = report.plot
    xk, yk, sk = p.get("x", "n"), p.get("y", "ratio"), p.get("slice")
    groups = {}
    for r in report.records:
        if r.get(xk) is None or r.get(yk) is None:
            continue
        groups.setdefault(r.get(sk) if sk else None, []).append(r)
    paths = []
    for key, recs in groups.items():
        fig, ax = plt.subplots(figsize=(5, 3.6))
        series = {}
        for r in recs:
            series.setdefault(r.get(p.get("series")) if p.get("series") else None, []).append(r)
        for label, rs in series.items():
            xs = np.array([r[xk] for r in rs], float)
            ys = np.array([r[yk] for r in rs], float)
            order = np.argsort(xs)
            ax.plot(xs[order], ys[order], "o", ms=4, label=None if label is None else f"{p['series']}={label:g}")
            if p.get("fit") and xs.size >= 3:
                f = fit_slope(xs, ys)
                grid = np.geomspace(xs.min(), xs.max(), 50)
                ax.plot(grid, np.exp(f["intercept"]) * grid ** f["slope"], "-", lw=1,
                        label=f"slope {f['slope']:.3f} ± {f['stderr']:.3f}")
        if p.get("loglog", False):
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(xk)
        ax.set_ylabel(p.get("ylabel", yk))
        title = report.name if key is None else f"{report.name}, {sk}={key:g}"
        ax.set_title(title)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=7)
        fig.tight_layout()
        name = report.name if key is None else f"{report.name}_{sk}={key:g}"
        path = out / f"{name}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths
