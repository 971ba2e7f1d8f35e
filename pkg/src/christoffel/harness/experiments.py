"""Named experiments: each turns a parameter grid into per-point records and a summary."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import comb, pi

import numpy as np

from ..constructions.boxmaps import corner_map_3d, parallelogram_2d
from ..constructions.needles import bound_rhs, needle_certificate
from ..constructions.sharpness import roundtrip_2d, sharpness_body_2d, sharpness_body_nd
from ..errors import ParamOutOfRange, UnknownExperiment
from ..geometry.bodies import Ball, HalfBall3, LpBall
from ..geometry.measure import exit_distance, measure
from ..kernel import christoffel_1d, christoffel_values
from .presets import parse_body
from .report import ExperimentReport, fit_slope, ratio_spread


@dataclass(frozen=True)
class Param:
    default: object
    kind: type = float
    many: bool = True
    lo: float = -np.inf
    hi: float = np.inf

    def parse(self, name, value):
        if isinstance(value, str):
            if self.kind is str:
                items = [v for v in value.split(",") if v]
            else:
                try:
                    items = [self.kind(float(v)) if self.kind is int else self.kind(v) for v in value.split(",")]
                except ValueError as exc:
                    raise ParamOutOfRange(f"{name}: cannot parse {value!r}") from exc
        else:
            items = list(value) if isinstance(value, (list, tuple, np.ndarray)) else [value]
            items = [v if self.kind is str else self.kind(v) for v in items]
        if not items or (not self.many and len(items) != 1):
            raise ParamOutOfRange(f"{name} takes {'a list' if self.many else 'one value'}")
        if self.kind is not str and any(not (self.lo <= v <= self.hi) for v in items):
            raise ParamOutOfRange(f"{name} must lie in [{self.lo}, {self.hi}], got {items}")
        return items if self.many else items[0]


@dataclass(frozen=True)
class Experiment:
    name: str
    run: object
    params: dict
    plot: dict = field(default_factory=dict)
    doc: str = ""


REGISTRY: dict = {}


def experiment(name, plot=None, **params):
    def wrap(fn):
        REGISTRY[name] = Experiment(name, fn, params, plot or {}, (fn.__doc__ or "").strip())
        return fn
    return wrap


def run_experiment(name: str, params: dict | None = None) -> ExperimentReport:
    """Run a registered experiment; ``params`` may hold strings such as ``"8,12,16"``."""
    if name not in REGISTRY:
        raise UnknownExperiment(f"{name!r}; known: {', '.join(sorted(REGISTRY))}")
    exp = REGISTRY[name]
    params = dict(params or {})
    unknown = set(params) - set(exp.params)
    if unknown:
        raise ParamOutOfRange(f"unknown parameters {sorted(unknown)} for {name}")
    resolved = {k: p.parse(k, params.get(k, p.default)) for k, p in exp.params.items()}
    t0 = time.perf_counter()
    records = exp.run(**resolved)
    summary = summarize(name, records, resolved)
    return ExperimentReport(name, resolved, records, summary, time.perf_counter() - t0, exp.plot)


def summarize(name: str, records: list, params: dict) -> dict:
    """Summary statistics computed from the records alone (plus the resolved parameters)."""
    return SUMMARIES[name](records, params)


def _lam(body, n, X):
    return christoffel_values(body, n, np.atleast_2d(X))


def boundary_point(body, theta):
    e = np.array([np.cos(theta), np.sin(theta)])
    return exit_distance(body, np.zeros(2), e) * e


def default_deltas(n_max, k=5):
    return np.geomspace(4.0 / n_max ** 2, 0.3, k).round(6).tolist()


# ---------------------------------------------------------------- experiments


@experiment("interval-oracle", {"x": "n", "y": "rel_err", "loglog": False},
            n=Param(list(range(1, 41)), int, lo=0, hi=60), points=Param(11, int, False, 1, 1000))
def interval_oracle(n, points):
    """Gram path on [-1, 1] against the Legendre closed form at Chebyshev points."""
    body = Ball.unit(1)
    xs = np.cos((2 * np.arange(points) + 1) * pi / (2 * points))
    out = []
    for m in n:
        lam = _lam(body, m, xs[:, None])
        exact = christoffel_1d(m, xs)
        for x, a, b in zip(xs, lam, exact):
            out.append({"n": m, "x": [float(x)], "body": body.to_dict(), "lambda": float(a), "lambda_closed": float(b),
                        "rel_err": abs(a - b) / b})
    return out


@experiment("disc-center", {"x": "n", "y": "deviation", "loglog": True},
            n=Param([4, 8, 12, 16, 20, 24, 28, 32], int, lo=1, hi=32))
def disc_center(n):
    """lambda_n(B^2, 0) C(n+2, 2) against its limit 2 pi."""
    body = Ball.unit(2)
    out = []
    for m in n:
        lam = float(_lam(body, m, [0.0, 0.0])[0])
        scaled = lam * comb(m + 2, 2)
        out.append({"n": m, "x": [0.0, 0.0], "body": body.to_dict(), "lambda": lam, "scaled": scaled,
                    "deviation": abs(scaled - 2 * pi) / (2 * pi)})
    return out


def _edge_records(body, n, deltas, point_of):
    out = []
    for m in n:
        X = np.array([point_of(d) for d in deltas])
        lam = _lam(body, m, X)
        for d, x, v in zip(deltas, X, lam):
            out.append({"n": m, "delta": d, "x": x.tolist(), "body": body.to_dict(), "lambda": float(v),
                        "ratio": float(v) * m ** 2 / np.sqrt(d)})
    return out


@experiment("disc-edge", {"x": "n", "y": "ratio", "series": "delta"},
            n=Param([8, 12, 16, 20, 24], int, lo=1, hi=32), delta=Param(default_deltas(24), lo=1e-6, hi=1.0))
def disc_edge(n, delta):
    """lambda_n(B^2, (1 - delta, 0)) n^2 / sqrt(delta)."""
    return _edge_records(Ball.unit(2), n, delta, lambda d: [1.0 - d, 0.0])


@experiment("lp-exponent", {"x": "delta", "y": "lambda", "loglog": True, "fit": True, "slice": "alpha"},
            alpha=Param([1.2, 1.5, 2.0], lo=1.0, hi=50.0), n=Param(20, int, False, 1, 32),
            delta=Param(np.geomspace(0.02, 0.3, 8).round(6).tolist(), lo=1e-6, hi=0.99))
def lp_exponent(alpha, n, delta):
    """log lambda_n(B^2_alpha, (1 - delta, 0)) against log delta at fixed n."""
    out = []
    for a in alpha:
        for r in _edge_records(LpBall(a), [n], delta, lambda d: [1.0 - d, 0.0]):
            out.append(dict(r, alpha=a))
    return out


@experiment("lp-diagonal", {"x": "n", "y": "ratio", "series": "delta", "slice": "alpha"},
            alpha=Param([1.5], lo=1.0, hi=50.0), n=Param([8, 12, 16, 20, 24], int, lo=1, hi=32),
            delta=Param(default_deltas(24), lo=1e-6, hi=0.99))
def lp_diagonal(alpha, n, delta):
    """lambda_n(B^2_alpha, (1 - delta) x0) n^2 / sqrt(delta) with x0 on the diagonal of the boundary."""
    out = []
    for a in alpha:
        x0 = np.full(2, 2.0 ** (-1.0 / a))
        for r in _edge_records(LpBall(a), n, delta, lambda d: (1.0 - d) * x0):
            out.append(dict(r, alpha=a))
    return out


@experiment("halfball-rim-step", {"x": "n", "y": "ratio", "series": "mu"},
            mu=Param([0.05, 0.1, 0.2], lo=1e-4, hi=0.5), n=Param([6, 8, 10, 12, 14], int, lo=1, hi=14))
def halfball_rim_step(mu, n):
    """lambda_n(B^3_+, (1 - mu, 0, mu / 4)) n^3 / mu near the rim of the flat face."""
    body = HalfBall3()
    out = []
    for m in n:
        X = np.array([[1.0 - u, 0.0, u / 4] for u in mu])
        for u, x, v in zip(mu, X, _lam(body, m, X)):
            out.append({"n": m, "mu": u, "x": x.tolist(), "body": body.to_dict(), "lambda": float(v), "ratio": float(v) * m ** 3 / u})
    return out


@experiment("boundary-step", {"x": "n", "y": "ratio", "slice": "body_index"},
            bodies=Param(["disc", "square"], str), n=Param([8, 16, 24], int, lo=1, hi=32),
            angles=Param(8, int, False, 1, 256), band=Param([0.2, 4.1], lo=0.0))
def boundary_step(bodies, n, angles, band):
    """lambda_n(D, mu x) / lambda_n(D, x) for boundary points x and mu = 1 - c(d) n^-2."""
    out = []
    for i, name in enumerate(bodies):
        body, _ = parse_body(name)
        c = 2.0 ** (-3 - body.dim / 2)
        X = np.array([boundary_point(body, 2 * pi * k / angles) for k in range(angles)])
        for m in n:
            mu = 1.0 - c * m ** -2
            lam, lam_in = _lam(body, m, X), _lam(body, m, mu * X)
            for x, a, b in zip(X, lam, lam_in):
                out.append({"body_index": i, "body": name, "n": m, "x": x.tolist(), "mu": mu,
                            "lambda": float(a), "lambda_inner": float(b), "ratio": float(b / a)})
    return out


def sharpness_2d_grid(deltas):
    """``(delta, l1, l2)`` triples: chords at 12 delta, 0.09 and their geometric mean."""
    out = []
    for d in deltas:
        ls = [12 * d, float(np.sqrt(12 * d * 0.09)), 0.09]
        out += [(d, a, b) for a in ls for b in ls]
    return out


@experiment("sharpness-2d", {"x": "n", "y": "ratio", "series": "delta"},
            delta=Param([0.0003, 0.001, 0.004], lo=1e-6, hi=0.0074), n=Param([10, 16, 22], int, lo=1, hi=32),
            sigma=Param(0.02, float, False, 0.0, 10.0))
def sharpness_2d(delta, n, sigma):
    """Builder bodies against n^-2 sqrt(min(l1 l2, delta))."""
    out = []
    for d, l1, l2 in sharpness_2d_grid(delta):
        body, x = sharpness_body_2d(d, l1, l2)
        err = roundtrip_2d(body, x, d, l1, l2)
        meas = measure(body, x, [1.0, 0.0])
        for m in n:
            lam = float(_lam(body, m, x)[0])
            rhs = bound_rhs(meas, m, 2, sigma)
            out.append({"delta": d, "l1": l1, "l2": l2, "n": m, "x": x.tolist(), "body": body.to_dict(),
                        "lambda": lam, "bound_rhs": rhs, "ratio": lam / rhs, "roundtrip_err": err})
    return out


SHARP_3D = ([0.05, 0.02, 0.1, 0.03, 0.01, 0.08], [0.5, 1.2, 0.9, 0.2, 0.05, 1.5])


@experiment("sharpness-3d", {"x": "n", "y": "ratio", "series": "delta"},
            delta=Param(SHARP_3D[0], lo=1e-6, hi=0.5), v=Param(SHARP_3D[1], lo=1e-9, hi=pi / 2),
            n=Param([8, 12], int, lo=1, hi=14), sigma=Param(0.5, float, False, 0.0, 10.0))
def sharpness_3d(delta, v, n, sigma):
    """Solids of revolution against n^-3 min(sqrt(delta), v / sqrt(delta)); delta and v are paired."""
    if len(delta) != len(v):
        raise ParamOutOfRange("delta and v are paired and need equal lengths")
    out = []
    for d, vol in zip(delta, v):
        body, x = sharpness_body_nd(d, vol, 3)
        meas = measure(body, x, [1.0, 0.0, 0.0])
        err = max(abs(meas.delta - d), abs(meas.section_volume - vol) / vol, abs(meas.dist_boundary - d))
        for m in n:
            lam = float(_lam(body, m, x)[0])
            rhs = bound_rhs(meas, m, 3, sigma)
            out.append({"delta": d, "v": vol, "n": m, "x": x.tolist(), "body": body.to_dict(),
                        "lambda": lam, "bound_rhs": rhs, "ratio": lam / rhs, "roundtrip_err": err})
    return out


@experiment("certify-vs-truth", {"x": "n", "y": "gap", "slice": "body_index"},
            bodies=Param(["disc", "square", "lpball:1.5", "lpball:4"], str),
            angles=Param([0.3, 1.0], lo=-10.0, hi=10.0), depth=Param([0.03, 0.1, 0.25], lo=1e-4, hi=0.9),
            n=Param([8, 16], int, lo=2, hi=32), n3=Param([6, 9], int, lo=3, hi=14),
            tol=Param(1e-9, float, False, 0.0, 1.0))
def certify_vs_truth(bodies, angles, depth, n, n3, tol):
    """Needle certificates against the Gram value; 2D presets on a grid plus half-ball points."""
    out = []

    def record(i, name, body, x, m, bm, meas):
        cert = needle_certificate(body, m, bm)
        lam = float(_lam(body, m, x)[0])
        c = cert.l2sq.value
        rec = {"body_index": i, "body": name, "n": m, "x": np.asarray(x).tolist(), "kind": bm.kind,
               "lambda": lam, "certificate": c, "certificate_err": cert.l2sq.abs_error_bound,
               "bound": cert.bound, "gap": c / lam, "delta": meas.delta,
               "chain_ok": bool(lam <= c + tol and c <= cert.bound + tol)}
        if body.dim == 2:
            rec.update(l1=meas.l1, l2=meas.l2,
                       ratio=c * m ** 2 / np.sqrt(min(meas.l1 * meas.l2, meas.delta)))
        out.append(rec)

    for i, name in enumerate(bodies):
        body, _ = parse_body(name)
        for th in angles:
            p = boundary_point(body, th)
            for dp in depth:
                x = (1.0 - dp) * p
                meas = measure(body, x)
                bm = parallelogram_2d(body, x, meas.u)
                for m in n:
                    record(i, name, body, x, m, bm, meas)
    if n3:
        body = HalfBall3()
        for x in ([0.9, 0.0, 0.025], [0.0, 0.0, 0.9], [0.3, 0.4, 0.05]):
            x = np.array(x)
            meas = measure(body, x)
            bm = corner_map_3d(body, x, meas.u)
            for m in n3:
                record(len(bodies), "halfball3", body, x, m, bm, meas)
    return out


@experiment("conjecture-lp", {"x": "n", "y": "ratio", "series": "delta", "slice": "alpha"},
            alpha=Param([1.5, 4.0], lo=1.0, hi=50.0), n=Param([8, 16, 24], int, lo=1, hi=32),
            angles=Param([0.15, 0.45, pi / 4], lo=-10.0, hi=10.0), delta=Param([0.02, 0.05, 0.1], lo=1e-6, hi=0.9))
def conjecture_lp(alpha, n, angles, delta):
    """Exploratory: lambda_n(B^2_alpha, x) n^2 / sqrt(l1 l2) off the axes (nothing asserted)."""
    out = []
    for a in alpha:
        body = LpBall(a)
        for th in angles:
            p = boundary_point(body, th)
            for d in delta:
                x = (1.0 - d) * p
                meas = measure(body, x)
                for m in n:
                    lam = float(_lam(body, m, x)[0])
                    out.append({"alpha": a, "theta": th, "delta": d, "n": m, "x": x.tolist(),
                                "body": body.to_dict(), "lambda": lam,
                                "dist": meas.delta, "l1": meas.l1, "l2": meas.l2,
                                "ratio": lam * m ** 2 / np.sqrt(meas.l1 * meas.l2)})
    return out


# ---------------------------------------------------------------- summaries


def _by(records, key):
    groups = {}
    for r in records:
        groups.setdefault(r[key], []).append(r)
    return groups


def _ratio_summary(records, params):
    s = ratio_spread([r["ratio"] for r in records])
    return dict(s, violations=0)


def _interval(records, params):
    err = max(r["rel_err"] for r in records)
    return {"max_rel_err": err, "violations": sum(r["rel_err"] > 1e-10 for r in records)}


def _disc_center(records, params):
    rs = sorted(records, key=lambda r: r["n"])
    dev = [r["deviation"] for r in rs]
    decreasing = all(b < a for a, b in zip(dev, dev[1:]))
    return {"deviations": dev, "decreasing": decreasing, "final_deviation": dev[-1],
            "violations": 0 if decreasing else 1}


def _lp_exponent(records, params):
    fits = {}
    for a, rs in _by(records, "alpha").items():
        f = fit_slope([r["delta"] for r in rs], [r["lambda"] for r in rs])
        fits[str(a)] = dict(f, target=1.0 / a, error=abs(f["slope"] - 1.0 / a))
    return {"fits": fits, "violations": 0}


def _per_slice(key):
    def summary(records, params):
        out = _ratio_summary(records, params)
        out["by_" + key] = {str(k): ratio_spread([r["ratio"] for r in rs]) for k, rs in _by(records, key).items()}
        return out
    return summary


def _boundary_step(records, params):
    lo, hi = params["band"]
    out = _ratio_summary(records, params)
    out["violations"] = sum(not (lo <= r["ratio"] <= hi) for r in records)
    return out


def _sharp(records, params):
    out = _ratio_summary(records, params)
    out["max_roundtrip_err"] = max(r["roundtrip_err"] for r in records)
    out["violations"] = int(out["max_roundtrip_err"] > 1e-6)
    return out


def _certify(records, params):
    flat = [r for r in records if "ratio" in r]
    out = {"cases": len(records), "chain_failures": sum(not r["chain_ok"] for r in records),
           "gap": ratio_spread([r["gap"] for r in records])}
    if flat:
        out["ratio_2d"] = ratio_spread([r["ratio"] for r in flat])
    out["violations"] = out["chain_failures"]
    return out


SUMMARIES = {
    "interval-oracle": _interval,
    "disc-center": _disc_center,
    "disc-edge": _per_slice("delta"),
    "lp-exponent": _lp_exponent,
    "lp-diagonal": _per_slice("delta"),
    "halfball-rim-step": _per_slice("mu"),
    "boundary-step": _boundary_step,
    "sharpness-2d": _sharp,
    "sharpness-3d": _sharp,
    "certify-vs-truth": _certify,
    "conjecture-lp": _per_slice("alpha"),
}
