"""Acceptance criteria. Each test prints one PASS/FAIL line; the lines are repeated in the terminal summary."""

from math import pi

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from christoffel.geometry import AffineImage, AffineMap, Ball, LpBall, Polygon2D, exit_distance
from christoffel.harness import run_experiment
from christoffel.kernel import christoffel_eval, christoffel_values
from christoffel.quadrature import body_integral, body_rule, polygon_moment

from conftest import ACCEPTANCE, interior_point, random_polygon

pytestmark = pytest.mark.acceptance


def verdict(number, title, ok, detail):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def test_01_interval_oracle():
    rep = run_experiment("interval-oracle", {"n": ",".join(map(str, range(0, 41))), "points": "11"})
    err = rep.summary["max_rel_err"]
    verdict(1, "interval Gram path vs Legendre closed form", err <= 1e-10, f"max rel err {err:.2e} <= 1e-10")


def test_02_affine_invariance():
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(20_000 + seed)
        poly = random_polygon(rng)
        A = rng.normal(size=(2, 2))
        while abs(np.linalg.det(A)) < 0.2:
            A = rng.normal(size=(2, 2))
        T = AffineMap(A, rng.normal(size=2))
        x = interior_point(poly, rng)
        n = int(rng.integers(1, 11))
        lam = christoffel_eval(poly, n, x).value
        lam_img = christoffel_eval(AffineImage(T, poly), n, T(x[None, :])[0]).value
        worst = max(worst, abs(lam_img - lam * abs(T.det)) / (lam * abs(T.det)))
    verdict(2, "affine invariance, 50 cases", worst <= 1e-8, f"max rel err {worst:.2e} <= 1e-8")


def nested_pair(rng):
    outer = random_polygon(rng)
    c = outer.vertices.mean(axis=0)
    mask = rng.random(len(outer.vertices)) < 0.6
    mask[rng.integers(len(mask))] = False
    keep = outer.vertices[mask]
    shrunk = c + rng.uniform(0.3, 0.95, (len(outer.vertices), 1)) * (outer.vertices - c)
    P = np.vstack([keep, shrunk])
    return Polygon2D(P[ConvexHull(P).vertices]), outer


def test_03_inclusion_monotonicity():
    worst = -np.inf
    for seed in range(20):
        rng = np.random.default_rng(30_000 + seed)
        inner, outer = nested_pair(rng)
        assert np.all(outer.contains(inner.vertices, 1e-12)) and inner.area() < outer.area()
        n = int(rng.integers(1, 13))
        X = np.array([interior_point(inner, rng) for _ in range(5)])
        gap = christoffel_values(inner, n, X) - christoffel_values(outer, n, X)
        worst = max(worst, float(gap.max()))
    verdict(3, "inclusion monotonicity, 20 nested pairs", worst <= 1e-10,
            f"max lambda(D1) - lambda(D2) = {worst:.2e} <= 1e-10")


def star_bodies():
    pentagon = np.array([[np.cos(t), np.sin(t)] for t in 2 * pi * np.arange(5) / 5 + 0.3])
    pentagon = pentagon * np.array([1.3, 0.8]) + np.array([0.35, 0.1])
    return {"disc": Ball.unit(2), "lpball:4": LpBall(4.0), "pentagon": Polygon2D(pentagon)}


def test_04_near_monotonicity():
    worst, cases = -np.inf, 0
    rng = np.random.default_rng(40_000)
    for name, body in star_bodies().items():
        assert body.contains(np.zeros(2))
        dirs = rng.normal(size=(6, 2))
        X = []
        for e in dirs / np.linalg.norm(dirs, axis=1)[:, None]:
            h = exit_distance(body, np.zeros(2), e)
            X += [0.5 * h * e, 0.9 * h * e, 0.995 * h * e]
        X = np.array(X)
        for mu in (0.5, 0.9, 0.99):
            for n in (8, 16):
                lam = christoffel_values(body, n, X)
                lam_mu = christoffel_values(body, n, mu * X)
                worst = max(worst, float(np.max(lam - (mu ** -2 * lam_mu + 1e-10))))
                cases += len(X)
    verdict(4, f"near-monotonicity in mu, {cases} checks", worst <= 0.0,
            f"max lambda(x) - mu^-2 lambda(mu x) - 1e-10 = {worst:.2e} <= 0")


EDGE_GRID = {"n": ",".join(map(str, range(8, 25))), "delta": "0.05,0.1,0.2,0.4"}


def test_05_disc_edge_plateau():
    rep = run_experiment("disc-edge", EDGE_GRID)
    s = rep.summary["max_over_min"]
    verdict(5, "disc edge ratio n^2 lambda / sqrt(delta)", s <= 3, f"max/min {s:.3f} <= 3")


def test_06_disc_center_constant():
    rep = run_experiment("disc-center", {"n": "8,16,24,32"})
    dev = rep.summary["deviations"]
    ok = rep.summary["decreasing"] and dev[-1] <= 0.2
    verdict(6, "disc centre constant vs 2 pi", ok,
            "deviations " + ", ".join(f"{d:.4f}" for d in dev) + " decreasing, last <= 0.2")


def test_07_lp_exponent():
    rep = run_experiment("lp-exponent", {"alpha": "1.2,1.5,2.0", "n": "20"})
    deltas = [r["delta"] for r in rep.records]
    assert min(deltas) == pytest.approx(0.02) and max(deltas) == pytest.approx(0.3)
    fits = rep.summary["fits"]
    ok = all(f["error"] <= 0.15 for f in fits.values())
    detail = ", ".join(f"alpha {a}: slope {f['slope']:.3f} vs {f['target']:.3f}" for a, f in fits.items())
    verdict(7, "l_alpha exponent fit", ok, detail + " (tolerance 0.15)")


def test_08_lp_diagonal_plateau():
    rep = run_experiment("lp-diagonal", dict(EDGE_GRID, alpha="1.5"))
    s = rep.summary["max_over_min"]
    verdict(8, "l_1.5 diagonal ratio", s <= 3, f"max/min {s:.3f} <= 3")


def test_09_halfball_rim():
    rep = run_experiment("halfball-rim-step", {"mu": "0.05,0.1,0.2", "n": ",".join(map(str, range(6, 15)))})
    s = rep.summary["max_over_min"]
    verdict(9, "half-ball rim ratio n^3 lambda / mu", s <= 4, f"max/min {s:.3f} <= 4")


def test_10_certificate_chain():
    rep = run_experiment("certify-vs-truth")
    s = rep.summary
    spread2d = s["ratio_2d"]["max_over_min"]
    ok = s["cases"] >= 30 and s["chain_failures"] == 0 and spread2d <= 10
    verdict(10, "needle certificate chain", ok,
            f"{s['cases']} cases, {s['chain_failures']} chain failures, 2D ratio max/min {spread2d:.3f} <= 10")


def test_11_sharpness_2d():
    rep = run_experiment("sharpness-2d")
    s = rep.summary
    ls = [(r["l1"], r["l2"], r["delta"]) for r in rep.records]
    assert all(10 * d < l < 0.1 for l1, l2, d in ls for l in (l1, l2))
    ok = s["min"] > 0 and s["max_over_min"] <= 10 and s["max_roundtrip_err"] <= 1e-6
    verdict(11, "2D sharpness ratio", ok,
            f"{len(rep.records)} points, min {s['min']:.3g} > 0, max/min {s['max_over_min']:.3f} <= 10, "
            f"round trip {s['max_roundtrip_err']:.1e} <= 1e-6")


def test_12_sharpness_3d():
    rep = run_experiment("sharpness-3d", {"n": "8,12"})
    s = rep.summary
    pairs = {(r["delta"], r["v"]) for r in rep.records}
    ok = len(pairs) == 6 and s["max_over_min"] <= 10 and s["max_roundtrip_err"] <= 1e-6
    verdict(12, "3D sharpness ratio", ok, f"6 pairs, max/min {s['max_over_min']:.3f} <= 10")


def test_13_boundary_step():
    rep = run_experiment("boundary-step", {"bodies": "disc,square", "n": "8,16,24", "band": "0.2,4.1"})
    s = rep.summary
    verdict(13, "boundary step ratio in [0.2, 4.1]", s["violations"] == 0,
            f"range [{s['min']:.3f}, {s['max']:.3f}], {s['violations']} outside")


def test_14_quadrature_cross_checks():
    worst = 0.0
    for seed in range(200):
        rng = np.random.default_rng(50_000 + seed)
        poly = random_polygon(rng)
        a = tuple(int(k) for k in rng.integers(0, 9, 2))
        rule = body_rule(poly, sum(a))
        got = rule.integrate(np.prod(rule.nodes ** np.array(a), axis=1)).value
        exact = float(polygon_moment(poly, a))
        worst = max(worst, abs(got - exact) / abs(exact))
    poly = random_polygon(np.random.default_rng(7))
    exact = float(polygon_moment(poly, (2, 1)))
    f = lambda X: X[:, 0] ** 2 * X[:, 1]
    hits = 0
    for seed in range(500):
        res = body_integral(poly, f, 3, method="monte_carlo", samples=200_000, seed=seed)
        hits += abs(res.value - exact) <= res.abs_error_bound
    ok = worst <= 1e-11 and hits >= 495
    verdict(14, "quadrature cross-checks", ok,
            f"arc vs rational max rel err {worst:.2e} <= 1e-11 over 200 cases; "
            f"MC within 3 sigma in {hits}/500 >= 99%")
