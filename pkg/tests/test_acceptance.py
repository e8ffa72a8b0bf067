"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines are printed even without -s) or directly with
``python tests/test_acceptance.py``.
"""

import math
import sys

import numpy as np
import pytest

from conecert.certify import certify, isoparametric_sweep, min_copies, rough_arithmetic_holds
from conecert.links import catalog_enumerate, make_focal, make_sphere
from conecert.product import minimal_product, product_normal_radius
from conecert.vanishing import BoundEvaluator, theta_c, theta_F, vanishing_angle, vanishing_angle_gform

SEED = 20240611


def _check(parts):
    """parts: list of (label, ok, detail)."""
    ok = all(p[1] for p in parts)
    detail = "; ".join(f"{label}={'ok' if good else 'FAIL'} ({info})" for label, good, info in parts)
    return ok, detail


def criterion_1():
    t = theta_c(12, 0.0)
    deg = t.theta0_deg
    return _check([("7.97+-0.3", t.found and abs(deg - 7.97) <= 0.3, f"{deg:.5f} deg"), ("<11.23", deg < 11.23, "")])


def criterion_2():
    t = theta_c(12, math.sqrt(19))
    deg = t.theta0_deg
    chain = 12 * t.tan_theta0
    return _check(
        [
            ("range", t.found and 10.5 <= deg <= 11.23, f"{deg:.5f} deg"),
            ("12 tan < 2.383", chain < 2.383, f"{chain:.6f}"),
        ]
    )


def criterion_3():
    f8 = theta_F(8, math.sqrt(7))
    f12, c12 = theta_F(12, math.sqrt(12)), theta_c(12, math.sqrt(12))
    return _check(
        [
            ("theta_F(8,sqrt7)<16", f8.found and f8.theta0_deg < 16, f"{f8.theta0_deg:.5f} deg"),
            ("theta_F(12,sqrt12) exists", f12.found, f"{f12.theta0_deg:.5f} deg"),
            ("theta_c(12,sqrt12) exists", c12.found, f"{c12.theta0_deg:.5f} deg"),
        ]
    )


def criterion_4():
    pairs = 0
    order_ok = rough_ok = True
    for m in (8, 12, 20, 40):
        for a in (0.5, 1.0, 2.0, math.sqrt(m - 1)):
            c, F = theta_c(m, a), theta_F(m, a)
            if c.found:
                rough_ok &= c.tan_theta0 < 1 / a
            if c.found and F.found:
                pairs += 1
                order_ok &= F.theta0 < c.theta0
    return _check([("theta_F<theta_c", order_ok, f"{pairs} pairs"), ("tan theta_c<1/alpha", rough_ok, "")])


def _ratio_samples(rng, lemma, n):
    out = []
    while len(out) < n:
        r = int(rng.integers(3, 20))
        m = int(rng.integers(r + 1, 41))
        a = float(rng.uniform(0, (r - 2) / 2))
        if lemma == "c":
            lhs, rhs = theta_c(m, m / r * a), theta_c(r, a)
        else:
            lhs, rhs = theta_F(m, m / r * a), theta_F(r, a * math.sqrt((m - 1) * r / ((r - 1) * m)))
        if lhs.found and rhs.found:
            out.append(r / m * rhs.tan_theta0 - lhs.tan_theta0)
    return np.array(out)


def criterion_5():
    rng = np.random.default_rng(SEED)
    tc = _ratio_samples(rng, "c", 20)
    tf = _ratio_samples(rng, "F", 20)
    return _check(
        [
            ("ratio c", bool(np.all(tc > 1e-10)), f"min margin {tc.min():.3e}"),
            ("ratio F", bool(np.all(tf > 1e-10)), f"min margin {tf.min():.3e}"),
        ]
    )


def criterion_6():
    cases = [("c", 12, 0.0), ("c", 12, math.sqrt(19)), ("F", 8, math.sqrt(7)), ("F", 12, math.sqrt(12)), ("c", 12, math.sqrt(12))]
    dual = halving = 0.0
    for kind, m, a in cases:
        ev = BoundEvaluator(kind, m, a)
        w = vanishing_angle(ev)
        dual = max(dual, abs(w.theta0 - vanishing_angle_gform(ev).theta0))
        halving = max(halving, abs(w.theta0 - vanishing_angle(ev, rtol=5e-13).theta0))
    return _check([("dual form", dual < 1e-6, f"max {dual:.2e} rad"), ("rtol halving", halving < 1e-8, f"max {halving:.2e} rad")])


def criterion_7():
    rng = np.random.default_rng(SEED)
    clifford = product_normal_radius([(1, math.pi), (1, math.pi)]) == math.pi / 2

    def pair():
        k1, k2 = (int(x) for x in rng.integers(1, 31, size=2))
        R1, R2 = (float(x) for x in rng.uniform(1e-3, math.pi, size=2))
        R = product_normal_radius([(k1, R1), (k2, R2)])
        first = k1 * (1 - math.cos(R1)) <= k2 * (1 - math.cos(R2))
        return k1, k2, R1, R2, R, first

    names = ("radius<=pi/2", "cos comparison", "half-angle", "key control")
    counts = dict.fromkeys(names, 0)
    bad = dict.fromkeys(names, 0)
    literal_counterexamples = 0
    while min(counts.values()) < 100:
        k1, k2, R1, R2, R, first = pair()
        l1sq = k1 / (k1 + k2)
        if counts["radius<=pi/2"] < 100:
            counts["radius<=pi/2"] += 1
            bad["radius<=pi/2"] += not R <= math.pi / 2
        if counts["cos comparison"] < 100:
            counts["cos comparison"] += 1
            bad["cos comparison"] += not (math.cos(R) > math.cos(R1) and math.cos(R) > math.cos(R2))
        if first and not math.tan(R / 2) > l1sq * math.tan(R1 / 2):
            literal_counterexamples += 1
        # the half-angle bound rests on the sine comparison, valid for R1 <= pi/2
        if first and R1 <= math.pi / 2 and counts["half-angle"] < 100:
            counts["half-angle"] += 1
            bad["half-angle"] += not math.tan(R / 2) > l1sq * math.tan(R1 / 2)
        kc_dims = k2 >= 4 or (k2 >= 3 and k1 >= 2)
        if first and R1 <= math.pi / 2 and kc_dims and counts["key control"] < 100:
            counts["key control"] += 1
            bad["key control"] += not math.tan(R / 2) >= (k1 + 1) / (k1 + k2 + 1) * math.tan(R1 / 2)

    worst = 0.0
    for _ in range(100):
        ks = [int(x) for x in rng.integers(1, 31, size=3)]
        Rs = [float(x) for x in rng.uniform(1e-3, math.pi, size=3)]
        R = product_normal_radius(list(zip(ks, Rs)))
        closed = 1 - min(k / sum(ks) * (1 - math.cos(r)) for k, r in zip(ks, Rs))
        worst = max(worst, abs(math.cos(R) - closed))
    parts = [("R(S1xS1)=pi/2", clifford, "exact")]
    parts += [(name, bad[name] == 0, f"{counts[name] - bad[name]}/{counts[name]}") for name in counts]
    parts.append(("n-ary closed form", worst <= 1e-14, f"max |dcos R| {worst:.1e}"))
    ok, detail = _check(parts)
    return ok, detail + f"; literal half-angle statement over all R1: {literal_counterexamples} counterexamples"


def criterion_8():
    simons = certify(minimal_product([make_sphere(3), make_sphere(3)]), "det")
    torus = certify(minimal_product([make_sphere(1), make_sphere(1)]))
    return _check(
        [
            ("Simons", simons.certified and simons.theta0 <= math.pi / 4, f"theta0={simons.theta0:.6f}"),
            ("S1xS1", not torus.certified and torus.reason == "local_obstruction", str(torus.reason)),
        ]
    )


def criterion_9():
    samples = isoparametric_sweep(37, 60, 50, seed=0)
    certified = sum(s.certificate.certified and s.certificate.bound == "c" for s in samples)
    cat = catalog_enumerate(64)
    inv = all(L.k * (1 - math.cos(L.normal_radius)) > 0.8 and L.alpha_sq <= 5 * L.k for L in cat)
    arith = all(rough_arithmetic_holds(k) for k in range(13, 201))
    return _check(
        [
            ("sweep", certified == 50, f"{certified}/50"),
            ("catalog invariants", inv, f"{len(cat)} links"),
            ("14.2k<(k+1)^2", arith, "13..200"),
        ]
    )


def criterion_10():
    S1, f = make_sphere(1), make_focal(6, 1, 1, "plus")
    a = min_copies([(S1, 1)], n_max=64, window=5)
    b = min_copies([(f, 1)], n_max=64, window=5)
    again = min_copies([(S1, 1)], n_max=64, window=5)
    mixed = min_copies([(S1, 1), (f, 1)], window=5)
    swapped = min_copies([(f, 1), (S1, 1)], window=5)
    return _check(
        [
            ("S1", a.found and a.window_complete, f"n_min={a.n_min}"),
            ("focal(6,1,1)", b.found and b.window_complete, f"n_min={b.n_min}"),
            ("permutation", mixed.to_dict() == swapped.to_dict(), f"n_min={mixed.n_min}"),
            ("repeatable", a.to_dict() == again.to_dict(), ""),
        ]
    )


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number]()
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def main() -> int:
    failed = 0
    for number, fn in sorted(CRITERIA.items()):
        ok, detail = fn()
        failed += not ok
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    print("criterion 11: excluded (not reproducible at desk scale)")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
