import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import CubicSpline

from conecert.links import Link, SpectraUnavailable, make_sphere
from conecert.product import minimal_product
from conecert.vanishing import (
    RTOL_ENV,
    BoundEvaluator,
    Outcome,
    _leading_b,
    c_bound,
    default_rtol,
    f_bound,
    g_series,
    theta_c,
    theta_det,
    theta_F,
    vanishing_angle,
    vanishing_angle_gform,
    w_series,
)

SQ = math.sqrt


def _rk4_oracle(m, alpha, h=2e-5, th0=2e-3):
    """Crude fixed-step RK4 on the w-ODE from a second-order start.

    Independent of the library's series and adaptive integrator; the truncated
    start costs a few 1e-3 degrees, which is all it is used for.
    """
    b = m * (m + SQ((m - 2) ** 2 - 4 * alpha * alpha)) / 4

    def c(th):
        t = math.tan(th)
        return math.cos(th) ** (m - 1) * (1 - alpha * t) * math.exp(alpha * t)

    def f(th, w):
        return -m * SQ(max(c(th) ** 2 - w * w, 0.0))

    th, w = th0, 1 - b * th0**2
    while True:
        k1 = f(th, w)
        k2 = f(th + h / 2, w + h / 2 * k1)
        k3 = f(th + h / 2, w + h / 2 * k2)
        k4 = f(th + h, w + h * k3)
        nxt = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if nxt <= 0:
            return th + h * w / (w - nxt)
        th, w = th + h, nxt


# ---------------------------------------------------------------- bounds

def test_c_bound_values():
    assert c_bound(2.0, 0.0) == 1.0
    assert c_bound(2.0, 0.5) == 0.0
    assert c_bound(1.0, 0.3) == pytest.approx(0.7 * math.exp(0.3), rel=1e-15)


@pytest.mark.parametrize("m", [3, 8, 12, 40])
def test_f_bound_zero_and_identity(m):
    a = 1.7
    assert f_bound(0.0, 0.9, m) == 1.0
    zero = SQ(m / (m - 1)) / a
    assert f_bound(a, zero, m) == pytest.approx(0.0, abs=1e-14)
    assert BoundEvaluator.F(m, a).t_max == pytest.approx(zero, rel=1e-15)


@pytest.mark.parametrize("m,a", [(3, 0.4), (8, SQ(7)), (20, 3.0)])
def test_f_bound_second_order_coefficient(m, a):
    # F(t) = 1 - a^2 t^2 / 2 + O(t^3): symmetric second difference
    h = 1e-4
    second = (f_bound(a, h, m) + f_bound(a, -h, m) - 2.0) / h**2
    assert second == pytest.approx(-a * a, rel=1e-6)


@pytest.mark.parametrize("m,a", [(4, 0.3), (12, 2.0)])
def test_f_below_c_below_one(m, a):
    ev = BoundEvaluator.c(m, a)
    for t in np.linspace(0.01, 0.99, 30) / a:
        assert c_bound(a, t) < f_bound(a, t, m) < 1.0
        assert ev.value(t) == pytest.approx(math.exp(ev.log_value(t)), rel=1e-13)


@pytest.mark.parametrize(
    "bound",
    [BoundEvaluator.c(12, SQ(19)), BoundEvaluator.F(8, SQ(7)), BoundEvaluator.det(minimal_product([make_sphere(3)] * 2))],
    ids=["c", "F", "det"],
)
def test_log_taylor_matches_log(bound):
    coeffs = bound.log_taylor(14)
    assert coeffs[0] == 0.0 and coeffs[1] == pytest.approx(0.0, abs=1e-15)
    assert coeffs[2] == pytest.approx(-bound.alpha_eff_sq / 2, rel=1e-14)
    t = 0.01
    poly = float(np.polyval(coeffs[::-1], t))
    assert poly == pytest.approx(bound.log_value(t), rel=1e-12, abs=1e-24)


def test_det_log_taylor_simons_closed_form():
    # log (1 - t^2)^3 = -3 sum t^(2j) / j
    ev = BoundEvaluator.det(minimal_product([make_sphere(3)] * 2))
    expect = np.zeros(11)
    expect[2::2] = [-3.0 / j for j in range(1, 6)]
    np.testing.assert_allclose(ev.log_taylor(10), expect, atol=1e-13)


def test_evaluator_rejects_bad_input():
    with pytest.raises(ValueError):
        BoundEvaluator("x", 4, 1.0)
    with pytest.raises(ValueError):
        BoundEvaluator.c(1, 0.0)
    with pytest.raises(ValueError):
        BoundEvaluator("c", 3.5, 0.0)
    for bad in (-1.0, math.nan, math.inf):
        with pytest.raises(ValueError):
            BoundEvaluator.c(5, bad)
    with pytest.raises(ValueError):
        BoundEvaluator("det", 4, 1.0)
    with pytest.raises(ValueError):
        f_bound(1.0, 0.1, 1)


# ---------------------------------------------------------------- start series

@pytest.mark.parametrize("m,a2", [(3, 0.0), (8, 7.0), (12, 19.0), (40, 100.0)])
def test_leading_coefficient_is_larger_root(m, a2):
    b = _leading_b(m, a2)
    assert 4 * b * b - 2 * m * m * b + m * m * (m - 1 + a2) == pytest.approx(0.0, abs=1e-9 * m**4)
    other = m * m / 2 - b
    assert b >= other
    assert w_series(BoundEvaluator.c(m, SQ(a2)))[2] == pytest.approx(-b, rel=1e-15)


def test_obstructed_start():
    assert _leading_b(3, 0.26) is None
    assert w_series(BoundEvaluator.c(3, SQ(0.26))) is None
    assert g_series(BoundEvaluator.c(3, SQ(0.26))) is None


def test_circle_cone_series_is_cos_squared():
    # cos^2 x = (1 + cos 2x) / 2
    w = w_series(BoundEvaluator.c(2, 0.0))
    n = np.arange(w.size)
    expect = np.where(n % 2 == 0, 0.5 * (-1.0) ** (n // 2) * 2.0**n / np.array([math.factorial(int(j)) for j in n]), 0.0)
    expect[0] = 1.0
    np.testing.assert_allclose(w, expect, atol=1e-15)
    np.testing.assert_allclose(g_series(BoundEvaluator.c(2, 0.0)), np.eye(w.size)[0], atol=1e-15)


@pytest.mark.parametrize("m,a", [(5, 1.0), (12, SQ(19)), (30, 6.0)])
def test_w_series_solves_ode(m, a):
    w = w_series(BoundEvaluator.c(m, a))
    th = 0.1 / m
    n = np.arange(w.size)
    val = np.sum(w * th**n)
    der = np.sum(n[1:] * w[1:] * th ** (n[1:] - 1))
    cc = math.cos(th) ** (m - 1) * c_bound(a, math.tan(th))
    # residual of w'^2 = m^2 (c^2 - w^2), relative to the size of either side
    assert abs(der**2 - m * m * (cc * cc - val * val)) < 1e-12 * der**2


@pytest.mark.parametrize("m,a", [(5, 1.0), (12, SQ(19)), (30, 6.0)])
def test_g_series_solves_ode(m, a):
    g = g_series(BoundEvaluator.c(m, a))
    t = 0.1 / m
    n = np.arange(g.size)
    val = np.sum(g * t**n)
    der = np.sum(n[1:] * g[1:] * t ** (n[1:] - 1))
    P = (1 + t * t) * c_bound(a, t) ** 2
    lhs = ((1 + t * t) * der - m * t * val) ** 2
    assert abs(lhs - m * m * (P - val * val)) < 1e-12 * max(lhs, 1e-30)


# ---------------------------------------------------------------- frozen angles

@pytest.mark.parametrize(
    "m,a,deg",
    [(12, 0.0, 7.96292), (12, SQ(19), 11.20314), (8, SQ(7), 16.48824), (20, 1.0, 4.67187)],
)
def test_theta_c_reference_values(m, a, deg):
    res = theta_c(m, a)
    assert res.outcome is Outcome.FOUND and res.kind == "c" and res.m == m
    assert res.theta0_deg == pytest.approx(deg, abs=2e-5)
    assert res.theta0_deg == pytest.approx(math.degrees(_rk4_oracle(m, a)), abs=5e-3)


def test_theta_F_reference_value():
    assert theta_F(8, SQ(7)).theta0_deg == pytest.approx(15.87918, abs=2e-5)


def test_published_angle_bounds():
    assert abs(theta_c(12, 0.0).theta0_deg - 7.97) < 0.3
    t = theta_c(12, SQ(19))
    assert 10.5 <= t.theta0_deg <= 11.23
    assert 12 * t.tan_theta0 < 2.383
    assert theta_F(8, SQ(7)).theta0_deg < 16
    assert theta_F(12, SQ(12)).found and theta_c(12, SQ(12)).found


def test_sparse_cone_edge():
    # first dimension where the k = m - 1, alpha^2 = k cone yields an angle
    assert theta_c(7, SQ(6)).outcome is Outcome.ENVELOPE_HIT
    assert theta_F(7, SQ(6)).outcome is Outcome.ENVELOPE_HIT
    assert theta_c(8, SQ(7)).found and theta_F(8, SQ(7)).found


# ---------------------------------------------------------------- outcomes

def test_local_obstruction():
    r = theta_c(3, SQ(2))
    assert r.outcome is Outcome.LOCAL_OBSTRUCTION and r.theta0 is None and not r.found
    assert vanishing_angle_gform(BoundEvaluator.c(3, SQ(2))).outcome is Outcome.LOCAL_OBSTRUCTION


def test_circle_cone_never_vanishes_before_right_angle():
    for solve in (vanishing_angle, vanishing_angle_gform):
        r = solve(BoundEvaluator.c(2, 0.0), trajectory_points=20)
        assert r.outcome is Outcome.BOUND_VANISHED_EARLY
        assert r.stop_theta == pytest.approx(math.pi / 2)
        assert r.trajectory[0, 1] == 1.0


def test_theta_det_needs_spectra():
    with pytest.raises(SpectraUnavailable):
        theta_det(Link("bare", 6, 6.0, math.pi / 2))


def test_simons_det_angle():
    S = minimal_product([make_sphere(3)] * 2)
    r = theta_det(S)
    assert r.found and r.kind == "det" and r.m == 7
    assert r.theta0 == pytest.approx(0.328153, abs=1e-6)
    assert r.theta0 < math.pi / 4
    # the F and c cones of the same size admit no angle at all
    assert not theta_F(7, SQ(6)).found and not theta_c(7, SQ(6)).found


# ---------------------------------------------------------------- numerical robustness

ACCEPT = [(12, 0.0), (12, SQ(19)), (8, SQ(7))]


@pytest.mark.parametrize("m,a", ACCEPT)
@pytest.mark.parametrize("kind", ["c", "F"])
def test_dual_forms_agree(m, a, kind):
    ev = BoundEvaluator(kind, m, a)
    w = vanishing_angle(ev)
    g = vanishing_angle_gform(ev)
    assert w.found and g.found and g.form == "g"
    assert abs(w.theta0 - g.theta0) < 1e-8


@pytest.mark.parametrize("k,slope", [(6, 1.0), (13, 3.0), (24, 5.0), (59, 5.0)])
def test_dual_forms_agree_large_slope(k, slope):
    ev = BoundEvaluator.c(k + 1, SQ(slope * k))
    w, g = vanishing_angle(ev), vanishing_angle_gform(ev)
    assert w.outcome == g.outcome
    if w.found:
        assert abs(w.theta0 - g.theta0) < 1e-8


@pytest.mark.parametrize("m,a", ACCEPT)
def test_start_angle_insensitive(m, a):
    ev = BoundEvaluator.c(m, a)
    angles = [vanishing_angle(ev, theta_eps=e).theta0 for e in (1e-5, 1e-4, 1e-3)]
    assert max(angles) - min(angles) < 1e-9


@pytest.mark.parametrize("m,a", ACCEPT)
def test_tolerance_halving(m, a):
    ev = BoundEvaluator.F(m, a)
    assert abs(vanishing_angle(ev, rtol=1e-12).theta0 - vanishing_angle(ev, rtol=5e-13).theta0) < 1e-8


def test_rtol_environment(monkeypatch):
    assert default_rtol() == 1e-12
    monkeypatch.setenv(RTOL_ENV, "1e-10")
    assert default_rtol() == 1e-10
    assert theta_c(12, 0.0).theta0_deg == pytest.approx(7.96292, abs=1e-4)
    monkeypatch.setenv(RTOL_ENV, "loose")
    with pytest.raises(ValueError):
        default_rtol()


@pytest.mark.parametrize("m,a", [(12, SQ(19)), (20, 2.0)])
def test_trajectory_decreases_inside_envelope(m, a):
    r = theta_c(m, a, trajectory_points=400)
    th, w = r.trajectory[:, 0], r.trajectory[:, 1]
    assert th[0] == 0.0 and w[0] == 1.0
    assert np.all(np.diff(w) < 0)
    assert w[-1] == pytest.approx(0.0, abs=1e-9)
    env = np.cos(th) ** (m - 1) * np.array([c_bound(a, math.tan(x)) for x in th])
    assert np.all(w <= env + 1e-10)


@pytest.mark.parametrize("kind,m,a", [("c", 12, SQ(19)), ("F", 8, SQ(7))])
def test_g_equals_w_over_cos_power(kind, m, a):
    ev = BoundEvaluator(kind, m, a)
    w = vanishing_angle(ev, trajectory_points=4000).trajectory
    g = vanishing_angle_gform(ev, trajectory_points=4000).trajectory
    assert g[0, 1] == 1.0
    spline = CubicSpline(g[1:, 0], g[1:, 1])
    th = w[1:-1:37, 0]
    np.testing.assert_allclose(spline(np.tan(th)), w[1:-1:37, 1] / np.cos(th) ** m, atol=1e-8)


# ---------------------------------------------------------------- angle comparisons

@pytest.mark.parametrize("m", [8, 12, 20, 40])
def test_F_angle_below_c_angle(m):
    for a in (0.5, 1.0, 2.0, SQ(m - 1)):
        c, F = theta_c(m, a), theta_F(m, a)
        if c.found:
            assert c.tan_theta0 < 1 / a
            if F.found:
                assert F.theta0 < c.theta0


@pytest.mark.parametrize("m", [6, 15, 30])
def test_angles_increase_with_alpha(m):
    alphas = np.linspace(0.0, (m - 2) / 2 * 0.95, 8)
    for solve in (theta_c, theta_F):
        got = [solve(m, float(a)) for a in alphas]
        th = [r.theta0 for r in got if r.found]
        assert len(th) >= 2
        assert np.all(np.diff(th) > 0)


@settings(max_examples=15)
@given(m=st.integers(8, 30), frac=st.floats(0.01, 0.9))
def test_smaller_bound_larger_angle(m, frac):
    a = frac * (m - 2) / 2
    c, F = theta_c(m, a), theta_F(m, a)
    if F.found and c.found:
        assert c.theta0 > F.theta0
    if c.found:
        assert F.found


def _ratio_samples(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        r = int(rng.integers(3, 20))
        m = int(rng.integers(r + 1, 41))
        a = float(rng.uniform(0, (r - 2) / 2))
        out.append((m, r, a))
    return out


@pytest.mark.parametrize("m,r,a", _ratio_samples(12))
def test_ratio_lemma_c(m, r, a):
    lhs, rhs = theta_c(m, m / r * a), theta_c(r, a)
    if lhs.found and rhs.found:
        assert r / m * rhs.tan_theta0 - lhs.tan_theta0 > 1e-10


@pytest.mark.parametrize("m,r,a", _ratio_samples(12, seed=1))
def test_ratio_lemma_F(m, r, a):
    lhs = theta_F(m, m / r * a)
    rhs = theta_F(r, a * SQ((m - 1) * r / ((r - 1) * m)))
    if lhs.found and rhs.found:
        assert r / m * rhs.tan_theta0 - lhs.tan_theta0 > 1e-10
