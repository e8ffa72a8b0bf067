"""Vanishing angles of the curvature criterion.

The narrowest admissible projection curve r(theta) satisfies, with equality,

    r' = r * sqrt(r^(2m) cos^(2m-2)(theta) B(tan theta)^2 - 1),   r(0) = 1,

where m is the cone dimension and B(t) is a lower bound for
inf det(I - t h).  The vanishing angle is where r blows up.  We integrate
w = r^(-m) instead, which turns the blow-up into a zero crossing:

    w' = -m sqrt(c^2 - w^2),   c(theta) = cos^(m-1)(theta) B(tan theta).

A second, independent formulation integrates the calibration inequality in
t = tan(theta) for g(t) = (r cos theta)^(-m):

    g' = m (t g - sqrt((1 + t^2) B^2 - g^2)) / (1 + t^2),   g(0) = 1.

Both start on the envelope (the radicand vanishes at the origin), so the
solution is launched from a power series.  The admissible branch is an
unstable separatrix of the ODE, hence the series is carried to high order
and the radicands are formed without cancellation.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .links import Link, SpectraUnavailable
from .product import DetEnvelope

DEFAULT_RTOL = 1e-12
DEFAULT_THETA_EPS = 1e-4
ENVELOPE_TOL = 1e-10
SERIES_ORDER = 14
RTOL_ENV = "CONECERT_RTOL"


def default_rtol() -> float:
    """Integrator relative tolerance; ``CONECERT_RTOL`` overrides the default."""
    raw = os.environ.get(RTOL_ENV)
    if raw is None:
        return DEFAULT_RTOL
    val = float(raw)
    if not (0 < val < 1e-3):
        raise ValueError(f"{RTOL_ENV} out of range: {raw!r}")
    return val


class BoundEvaluationError(ValueError):
    pass


def c_bound(alpha: float, t: float) -> float:
    """(1 - alpha t) exp(alpha t)."""
    return (1.0 - alpha * t) * math.exp(alpha * t)


def f_bound(alpha: float, t: float, m: int) -> float:
    """Lawlor's F(alpha, t, m) with k = m - 1."""
    if m < 2:
        raise ValueError("m must be >= 2")
    k = m - 1
    return (1.0 - alpha * t * math.sqrt(k / m)) * (1.0 + alpha * t / math.sqrt(k * m)) ** k


@dataclass(frozen=True)
class BoundEvaluator:
    """A scalar B(t) standing in for inf det(I - t h) on a cone of dimension m."""

    kind: str  # "c" | "F" | "det"
    m: int
    alpha: float = 0.0
    envelope: DetEnvelope | None = None
    det_alpha_sq: float | None = None

    def __post_init__(self):
        if self.kind not in ("c", "F", "det"):
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"cone dimension m must be an integer >= 2, got {self.m!r}")
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if self.kind == "det":
            if self.envelope is None or self.det_alpha_sq is None:
                raise ValueError("det bound needs an envelope and the link's alpha_sq")
            if self.envelope.spectra.k != self.m - 1:
                raise ValueError("envelope dimension does not match m - 1")

    @classmethod
    def c(cls, m: int, alpha: float) -> BoundEvaluator:
        return cls("c", int(m), float(alpha))

    @classmethod
    def F(cls, m: int, alpha: float) -> BoundEvaluator:
        return cls("F", int(m), float(alpha))

    @classmethod
    def det(cls, link: Link) -> BoundEvaluator:
        if link.spectra is None:
            raise SpectraUnavailable(f"{link.name} carries no spectra")
        return cls(
            "det",
            link.k + 1,
            math.sqrt(link.alpha_sq),
            DetEnvelope(link.spectra),
            det_alpha_sq=link.alpha_sq,
        )

    @property
    def alpha_eff_sq(self) -> float:
        """Coefficient a in B(t) = 1 - a t^2 / 2 + o(t^2)."""
        if self.kind == "det":
            return self.det_alpha_sq
        return self.alpha**2

    @property
    def t_max(self) -> float:
        """First zero of B (infinite when B never vanishes)."""
        if self.kind == "det":
            return self.envelope.t_max
        if self.alpha == 0:
            return math.inf
        if self.kind == "c":
            return 1.0 / self.alpha
        return math.sqrt(self.m / (self.m - 1)) / self.alpha

    def value(self, t: float) -> float:
        if self.kind == "c":
            return c_bound(self.alpha, t)
        if self.kind == "F":
            return f_bound(self.alpha, t, self.m)
        return self.envelope(t)

    def log_value(self, t: float) -> float:
        """log B(t) on [0, t_max], formed with log1p to keep small-t accuracy."""
        if t >= self.t_max:
            return -math.inf
        a = self.alpha
        if self.kind == "c":
            return a * t + math.log1p(-a * t)
        if self.kind == "F":
            k = self.m - 1
            return math.log1p(-a * t * math.sqrt(k / self.m)) + k * math.log1p(a * t / math.sqrt(k * self.m))
        return self.envelope.log_value(t)

    def log_taylor(self, order: int) -> np.ndarray:
        """Taylor coefficients of log B(t) at t = 0, up to t**order."""
        j = np.arange(order + 1, dtype=float)
        j[0] = 1.0
        out = np.zeros(order + 1)
        if self.kind == "c":
            out[2:] = -(self.alpha ** j[2:]) / j[2:]
        elif self.kind == "F":
            k = self.m - 1
            a = self.alpha * math.sqrt(k / self.m)
            b = self.alpha / math.sqrt(k * self.m)
            out[1:] = (-(a ** j[1:]) - k * (-b) ** j[1:]) / j[1:]
        else:
            row = self.envelope.germ_row()
            for n in range(1, order + 1):
                out[n] = -np.sum(row**n) / n
        out[2] = -self.alpha_eff_sq / 2.0
        return out


class Outcome(str, enum.Enum):
    FOUND = "found"
    LOCAL_OBSTRUCTION = "local_obstruction"
    ENVELOPE_HIT = "envelope_hit"
    BOUND_VANISHED_EARLY = "bound_vanished_early"


@dataclass(frozen=True)
class VanishingResult:
    outcome: Outcome
    kind: str
    m: int
    theta0: float | None = None
    # angle where integration stopped for envelope / bound failures
    stop_theta: float | None = None
    form: str = "w"
    steps: int = 0
    last_step: float | None = None
    nfev: int = 0
    trajectory: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def found(self) -> bool:
        return self.outcome is Outcome.FOUND

    @property
    def tan_theta0(self) -> float | None:
        return None if self.theta0 is None else math.tan(self.theta0)

    @property
    def theta0_deg(self) -> float | None:
        return None if self.theta0 is None else math.degrees(self.theta0)


# ----------------------------------------------------------------------------
# truncated power series
# ----------------------------------------------------------------------------

def _ps_mul(a, b):
    return np.convolve(a, b)[: len(a)]


def _ps_div(a, b):
    out = np.zeros(len(a))
    for n in range(len(a)):
        out[n] = (a[n] - np.dot(b[1 : n + 1], out[n - 1 :: -1][:n])) / b[0]
    return out


def _ps_exp(a):
    out = np.zeros(len(a))
    out[0] = 1.0
    for n in range(1, len(a)):
        j = np.arange(1, n + 1)
        out[n] = np.dot(j * a[1 : n + 1], out[n - 1 :: -1][:n]) / n
    return out * math.exp(a[0])


def _ps_log(a):
    out = np.zeros(len(a))
    out[0] = math.log(a[0])
    for n in range(1, len(a)):
        j = np.arange(1, n)
        out[n] = (n * a[n] - np.dot(j * out[1:n], a[n - 1 : 0 : -1])) / (n * a[0])
    return out


def _ps_compose(f, g):
    """f(g(x)) for g(0) = 0."""
    out = np.zeros(len(f))
    out[0] = f[-1]
    for c in f[-2::-1]:
        out = _ps_mul(out, g)
        out[0] += c
    return out


def _trig_series(order):
    n = np.arange(order + 1)
    fact = np.array([math.factorial(i) for i in n], dtype=float)
    sin = np.where(n % 2 == 1, (-1.0) ** ((n - 1) // 2) / fact, 0.0)
    cos = np.where(n % 2 == 0, (-1.0) ** (n // 2) / fact, 0.0)
    return sin, cos


def _leading_b(m: int, alpha_eff_sq: float) -> float | None:
    """Larger root of 4b^2 - 2m^2 b + m^2 (m - 1 + a) = 0, or None if complex."""
    disc = (m - 2) ** 2 - 4.0 * alpha_eff_sq
    if disc < 0:
        return None
    return m * (m + math.sqrt(disc)) / 4.0


def _solve_series(m: int, b: float, lead: float, residual, order: int) -> np.ndarray:
    """Coefficients y_0 = 1, y_1 = 0, y_2 = lead, then y_n (n >= 3).

    In both forms y_n enters the n-th residual coefficient linearly with
    factor 2 m^2 - 4 b n (from the squared derivative and the m^2 y^2 term),
    and that factor is nonzero for n >= 3 on the larger root b.
    """
    y = np.zeros(order + 1)
    y[0], y[2] = 1.0, lead
    for n in range(3, order + 1):
        y[n] = -residual(y)[n] / (2.0 * m * m - 4.0 * b * n)
    return y


def w_series(bound: BoundEvaluator, order: int = SERIES_ORDER) -> np.ndarray | None:
    """Taylor coefficients in theta of the admissible w-trajectory."""
    m = bound.m
    b = _leading_b(m, bound.alpha_eff_sq)
    if b is None:
        return None
    sin, cos = _trig_series(order)
    tan = _ps_div(sin, cos)
    log_c2 = (2 * m - 2) * _ps_log(cos) + 2.0 * _ps_compose(bound.log_taylor(order), tan)
    q = _ps_exp(log_c2)

    def residual(w):
        dw = np.append(np.arange(1, order + 1) * w[1:], 0.0)
        return _ps_mul(dw, dw) + m * m * _ps_mul(w, w) - m * m * q

    return _solve_series(m, b, -b, residual, order)


def g_series(bound: BoundEvaluator, order: int = SERIES_ORDER) -> np.ndarray | None:
    """Taylor coefficients in t of the admissible calibration profile g."""
    m = bound.m
    b = _leading_b(m, bound.alpha_eff_sq)
    if b is None:
        return None
    one_t2 = np.zeros(order + 1)
    one_t2[0] = 1.0
    if order >= 2:
        one_t2[2] = 1.0
    P = _ps_exp(_ps_log(one_t2) + 2.0 * bound.log_taylor(order))
    t_poly = np.zeros(order + 1)
    t_poly[1] = 1.0

    def residual(g):
        dg = np.append(np.arange(1, order + 1) * g[1:], 0.0)
        h = _ps_mul(one_t2, dg) - m * _ps_mul(t_poly, g)
        return _ps_mul(h, h) + m * m * _ps_mul(g, g) - m * m * P

    return _solve_series(m, b, m / 2.0 - b, residual, order)


def _tail(coeffs: np.ndarray, x: float) -> float:
    """1 - sum(coeffs * x**n), summed without touching the leading 1."""
    n = np.arange(len(coeffs))
    return -float(np.sum(coeffs[1:] * x ** n[1:]))


# ----------------------------------------------------------------------------
# integration
# ----------------------------------------------------------------------------

def _log_checked(bound: BoundEvaluator, t: float) -> float:
    val = bound.log_value(t)
    if math.isnan(val) or val == math.inf:
        raise BoundEvaluationError(f"{bound.kind}-bound is not finite at t={t!r}")
    return val


def _obstructed(bound: BoundEvaluator, form: str) -> VanishingResult:
    return VanishingResult(Outcome.LOCAL_OBSTRUCTION, bound.kind, bound.m, stop_theta=0.0, form=form)


def _circle_cone(bound: BoundEvaluator, form: str, trajectory_points: int) -> VanishingResult:
    # m = 2 admits a start only when alpha_eff = 0, hence B = 1; the admissible
    # trajectory is then w = cos(theta)^2 (g = 1), which first vanishes at pi/2
    traj = None
    if trajectory_points > 0:
        x = np.linspace(0.0, math.pi / 2 if form == "w" else 10.0, trajectory_points + 1)
        y = np.cos(x) ** 2 if form == "w" else np.ones_like(x)
        traj = np.vstack([x, y]).T
    return VanishingResult(
        Outcome.BOUND_VANISHED_EARLY, bound.kind, bound.m, stop_theta=math.pi / 2, form=form, trajectory=traj
    )


def vanishing_angle(
    bound: BoundEvaluator,
    *,
    theta_eps: float = DEFAULT_THETA_EPS,
    rtol: float | None = None,
    trajectory_points: int = 0,
    envelope_tol: float = ENVELOPE_TOL,
) -> VanishingResult:
    """Vanishing angle from the w-form ODE in the angle variable.

    The state is v = 1 - w so that near the start the radicand
    (c - w)(c + w) is formed from two small quantities of equal order.
    """
    coeffs = w_series(bound)
    if coeffs is None:
        return _obstructed(bound, "w")
    if bound.m == 2:
        return _circle_cone(bound, "w", trajectory_points)
    m = bound.m
    rtol = default_rtol() if rtol is None else rtol
    theta_end = min(math.pi / 2, math.atan(bound.t_max))
    v0 = _tail(coeffs, theta_eps)

    def one_minus_c(theta):
        if theta >= math.pi / 2:
            return 1.0
        log_c = 0.5 * (m - 1) * math.log1p(-math.sin(theta) ** 2) + _log_checked(bound, math.tan(theta))
        return -math.expm1(log_c)

    def radicand(theta, v):
        omc = one_minus_c(theta)
        return (v - omc) * (2.0 - omc - v)

    def rhs(theta, y):
        return [m * math.sqrt(max(radicand(theta, y[0]), 0.0))]

    def crossed(theta, y):
        return y[0] - 1.0

    def envelope(theta, y):
        return radicand(theta, y[0]) + envelope_tol

    crossed.terminal = True
    crossed.direction = 1
    envelope.terminal = True
    envelope.direction = -1

    sol = solve_ivp(
        rhs,
        (theta_eps, theta_end),
        [v0],
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2,
        events=(crossed, envelope),
        dense_output=trajectory_points > 0,
    )
    traj = None
    if trajectory_points > 0:
        stop = sol.t[-1]
        grid = np.linspace(theta_eps, stop, trajectory_points)
        w = 1.0 - sol.sol(grid)[0]
        traj = np.vstack([np.r_[0.0, grid], np.r_[1.0, w]]).T
    return _result(bound, sol, "w", traj, lambda x: x)


def vanishing_angle_gform(
    bound: BoundEvaluator,
    *,
    theta_eps: float = DEFAULT_THETA_EPS,
    rtol: float | None = None,
    trajectory_points: int = 0,
    envelope_tol: float = ENVELOPE_TOL,
) -> VanishingResult:
    """Vanishing angle from the calibration inequality in t = tan(theta).

    State G = 1 - g; the radicand (1 + t^2) B^2 - g^2 is factored as
    (s - g)(s + g) with s = sqrt(1 + t^2) B.
    """
    coeffs = g_series(bound)
    if coeffs is None:
        return _obstructed(bound, "g")
    if bound.m == 2:
        return _circle_cone(bound, "g", trajectory_points)
    m = bound.m
    rtol = default_rtol() if rtol is None else rtol
    t_eps = math.tan(theta_eps)
    t_end = min(bound.t_max, 1e8)
    G0 = _tail(coeffs, t_eps)

    def radicand(t, G):
        oms = -math.expm1(0.5 * math.log1p(t * t) + _log_checked(bound, t))
        return (G - oms) * (2.0 - oms - G)

    def rhs(t, y):
        G = y[0]
        root = math.sqrt(max(radicand(t, G), 0.0))
        return [m * (root - t * (1.0 - G)) / (1.0 + t * t)]

    def crossed(t, y):
        return y[0] - 1.0

    def envelope(t, y):
        return radicand(t, y[0]) + envelope_tol

    crossed.terminal = True
    crossed.direction = 1
    envelope.terminal = True
    envelope.direction = -1

    sol = solve_ivp(
        rhs,
        (t_eps, t_end),
        [G0],
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2,
        events=(crossed, envelope),
        dense_output=trajectory_points > 0,
    )
    traj = None
    if trajectory_points > 0:
        stop = sol.t[-1]
        grid = np.linspace(t_eps, stop, trajectory_points)
        g = 1.0 - sol.sol(grid)[0]
        traj = np.vstack([np.r_[0.0, grid], np.r_[1.0, g]]).T
    return _result(bound, sol, "g", traj, math.atan)


def _result(bound, sol, form, traj, to_theta) -> VanishingResult:
    if sol.status == -1:
        raise RuntimeError(f"integration failed: {sol.message}")
    steps = max(sol.t.size - 1, 0)
    last = float(sol.t[-1] - sol.t[-2]) if sol.t.size > 1 else None
    common = dict(kind=bound.kind, m=bound.m, form=form, steps=steps, last_step=last, nfev=sol.nfev, trajectory=traj)
    if sol.t_events[0].size:
        return VanishingResult(Outcome.FOUND, theta0=to_theta(float(sol.t_events[0][0])), **common)
    if sol.t_events[1].size:
        return VanishingResult(Outcome.ENVELOPE_HIT, stop_theta=to_theta(float(sol.t_events[1][0])), **common)
    return VanishingResult(Outcome.BOUND_VANISHED_EARLY, stop_theta=to_theta(float(sol.t[-1])), **common)


def theta_c(m: int, alpha: float, **kw) -> VanishingResult:
    return vanishing_angle(BoundEvaluator.c(m, alpha), **kw)


def theta_F(m: int, alpha: float, **kw) -> VanishingResult:
    return vanishing_angle(BoundEvaluator.F(m, alpha), **kw)


def theta_det(link: Link, **kw) -> VanishingResult:
    return vanishing_angle(BoundEvaluator.det(link), **kw)
