"""Lawlor-criterion certificates, copy-count searches and configuration checks.

A cone C(L) is certified area-minimizing when a vanishing angle theta0 exists
for some admissible curvature bound and theta0 <= R(L)/2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .links import Link, catalog_enumerate, classify
from .product import minimal_product
from .vanishing import (
    BoundEvaluator,
    Outcome,
    VanishingResult,
    theta_c,
    theta_F,
    vanishing_angle,
)

CERTIFICATE_SCHEMA = "certificate/v1"
# theta0 must clear R/2 by this much; covers the integrator's convergence spread
DEFAULT_SLACK = 1e-9
THRESHOLD_CAP = 4096
TAIL_CHECK = 8

STRATEGIES = ("auto", "c", "F", "det")
THEOREMS = ("t2", "t2c", "t3", "t4", "manyS")


class Verdict(str, enum.Enum):
    AREA_MINIMIZING = "AreaMinimizing"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Attempt:
    bound: str
    outcome: Outcome
    theta0: float | None
    margin: float | None
    rigorous: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "bound": self.bound,
            "outcome": self.outcome.value,
            "theta0_rad": self.theta0,
            "margin": self.margin,
            "rigorous": self.rigorous,
        }


@dataclass(frozen=True)
class Certificate:
    link_name: str
    k: int
    alpha_sq: float
    normal_radius: float
    bound: str
    theta0: float | None
    verdict: Verdict
    reason: str | None
    rigorous: bool
    labels: tuple[str, ...] = ()
    attempts: tuple[Attempt, ...] = ()

    @property
    def half_normal_radius(self) -> float:
        return self.normal_radius / 2.0

    @property
    def margin(self) -> float | None:
        return None if self.theta0 is None else self.half_normal_radius - self.theta0

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.AREA_MINIMIZING

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": CERTIFICATE_SCHEMA,
            "link": {
                "name": self.link_name,
                "k": self.k,
                "alpha_sq": self.alpha_sq,
                "normal_radius": self.normal_radius,
            },
            "verdict": self.verdict.value,
            "reason": self.reason,
            "bound": self.bound,
            "theta0_rad": self.theta0,
            "half_R_rad": self.half_normal_radius,
            "margin": self.margin,
            "rigorous": self.rigorous,
            "labels": list(self.labels),
            "attempts": [a.to_dict() for a in self.attempts],
        }


def _solve(link: Link, bound: str) -> tuple[VanishingResult, bool]:
    m = link.k + 1
    if bound == "c":
        return theta_c(m, math.sqrt(link.alpha_sq)), True
    if bound == "F":
        return theta_F(m, math.sqrt(link.alpha_sq)), True
    if bound == "det":
        ev = BoundEvaluator.det(link)
        return vanishing_angle(ev), ev.envelope.complete
    raise ValueError(f"unknown bound {bound!r}")


def _attempt(link: Link, bound: str) -> Attempt:
    res, rigorous = _solve(link, bound)
    margin = None if res.theta0 is None else link.normal_radius / 2.0 - res.theta0
    return Attempt(bound, res.outcome, res.theta0, margin, rigorous)


def _passes(att: Attempt, slack: float) -> bool:
    return att.margin is not None and att.margin >= slack


def certify(link: Link, strategy: str = "auto", slack: float = DEFAULT_SLACK) -> Certificate:
    """Apply the criterion theta0 <= R/2 with the chosen bound.

    ``auto`` tries the exact determinant bound when the link carries complete
    spectra, then F, then c, and stops at the first certifying bound.  When
    none certifies, the attempt with the best margin (or the first attempt if
    no angle exists at all) is reported.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    if strategy == "auto":
        order = ["F", "c"]
        if link.spectra is not None and link.spectra.complete:
            order.insert(0, "det")
    else:
        order = [strategy]

    attempts: list[Attempt] = []
    chosen = None
    for bound in order:
        att = _attempt(link, bound)
        attempts.append(att)
        if _passes(att, slack):
            chosen = att
            break
    if chosen is None:
        found = [a for a in attempts if a.margin is not None]
        chosen = max(found, key=lambda a: a.margin) if found else attempts[0]

    ok = _passes(chosen, slack)
    labels = tuple(f"Type-{a.bound}" for a in attempts if a.bound in ("c", "F") and _passes(a, slack))
    if ok:
        reason = None
    elif chosen.outcome is Outcome.FOUND:
        reason = "theta0 exceeds R/2"
    else:
        reason = chosen.outcome.value
    return Certificate(
        link_name=link.name,
        k=link.k,
        alpha_sq=link.alpha_sq,
        normal_radius=link.normal_radius,
        bound=chosen.bound,
        theta0=chosen.theta0,
        verdict=Verdict.AREA_MINIMIZING if ok else Verdict.UNDETERMINED,
        reason=reason,
        rigorous=chosen.rigorous,
        labels=labels,
        attempts=tuple(attempts),
    )


def is_type_c(link: Link, slack: float = DEFAULT_SLACK) -> bool:
    return certify(link, "c", slack).certified


# ----------------------------------------------------------------------------
# copy-count search
# ----------------------------------------------------------------------------

class NotFoundWithin(RuntimeError):
    def __init__(self, n_max: int, report: SearchReport):
        super().__init__(f"no certified copy count up to n_max={n_max}")
        self.n_max = n_max
        self.report = report


@dataclass(frozen=True)
class SearchReport:
    base: tuple[tuple[str, int], ...]
    n_min: int | None
    window: int
    window_verified: int
    certificates: tuple[tuple[int, Certificate], ...] = field(repr=False)

    @property
    def found(self) -> bool:
        return self.n_min is not None

    @property
    def window_complete(self) -> bool:
        return self.found and self.window_verified == self.window

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": "search/v1",
            "base": [{"link": name, "count": c} for name, c in self.base],
            "n_min": self.n_min,
            "window": self.window,
            "window_verified": self.window_verified,
            "per_n": [
                {
                    "n": n,
                    "k": cert.k,
                    "verdict": cert.verdict.value,
                    "bound": cert.bound,
                    "theta0_rad": cert.theta0,
                    "half_R_rad": cert.half_normal_radius,
                    "margin": cert.margin,
                }
                for n, cert in self.certificates
            ],
        }


def _canonical_base(base: Sequence[tuple[Link, int]]) -> list[tuple[Link, int]]:
    merged: dict[str, tuple[Link, int]] = {}
    for link, count in base:
        if count < 1:
            raise ValueError("base counts must be >= 1")
        key = repr(link.to_dict())
        prev = merged.get(key)
        merged[key] = (link, count + (prev[1] if prev else 0))
    # sort so the search is insensitive to the order the base was given in
    return sorted(merged.values(), key=lambda lc: (lc[0].k, lc[0].alpha_sq, lc[0].normal_radius, lc[0].name))


def _block_product(base: list[tuple[Link, int]], n: int) -> Link:
    factors = [link for link, count in base for _ in range(n * count)]
    return minimal_product(factors)


def min_copies(
    base: Sequence[tuple[Link, int]],
    n_max: int = 64,
    window: int = 5,
    strategy: str = "auto",
    raise_on_failure: bool = False,
) -> SearchReport:
    """Smallest n such that n copies of the base block certify, plus a window.

    The base block is the multiset ``{link: count}``; step n uses ``n * count``
    copies of each link.  After n_min is found the next ``window`` values are
    certified as well and the number that succeed is reported.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if window < 0:
        raise ValueError("window must be >= 0")
    canon = _canonical_base(base)
    label = tuple((link.name, count) for link, count in canon)
    certs: list[tuple[int, Certificate]] = []
    n_min = None
    for n in range(1, n_max + 1):
        cert = certify(_block_product(canon, n), strategy)
        certs.append((n, cert))
        if cert.certified:
            n_min = n
            break
    if n_min is None:
        report = SearchReport(label, None, window, 0, tuple(certs))
        if raise_on_failure:
            raise NotFoundWithin(n_max, report)
        return report
    verified = 0
    for n in range(n_min + 1, n_min + window + 1):
        cert = certify(_block_product(canon, n), strategy)
        certs.append((n, cert))
        if not cert.certified:
            break
        verified += 1
    return SearchReport(label, n_min, window, verified, tuple(certs))


# ----------------------------------------------------------------------------
# uniform dimension threshold
# ----------------------------------------------------------------------------

class ThresholdNotFound(RuntimeError):
    pass


def _threshold_ok(k: int, max_slope: float, min_gap: float) -> bool:
    res = theta_c(k + 1, math.sqrt(k * max_slope))
    if not res.found:
        return False
    half_r = 0.5 * math.acos(max(-1.0, 1.0 - min_gap / k))
    return res.theta0 <= half_r


def uniform_dimension_threshold(max_slope: float, min_gap: float, cap: int = THRESHOLD_CAP) -> int:
    """Smallest k whose rough control is met for k and the next 8 dimensions.

    The rough control asks theta_c(k+1, sqrt(k*max_slope)) to exist and not
    exceed half of arccos(1 - min_gap/k).
    """
    if not (math.isfinite(max_slope) and math.isfinite(min_gap)):
        raise ValueError("inputs must be finite")
    if max_slope < 1:
        raise ValueError("max_slope must be >= 1")
    if min_gap <= 0:
        raise ValueError("min_gap must be > 0")
    k = 1
    while k <= cap:
        if not _threshold_ok(k, max_slope, min_gap):
            k += 1
            continue
        bad = next((j for j in range(k + 1, k + TAIL_CHECK + 1) if not _threshold_ok(j, max_slope, min_gap)), None)
        if bad is None:
            return k
        k = bad + 1
    raise ThresholdNotFound(f"no threshold found up to k={cap}")


def thc_existence_dimension(bound: str = "c", max_k: int = 64) -> int | None:
    """Smallest k for which the angle for (m=k+1, alpha=sqrt(k)) exists."""
    solver = {"c": theta_c, "F": theta_F}[bound]
    for k in range(1, max_k + 1):
        if solver(k + 1, math.sqrt(k)).found:
            return k
    return None


def rough_arithmetic_holds(k: int) -> bool:
    return 14.2 * k < (k + 1) ** 2


def cubic_ratio(x: float) -> float:
    """(x+1)^3 / x^2, increasing for x > 2."""
    return (x + 1.0) ** 3 / x**2


# ----------------------------------------------------------------------------
# isoparametric sweep
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSample:
    factors: tuple[str, ...]
    certificate: Certificate

    def to_dict(self) -> dict[str, Any]:
        return {"factors": list(self.factors), **self.certificate.to_dict()}


def _sample_factors(rng: np.random.Generator, catalog: list[Link], target: int) -> list[Link]:
    by_dim: dict[int, list[Link]] = {}
    for link in catalog:
        by_dim.setdefault(link.k, []).append(link)
    factors: list[Link] = []
    remaining = target
    while remaining > 0:
        # the first factor leaves room for at least one more
        limit = remaining - 1 if not factors else remaining
        choices = [link for d in sorted(by_dim) if d <= limit for link in by_dim[d]]
        pick = choices[int(rng.integers(len(choices)))]
        factors.append(pick)
        remaining -= pick.k
    return factors


def isoparametric_sweep(
    min_dim: int, max_dim: int, samples: int, seed: int = 0
) -> list[SweepSample]:
    """Certify random minimal products of catalog links with the c-bound.

    Cone dimensions k+1 are drawn uniformly from [min_dim, max_dim]; factors
    are drawn uniformly from the catalog entries that still fit.
    """
    if min_dim < 3:
        raise ValueError("min_dim must be >= 3 so that two factors fit")
    if max_dim < min_dim:
        raise ValueError("max_dim must be >= min_dim")
    rng = np.random.default_rng(seed)
    catalog = catalog_enumerate(max_dim - 2)
    out = []
    for _ in range(samples):
        target = int(rng.integers(min_dim - 1, max_dim))  # k in [min_dim-1, max_dim-1]
        factors = _sample_factors(rng, catalog, target)
        prod = minimal_product(factors, with_spectra=False)
        out.append(SweepSample(tuple(f.name for f in factors), certify(prod, "c")))
    return out


# ----------------------------------------------------------------------------
# configuration theorem checks
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Hypothesis:
    name: str
    holds: bool
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "holds": self.holds, "detail": self.detail}


@dataclass(frozen=True)
class TheoremReport:
    theorem: str
    hypotheses: tuple[Hypothesis, ...]
    certificate: Certificate | None
    # extra conclusion checks beyond Type-c (the class II claim of t2/t2c)
    conclusion: tuple[Hypothesis, ...] = ()

    @property
    def hypotheses_hold(self) -> bool:
        return all(h.holds for h in self.hypotheses)

    @property
    def confirmed(self) -> bool:
        return (
            self.hypotheses_hold
            and self.certificate is not None
            and self.certificate.certified
            and all(c.holds for c in self.conclusion)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": "theorem/v1",
            "theorem": self.theorem,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "hypotheses_hold": self.hypotheses_hold,
            "conclusion": [c.to_dict() for c in self.conclusion],
            "confirmed": self.confirmed,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


class HypothesisFailed(ValueError):
    def __init__(self, which: str, report: TheoremReport):
        super().__init__(f"hypothesis failed: {which}")
        self.which = which
        self.report = report


def _is_sphere(link: Link) -> bool:
    return link.alpha_sq == 0 and math.isclose(link.normal_radius, math.pi, rel_tol=0, abs_tol=1e-12)


def _is_focal_g4(link: Link) -> bool:
    return link.provenance.startswith("catalog:focal:4:")


def _type_c(name: str, link: Link) -> Hypothesis:
    cert = certify(link, "c")
    detail = (
        f"theta_c={cert.theta0:.12g} <= R/2={cert.half_normal_radius:.12g}"
        if cert.certified
        else f"not Type-c ({cert.reason})"
    )
    return Hypothesis(name, cert.certified, detail)


def _class(name: str, link: Link, want: str) -> Hypothesis:
    cls = classify(link)
    ok = cls.in_class_II if want == "II" else cls.letter == want
    return Hypothesis(name, ok, f"slope={cls.slope:.12g}, class {cls.letter}/{cls.roman}")


def _dim(name: str, ok: bool, detail: str) -> Hypothesis:
    return Hypothesis(name, ok, detail)


def _hypotheses(theorem: str, links: Sequence[Link]) -> list[Hypothesis]:
    n = len(links)
    if theorem == "t2":
        if n != 2:
            return [_dim("shape", False, f"t2 takes exactly 2 links, got {n}")]
        a, b = links
        ca, cb = classify(a), classify(b)
        if a.exact_slope is not None and b.exact_slope is not None:
            equal = a.exact_slope == b.exact_slope
        else:
            equal = math.isclose(ca.slope, cb.slope, rel_tol=1e-12)
        return [
            _dim("dimension", a.k >= 3 and b.k >= 3, f"k1={a.k}, k2={b.k}, need both >= 3"),
            Hypothesis("slope", equal and ca.slope >= 1 - 1e-12, f"s1={ca.slope:.12g}, s2={cb.slope:.12g}, need equal and >= 1"),
            _type_c("type-c:L1", a),
            _type_c("type-c:L2", b),
        ]
    if theorem == "t2c":
        if n < 2:
            return [_dim("shape", False, "t2c takes n >= 2 copies of one link")]
        same = all(link.to_dict() == links[0].to_dict() for link in links)
        L = links[0]
        return [
            _dim("shape", same, "all factors must be the same link"),
            _dim("dimension", L.k >= 3, f"k={L.k}, need >= 3"),
            _class("class", L, "II"),
            _type_c("type-c:L", L),
        ]
    if theorem in ("t3", "t4"):
        if n != 2:
            return [_dim("shape", False, f"{theorem} takes exactly 2 links, got {n}")]
        L, M = links
        if theorem == "t3":
            second = _dim("shape", _is_sphere(M), f"second factor {M.name} must be a round sphere")
            dim = _dim("dimension", M.k >= L.k >= 3, f"n={M.k}, k={L.k}, need n >= k >= 3")
        else:
            second = _dim("shape", _is_focal_g4(M), f"second factor {M.name} must be a g=4 focal submanifold")
            dim = _dim("dimension", M.k >= 2 * L.k and L.k >= 3, f"n={M.k}, k={L.k}, need n/2 >= k >= 3")
        return [second, dim, _class("class", L, "II"), _type_c("type-c:L", L)]
    if theorem == "manyS":
        if n < 2:
            return [_dim("shape", False, "manyS takes a link followed by >= 1 spheres")]
        L, spheres = links[0], links[1:]
        cls = classify(L)
        d = L.k + sum(s.k for s in spheres)
        out = [
            _dim("shape", all(_is_sphere(s) for s in spheres), "factors after the first must be round spheres"),
            _dim("dimension", L.k >= 3, f"k={L.k}, need >= 3"),
        ]
        if cls.in_class_II:
            out.append(Hypothesis("class", True, f"slope={cls.slope:.12g}, class II"))
        else:
            out.append(
                Hypothesis(
                    "class",
                    cls.letter == "a" and d >= 11,
                    f"slope={cls.slope:.12g}, class {cls.letter}; class a needs total dimension {d} >= 11",
                )
            )
        out.append(_type_c("type-c:L", L))
        return out
    raise ValueError(f"theorem must be one of {THEOREMS}")


def configuration_theorem_check(links: Sequence[Link], theorem: str, raise_on_failure: bool = True) -> TheoremReport:
    """Check a configuration theorem's hypotheses, then solve its conclusion.

    The conclusion is that the minimal product of ``links`` (in order) spans a
    Type-c cone; for t2 and t2c it is also of class II.  Raises
    HypothesisFailed naming the first failing hypothesis unless
    ``raise_on_failure`` is false.
    """
    if theorem not in THEOREMS:
        raise ValueError(f"theorem must be one of {THEOREMS}")
    hyps = _hypotheses(theorem, links)
    failed = next((h for h in hyps if not h.holds), None)
    if failed is not None:
        report = TheoremReport(theorem, tuple(hyps), None)
        if raise_on_failure:
            raise HypothesisFailed(failed.name, report)
        return report
    prod = minimal_product(links, with_spectra=False)
    cert = certify(prod, "c")
    extra = (_class("class", prod, "II"),) if theorem in ("t2", "t2c") else ()
    return TheoremReport(theorem, tuple(hyps), cert, extra)
