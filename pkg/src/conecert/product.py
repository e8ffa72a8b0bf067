"""Minimal products of links.

The minimal product of links L_1, ..., L_n of dimensions k_i places
sqrt(k_i/k) L_i in orthogonal factors, k = sum k_i.  Its curvature sup-norm
and normal radius follow from the factors' data alone; its shape-operator
spectra follow from the factors' spectra and the extra "eta" normals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .links import Link, SpectraUnavailable, SpectrumFamily

DEFAULT_RESOLUTION = 64
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def weights(dims: Sequence[int]) -> np.ndarray:
    """lambda_i = sqrt(k_i / k)."""
    dims = np.asarray(dims, dtype=float)
    return np.sqrt(dims / dims.sum())


def product_normal_radius(radii: Sequence[tuple[int, float]]) -> float:
    """Normal radius of a minimal product from the factors' (k_i, R_i).

    cos R = 1 - min_i lambda_i^2 (1 - cos R_i).

    Evaluated through 1 - cos x = 2 sin^2(x/2), which stays accurate for
    small radii where arccos is ill-conditioned.
    """
    if not radii:
        raise ValueError("need at least one factor")
    k = sum(ki for ki, _ in radii)
    half_gap = min(ki / k * math.sin(Ri / 2.0) ** 2 for ki, Ri in radii)
    if half_gap < 0.25:
        return 2.0 * math.asin(math.sqrt(half_gap))
    return math.acos(max(-1.0, 1.0 - 2.0 * half_gap))


def _product_alpha_sq(f1: Link, f2: Link) -> tuple[float, Fraction | None]:
    k = f1.k + f2.k
    alpha_sq = k * max(1.0, f1.slope, f2.slope)
    exact = None
    if f1.exact_slope is not None and f2.exact_slope is not None:
        exact = k * max(Fraction(1), f1.exact_slope, f2.exact_slope)
        alpha_sq = float(exact)
    return alpha_sq, exact


def _binary_product(f1: Link, f2: Link, resolution: int, with_spectra: bool) -> Link:
    k = f1.k + f2.k
    alpha_sq, exact = _product_alpha_sq(f1, f2)
    R = product_normal_radius([(f1.k, f1.normal_radius), (f2.k, f2.normal_radius)])
    spectra = None
    if (
        with_spectra
        and f1.spectra is not None
        and f2.spectra is not None
        and f1.spectra.complete
        and f2.spectra.complete
    ):
        spectra = compose_spectra(f1, f2, resolution)
    return Link(
        name=f"{_wrap(f1.name)} x {_wrap(f2.name)}",
        k=k,
        alpha_sq=alpha_sq,
        normal_radius=R,
        spectra=spectra,
        provenance=f"product-of:[{_factor_ref(f1)}, {_factor_ref(f2)}]",
        alpha_sq_exact=exact,
    )


def _wrap(name: str) -> str:
    return f"({name})" if " x " in name else name


def _factor_ref(link: Link) -> str:
    return link.provenance.removeprefix("product-of:") if link.provenance.startswith("product-of:") else link.name


def minimal_product(
    factors: Sequence[Link],
    resolution: int = DEFAULT_RESOLUTION,
    with_spectra: bool = True,
) -> Link:
    """Minimal product of one or more links, folded left to right.

    A single factor is returned unchanged.  Spectra are composed at each fold
    whose two inputs both carry complete spectra; once an intermediate family
    is only a grid sample the remaining folds carry no spectra.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("minimal_product needs at least one factor")
    return reduce(lambda a, b: _binary_product(a, b, resolution, with_spectra), factors)


def _sphere_grid(resolution: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(a0, a1, a2) on the unit sphere with a1, a2 >= 0, vertices included."""
    phi = np.linspace(0.0, math.pi, 2 * (resolution // 2) + 1)
    psi = np.linspace(0.0, math.pi / 2, resolution // 2 + 1)
    P, S = np.meshgrid(phi, psi, indexing="ij")
    a0 = np.cos(P)
    a1 = np.sin(P) * np.cos(S)
    a2 = np.sin(P) * np.sin(S)
    a0, a1, a2 = (np.round(a, 15).ravel() for a in (a0, a1, a2))
    return a0, a1, a2


def compose_spectra(f1: Link, f2: Link, resolution: int = DEFAULT_RESOLUTION) -> SpectrumFamily:
    """Spectra of the minimal product f1 x f2 over a grid of unit normals.

    A unit normal a1 (xi_1, 0) + a2 (0, xi_2) + a0 eta_0 has block-diagonal
    shape operator with eigenvalues (a1 mu_i - a0 lambda_2) / lambda_1 on the
    first block and (a2 sigma_j + a0 lambda_1) / lambda_2 on the second.
    """
    if f1.spectra is None or f2.spectra is None:
        raise SpectraUnavailable("both factors need spectra to compose")
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    l1, l2 = weights([f1.k, f2.k])
    s1 = f1.spectra.symmetrized()
    s2 = f2.spectra.symmetrized()
    eta_only = (
        f1.spectra.complete
        and f2.spectra.complete
        and not np.any(s1.eigenvalues)
        and not np.any(s2.eigenvalues)
    )
    if eta_only:
        a0 = np.round(np.cos(np.linspace(0.0, math.pi, 2 * (resolution // 2) + 1)), 15)
        rows = np.hstack(
            [
                np.repeat((-a0 * l2 / l1)[:, None], f1.k, axis=1),
                np.repeat((a0 * l1 / l2)[:, None], f2.k, axis=1),
            ]
        )
        return SpectrumFamily(rows, complete=True, eta_pair=(f1.k, f2.k))

    a0, a1, a2 = _sphere_grid(resolution)
    mu = s1.eigenvalues  # (S1, k1)
    sigma = s2.eigenvalues  # (S2, k2)
    block1 = (a1[:, None, None] * mu[None, :, :] - (a0 * l2)[:, None, None]) / l1  # (G, S1, k1)
    block2 = (a2[:, None, None] * sigma[None, :, :] + (a0 * l1)[:, None, None]) / l2  # (G, S2, k2)
    G, S1, S2 = a0.size, mu.shape[0], sigma.shape[0]
    b1 = np.broadcast_to(block1[:, :, None, :], (G, S1, S2, f1.k))
    b2 = np.broadcast_to(block2[:, None, :, :], (G, S1, S2, f2.k))
    rows = np.concatenate([b1, b2], axis=3).reshape(-1, f1.k + f2.k)
    rows = np.unique(np.round(rows, 13), axis=0)
    return SpectrumFamily(rows, complete=False)


@dataclass(frozen=True)
class DetEnvelope:
    """D(t) = inf over represented unit normals of det(I - t A_nu).

    ``t_max`` is the first zero of D (the reciprocal of the largest
    eigenvalue); evaluations past it are not meaningful for the criterion.
    """

    spectra: SpectrumFamily

    @property
    def complete(self) -> bool:
        return self.spectra.complete

    @property
    def t_max(self) -> float:
        top = float(self.spectra.eigenvalues.max())
        return math.inf if top <= 0 else 1.0 / top

    def log_value(self, t: float) -> float:
        """log D(t) for 0 <= t < t_max."""
        if t == 0:
            return 0.0
        if self.spectra.eta_pair is not None:
            return self._eta_log_min(t)
        vals = np.sum(np.log1p(-t * self.spectra.eigenvalues), axis=1)
        return float(vals.min())

    def __call__(self, t: float) -> float:
        if t < self.t_max:
            return math.exp(self.log_value(t))
        # past the first zero: fall back to raw products
        vals = np.prod(1.0 - t * self.spectra.eigenvalues, axis=1)
        return float(vals.min())

    def _eta_log(self, a0: float, t: float) -> float:
        k1, k2 = self.spectra.eta_pair
        ratio = math.sqrt(k2 / k1)  # lambda_2 / lambda_1
        return k1 * math.log1p(a0 * t * ratio) + k2 * math.log1p(-a0 * t / ratio)

    def _eta_log_min(self, t: float, grid: int = 17, tol: float = 1e-10) -> float:
        """Minimise over a0 in [-1, 1]: grid scan, then golden section."""
        k1, k2 = self.spectra.eta_pair
        ratio = math.sqrt(k2 / k1)
        a_grid = np.linspace(-1.0, 1.0, grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = k1 * np.log1p(a_grid * t * ratio) + k2 * np.log1p(-a_grid * t / ratio)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        i = int(np.argmin(vals))
        best = float(vals[i])
        lo = a_grid[max(i - 1, 0)]
        hi = a_grid[min(i + 1, grid - 1)]
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        f1, f2 = self._eta_log(x1, t), self._eta_log(x2, t)
        while hi - lo > tol:
            if f1 < f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - _GOLDEN * (hi - lo)
                f1 = self._eta_log(x1, t)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + _GOLDEN * (hi - lo)
                f2 = self._eta_log(x2, t)
        return min(best, f1, f2)

    def germ_row(self) -> np.ndarray:
        """The sample attaining the infimum for small t > 0.

        Rows are ranked lexicographically by the Taylor coefficients
        -p_j / j of log det(I - tA), p_j the j-th power sum.
        """
        rows = self.spectra.eigenvalues
        keep = np.arange(rows.shape[0])
        scale = max(1.0, float(np.abs(rows).max()))
        for j in range(2, 12):
            coef = -np.sum(rows[keep] ** j, axis=1) / j
            best = coef.min()
            keep = keep[coef <= best + 1e-11 * scale**j]
            if keep.size == 1:
                break
        return rows[keep[0]]


def det_envelope(link: Link, t: float) -> float:
    """inf det(I - t h) over the link's represented unit normals."""
    if link.spectra is None:
        raise SpectraUnavailable(f"{link.name} carries no spectra")
    if t < 0:
        raise ValueError("t must be >= 0")
    return DetEnvelope(link.spectra)(t)
