"""Link descriptors, slope classes and the built-in catalog.

A link is a closed minimal submanifold of a round sphere, carried here only
as the data that the curvature criterion needs: its dimension ``k``, the
squared sup-norm ``alpha_sq`` of its second fundamental form over unit
normals (Frobenius norm), its normal radius and, optionally, sampled
shape-operator spectra.

The catalog covers great spheres, the minimal isoparametric hypersurfaces of
spheres and their focal submanifolds.  Their descriptors depend only on the
triple ``(g, m1, m2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy.optimize import brentq

LINK_SCHEMA = "link/v1"
SLOPE_RTOL = 1e-12
_SPECTRUM_ATOL = 1e-9
_RADIUS_GUARD = 1e-14


class InvalidLink(ValueError):
    """A link descriptor violates its invariants; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class InvalidCatalogEntry(ValueError):
    pass


class SpectraUnavailable(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumFamily:
    """Shape-operator spectra sampled over the unit normal bundle.

    ``eigenvalues`` has one row per sampled unit normal.  ``complete`` means
    the rows exhaust the normal bundle up to symmetry, so minima over rows are
    true infima.  ``eta_pair = (k1, k2)`` marks the two-factor product whose
    normals are all of pure eta type; its determinant envelope has a
    closed-form one-parameter description.
    """

    eigenvalues: np.ndarray
    complete: bool = True
    eta_pair: tuple[int, int] | None = None

    def __post_init__(self):
        arr = np.array(self.eigenvalues, dtype=float, ndmin=2)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise InvalidLink("spectra", "need a nonempty list of nonempty eigenvalue rows")
        arr.flags.writeable = False
        object.__setattr__(self, "eigenvalues", arr)

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[1]

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]

    def max_norm_sq(self) -> float:
        return float(np.max(np.sum(self.eigenvalues**2, axis=1)))

    def symmetrized(self) -> SpectrumFamily:
        """Add the negated rows; -v is a unit normal whenever v is."""
        rows = np.vstack([self.eigenvalues, -self.eigenvalues])
        rows = np.sort(rows, axis=1)
        rows = np.unique(np.round(rows, 14), axis=0)
        return SpectrumFamily(rows, self.complete, self.eta_pair)

    def __eq__(self, other):
        if not isinstance(other, SpectrumFamily):
            return NotImplemented
        return (
            self.complete == other.complete
            and self.eta_pair == other.eta_pair
            and self.eigenvalues.shape == other.eigenvalues.shape
            and bool(np.array_equal(self.eigenvalues, other.eigenvalues))
        )

    __hash__ = None


@dataclass(frozen=True)
class Link:
    name: str
    k: int
    alpha_sq: float
    normal_radius: float
    spectra: SpectrumFamily | None = None
    provenance: str = "user"
    # exact slope bookkeeping for catalog entries and their products
    alpha_sq_exact: Fraction | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or isinstance(self.k, bool) or self.k < 1:
            raise InvalidLink("k", f"dimension must be an integer >= 1, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if not math.isfinite(self.alpha_sq) or self.alpha_sq < 0:
            raise InvalidLink("alpha_sq", f"must be finite and >= 0, got {self.alpha_sq!r}")
        R = self.normal_radius
        if not math.isfinite(R) or R <= 0 or R > math.pi + _RADIUS_GUARD:
            raise InvalidLink("normal_radius", f"must lie in (0, pi], got {R!r}")
        if self.spectra is not None:
            self._check_spectra()

    def _check_spectra(self):
        spec = self.spectra
        if spec.k != self.k:
            raise InvalidLink("spectra", f"rows have {spec.k} eigenvalues, expected k={self.k}")
        traces = np.abs(spec.eigenvalues.sum(axis=1))
        scale = 1.0 + np.abs(spec.eigenvalues).max()
        if traces.max() > _SPECTRUM_ATOL * scale * self.k:
            raise InvalidLink("spectra", "every sample must be trace-free (minimal link)")
        top = spec.max_norm_sq()
        if abs(top - self.alpha_sq) > 1e-9 * max(1.0, self.alpha_sq):
            raise InvalidLink(
                "alpha_sq", f"{self.alpha_sq!r} disagrees with spectra maximum {top!r}"
            )

    @property
    def slope(self) -> float:
        return self.alpha_sq / self.k

    @property
    def exact_slope(self) -> Fraction | None:
        if self.alpha_sq_exact is None:
            return None
        return self.alpha_sq_exact / self.k

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema": LINK_SCHEMA,
            "name": self.name,
            "k": self.k,
            "alpha_sq": float(self.alpha_sq),
            "normal_radius": float(self.normal_radius),
            "provenance": self.provenance,
        }
        if self.alpha_sq_exact is not None:
            out["alpha_sq_exact"] = str(self.alpha_sq_exact)
        if self.spectra is not None:
            out["spectra"] = self.spectra.eigenvalues.tolist()
            out["spectra_complete"] = self.spectra.complete
            if self.spectra.eta_pair is not None:
                out["spectra_eta_pair"] = list(self.spectra.eta_pair)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Link:
        if not isinstance(data, dict):
            raise InvalidLink("<root>", "expected a JSON object")
        schema = data.get("schema", LINK_SCHEMA)
        if schema != LINK_SCHEMA:
            raise InvalidLink("schema", f"unsupported schema {schema!r}")
        for key in ("name", "k", "alpha_sq", "normal_radius"):
            if key not in data:
                raise InvalidLink(key, "missing")
        k = data["k"]
        if isinstance(k, float) and k.is_integer():
            k = int(k)
        if isinstance(k, bool) or not isinstance(k, int):
            raise InvalidLink("k", f"expected an integer, got {k!r}")
        alpha_sq = _number(data, "alpha_sq")
        R = _number(data, "normal_radius")
        exact = data.get("alpha_sq_exact")
        if exact is not None:
            try:
                exact = Fraction(exact)
            except (TypeError, ValueError, ZeroDivisionError):
                raise InvalidLink("alpha_sq_exact", f"not a rational {exact!r}") from None
        spectra = None
        if data.get("spectra") is not None:
            rows = data["spectra"]
            if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
                raise InvalidLink("spectra", "expected a nonempty list of eigenvalue lists")
            if len({len(r) for r in rows}) != 1:
                raise InvalidLink("spectra", "rows have differing lengths")
            try:
                arr = np.array(rows, dtype=float)
            except (TypeError, ValueError):
                raise InvalidLink("spectra", "eigenvalues must be numbers") from None
            pair = data.get("spectra_eta_pair")
            spectra = SpectrumFamily(
                arr,
                complete=bool(data.get("spectra_complete", False)),
                eta_pair=tuple(pair) if pair is not None else None,
            )
        return cls(
            name=str(data["name"]),
            k=k,
            alpha_sq=alpha_sq,
            normal_radius=R,
            spectra=spectra,
            provenance=str(data.get("provenance", "user")),
            alpha_sq_exact=exact,
        )


def _number(data: dict[str, Any], key: str) -> float:
    val = data[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise InvalidLink(key, f"expected a number, got {val!r}")
    return float(val)


@dataclass(frozen=True)
class SlopeClass:
    slope: float
    letter: str  # "a" | "b" | "c"

    @property
    def roman(self) -> str:
        return {"a": "I", "b": "both", "c": "II"}[self.letter]

    @property
    def in_class_I(self) -> bool:
        return self.letter in ("a", "b")

    @property
    def in_class_II(self) -> bool:
        return self.letter in ("b", "c")


def classify(link: Link, rtol: float = SLOPE_RTOL) -> SlopeClass:
    """Slope class of a link: (a) below one, (b) equal to one, (c) above."""
    exact = link.exact_slope
    if exact is not None:
        letter = "a" if exact < 1 else ("b" if exact == 1 else "c")
        return SlopeClass(float(exact), letter)
    s = link.slope
    if abs(s - 1.0) <= rtol:
        letter = "b"
    else:
        letter = "a" if s < 1 else "c"
    return SlopeClass(s, letter)


# ----------------------------------------------------------------------------
# catalog constructors
# ----------------------------------------------------------------------------

def _family(rows) -> SpectrumFamily:
    return SpectrumFamily(np.asarray(rows, dtype=float), complete=True).symmetrized()


def _clamped_arccos(x: float) -> float:
    return math.acos(min(1.0, max(-1.0, x)))


def make_sphere(d: int) -> Link:
    """Great hypersphere S^d: totally geodesic, normal radius pi."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidCatalogEntry(f"invalid dimension {d!r} for a sphere")
    d = int(d)
    return Link(
        name=f"S^{d}",
        k=d,
        alpha_sq=0.0,
        normal_radius=math.pi,
        spectra=_family([[0.0] * d]),
        provenance=f"catalog:sphere:{d}",
        alpha_sq_exact=Fraction(0),
    )


def _check_pattern(g: int, m1: int, m2: int):
    if g not in (1, 2, 3, 4, 6):
        raise InvalidCatalogEntry(f"g must be one of 1,2,3,4,6, got {g!r}")
    for m in (m1, m2):
        if not isinstance(m, (int, np.integer)) or m < 1:
            raise InvalidCatalogEntry(f"multiplicities must be integers >= 1, got {(m1, m2)!r}")
    if g == 3 and not (m1 == m2 and m1 in (1, 2, 4, 8)):
        raise InvalidCatalogEntry(f"g=3 needs m1=m2 in {{1,2,4,8}}, got {(m1, m2)}")
    if g == 6 and not (m1 == m2 and m1 in (1, 2)):
        raise InvalidCatalogEntry(f"g=6 needs m1=m2 in {{1,2}}, got {(m1, m2)}")


def _multiplicities(g: int, m1: int, m2: int) -> list[int]:
    return [m1 if beta % 2 == 0 else m2 for beta in range(g)]


def _principal_curvatures(g: int, m1: int, m2: int) -> list[tuple[float, int]]:
    """Principal curvatures cot(theta_beta) of the minimal leaf with multiplicities."""
    mult = _multiplicities(g, m1, m2)
    if g == 1:
        return [(0.0, m1)]
    step = math.pi / g

    def mean_curvature(t1):
        return sum(m / math.tan(t1 + b * step) for b, m in enumerate(mult))

    # mean curvature decreases from +inf to -inf across (0, pi/g)
    t1 = brentq(mean_curvature, 1e-12, step - 1e-12, xtol=1e-15, rtol=1e-15)
    return [(1.0 / math.tan(t1 + b * step), m) for b, m in enumerate(mult)]


def _iso_dimension(g: int, m1: int, m2: int) -> int:
    return {1: m1, 2: m1 + m2, 3: 3 * m1, 4: 2 * (m1 + m2), 6: 6 * m1}[g]


def _iso_cos_radius(g: int, m1: int, m2: int) -> float:
    lo, tot = min(m1, m2), m1 + m2
    if g == 1:
        return -1.0
    if g == 2:
        return 1.0 - 2.0 * lo / tot
    if g == 3:
        return 0.5
    if g == 4:
        return math.sqrt(1.0 - lo / tot)
    return math.sqrt(3.0) / 2.0


def make_isoparametric_hypersurface(g: int, m1: int, m2: int) -> Link:
    """Minimal isoparametric hypersurface with g principal curvatures.

    Its slope is exactly g - 1.  The spectra hold the principal curvatures of
    the unit normal and its negative, which exhausts the normal bundle.
    """
    _check_pattern(g, m1, m2)
    g, m1, m2 = int(g), int(m1), int(m2)
    k = _iso_dimension(g, m1, m2)
    row: list[float] = []
    for kappa, m in _principal_curvatures(g, m1, m2):
        row.extend([kappa] * m)
    row_arr = np.array(row) - np.mean(row)  # strip brentq residue from the trace
    alpha_exact = Fraction((g - 1) * k)
    return Link(
        name=f"iso(g={g};{m1},{m2})",
        k=k,
        alpha_sq=float(alpha_exact),
        normal_radius=_clamped_arccos(_iso_cos_radius(g, m1, m2)),
        spectra=_rescaled(_family([row_arr]), float(alpha_exact)),
        provenance=f"catalog:iso:{g}:{m1}:{m2}",
        alpha_sq_exact=alpha_exact,
    )


def _rescaled(fam: SpectrumFamily, alpha_sq: float) -> SpectrumFamily:
    # rounding in the principal angles leaves ~1e-15 drift in sum(kappa^2)
    top = fam.max_norm_sq()
    if top == 0:
        return fam
    return SpectrumFamily(fam.eigenvalues * math.sqrt(alpha_sq / top), fam.complete)


def make_focal(g: int, m1: int, m2: int, side: str) -> Link:
    """Focal submanifold M_+ (side="plus") or M_- of an isoparametric foliation.

    M_+ collapses the m1-curvature direction, so it has dimension
    (g/2)(m1+m2) - m1 for even g; for every unit normal its shape operator has
    eigenvalues cot(j*pi/g), j = 1..g-1, with multiplicities alternating
    between the surviving pair.
    """
    if g == 1:
        raise InvalidCatalogEntry("g=1 has no focal submanifold of positive dimension")
    if side not in ("plus", "minus"):
        raise InvalidCatalogEntry(f"side must be 'plus' or 'minus', got {side!r}")
    _check_pattern(g, m1, m2)
    g, m1, m2 = int(g), int(m1), int(m2)
    # (first, second) multiplicities seen by odd and even j
    odd, even = (m2, m1) if side == "plus" else (m1, m2)
    row: list[float] = []
    for j in range(1, g):
        kappa = 0.0 if 2 * j == g else 1.0 / math.tan(j * math.pi / g)
        row.extend([kappa] * (odd if j % 2 else even))
    k = len(row)
    alpha_exact = {
        2: Fraction(0),
        3: Fraction(k, 3),
        4: Fraction(2 * odd),
        6: Fraction(4 * k, 3),
    }[g]
    sign = "+" if side == "plus" else "-"
    return Link(
        name=f"focal{sign}(g={g};{m1},{m2})",
        k=k,
        alpha_sq=float(alpha_exact),
        normal_radius=2.0 * math.pi / g,
        spectra=_rescaled(_family([row]), float(alpha_exact)),
        provenance=f"catalog:focal:{g}:{m1}:{m2}:{side}",
        alpha_sq_exact=alpha_exact,
    )


def catalog_enumerate(max_dim: int) -> list[Link]:
    """Every catalog link of dimension at most ``max_dim``, in a fixed order.

    Data-identical duplicates are skipped: g=1 hypersurfaces are the spheres,
    g=2 focal sets appear once per dimension, and g=4 focal sets use the plus
    side over ordered pairs (M_-(m1,m2) has the data of M_+(m2,m1)).
    """
    out: list[tuple[tuple, Link]] = []
    if max_dim < 1:
        return []
    for d in range(1, max_dim + 1):
        out.append(((d, 0, d), make_sphere(d)))
    for m1 in range(1, max_dim + 1):
        for m2 in range(m1, max_dim + 1):
            if m1 + m2 <= max_dim:
                out.append(((m1 + m2, 1, 2, m1, m2), make_isoparametric_hypersurface(2, m1, m2)))
            if 2 * (m1 + m2) <= max_dim:
                out.append(((2 * (m1 + m2), 1, 4, m1, m2), make_isoparametric_hypersurface(4, m1, m2)))
    for m in (1, 2, 4, 8):
        if 3 * m <= max_dim:
            out.append(((3 * m, 1, 3, m), make_isoparametric_hypersurface(3, m, m)))
    for m in (1, 2):
        if 6 * m <= max_dim:
            out.append(((6 * m, 1, 6, m), make_isoparametric_hypersurface(6, m, m)))
    for d in range(1, max_dim + 1):
        out.append(((d, 2, 2, d), make_focal(2, d, d, "plus")))
    for m in (1, 2, 4, 8):
        for side in ("plus", "minus"):
            if 2 * m <= max_dim:
                out.append(((2 * m, 2, 3, m, side), make_focal(3, m, m, side)))
    for m1 in range(1, max_dim + 1):
        for m2 in range(1, max_dim + 1):
            if m1 + 2 * m2 <= max_dim:
                out.append(((m1 + 2 * m2, 2, 4, m1, m2), make_focal(4, m1, m2, "plus")))
    for m in (1, 2):
        for side in ("plus", "minus"):
            if 5 * m <= max_dim:
                out.append(((5 * m, 2, 6, m, side), make_focal(6, m, m, side)))
    out.sort(key=lambda item: item[0])
    return [link for _, link in out]


def resolve_catalog_id(ref: str) -> Link:
    """Build a catalog link from an id such as ``sphere:3``, ``iso:3:1:1``
    or ``focal:4:1:2:plus`` (the provenance string minus ``catalog:``)."""
    parts = ref.removeprefix("catalog:").split(":")
    try:
        if parts[0] == "sphere" and len(parts) == 2:
            return make_sphere(int(parts[1]))
        if parts[0] == "iso" and len(parts) == 4:
            return make_isoparametric_hypersurface(*map(int, parts[1:]))
        if parts[0] == "focal" and len(parts) == 5:
            g, m1, m2 = map(int, parts[1:4])
            return make_focal(g, m1, m2, parts[4])
    except ValueError as exc:
        raise InvalidCatalogEntry(f"bad catalog id {ref!r}: {exc}") from None
    raise InvalidCatalogEntry(f"unknown catalog id {ref!r}")
