"""Planar lattices: bases, Lagrange-Gauss reduction, the domain D and lattice maps."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .norms import INF, LinearMap2, Norm, equivalence_constants, lp_height, norm_eval

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Lattice:
    """The lattice Z u + Z v."""

    u: tuple[float, float]
    v: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "u", (float(self.u[0]), float(self.u[1])))
        object.__setattr__(self, "v", (float(self.v[0]), float(self.v[1])))
        if self.det == 0.0:
            raise ValueError("lattice basis is degenerate")

    @property
    def det(self) -> float:
        return self.u[0] * self.v[1] - self.u[1] * self.v[0]

    @property
    def basis(self) -> np.ndarray:
        """Basis vectors as the rows of a 2x2 array."""
        return np.array([self.u, self.v], dtype=float)

    def scaled(self, lam: float) -> "Lattice":
        return Lattice((lam * self.u[0], lam * self.u[1]), (lam * self.v[0], lam * self.v[1]))

    def transformed(self, T: LinearMap2) -> "Lattice":
        return Lattice(tuple(T(self.u)), tuple(T(self.v)))

    def points(self, coeffs: np.ndarray) -> np.ndarray:
        """Lattice vectors for integer coefficient rows ``(m, n)``."""
        return np.asarray(coeffs, dtype=float) @ self.basis


@dataclass(frozen=True)
class ReducedLattice:
    """Upper-triangular basis (u1, 0), (v1, v2) with u1 > 0 and v2 > 0.

    Only :func:`reduce` guarantees the full reduction conditions; check them
    with :meth:`is_reduced`. The canonical L_1 is stored in this form even
    though its second vector is the shorter one.
    """

    u1: float
    v1: float
    v2: float

    def __post_init__(self):
        if not (self.u1 > 0 and self.v2 > 0):
            raise ValueError(f"need u1 > 0 and v2 > 0, got {self}")

    def is_reduced(self, rtol: float = 1e-12) -> bool:
        tol = rtol * self.u1
        vlen = math.hypot(self.v1, self.v2)
        return -tol <= self.v1 <= 0.5 * self.u1 + tol and self.u1 <= vlen + tol

    def lattice(self) -> Lattice:
        return Lattice((self.u1, 0.0), (self.v1, self.v2))

    @property
    def covolume(self) -> float:
        return self.u1 * self.v2


@dataclass(frozen=True)
class DomainPoint:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not in_domain(self.x, self.y, DOMAIN_TOL):
            raise ValueError(f"({self.x}, {self.y}) is outside the half-fundamental domain")


#: slack on the constraints of D, so that e.g. (1/2, sqrt(3)/2) rounds inside
DOMAIN_TOL = 1e-12


def in_domain(x: float, y: float, tol: float = 0.0) -> bool:
    return -tol <= x <= 0.5 + tol and y > 0 and x * x + y * y >= 1.0 - tol


def _short_lengths(L: Lattice, radius: float) -> np.ndarray:
    coeffs = coefficients_in_disk(L.basis, radius)
    pts = L.points(coeffs)
    return np.sort(np.einsum("ij,ij->i", pts, pts))


def same_lattice_up_to_isometry(A: Lattice, B: Lattice, tol: float = 1e-9) -> bool:
    """Compare |det| and the sorted squared lengths of all vectors in a fixed disk."""
    if abs(abs(A.det) - abs(B.det)) > tol * max(1.0, abs(A.det)):
        return False
    radius = 4.0 * max(np.linalg.norm(A.basis, axis=1).max(), np.linalg.norm(B.basis, axis=1).max())
    a = _short_lengths(A, radius)
    b = _short_lengths(B, radius)
    # only compare strictly inside the disk; points on its rim may round either way
    cut = radius**2 * (1 - 1e-6)
    a, b = a[a < cut], b[b < cut]
    return a.shape == b.shape and bool(np.allclose(a, b, rtol=tol, atol=tol))


def _gauss(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if u @ u > v @ v:
        u, v = v, u
    for _ in range(10_000):
        q = round(float(u @ v) / float(u @ u))
        v = v - q * u
        if v @ v >= u @ u:
            return u, v
        u, v = v, u
    raise RuntimeError("Lagrange-Gauss reduction did not terminate")


def _upper_form(u: np.ndarray, v: np.ndarray) -> tuple[float, float, float]:
    if u[1] == 0.0:
        # already on an axis: no rounding, which keeps reduce idempotent
        return float(abs(u[0])), float(math.copysign(1.0, u[0]) * v[0]), float(abs(v[1]))
    u1 = float(math.hypot(*u))
    e = u / u1
    v1 = float(v @ e)
    v2 = float(abs(u[0] * v[1] - u[1] * v[0]) / u1)
    return u1, v1, v2


def reduce(L: Lattice) -> ReducedLattice:
    """Lagrange-Gauss reduce ``L`` and rotate/reflect it to the form (u1,0), (v1,v2)."""
    u = np.array(L.u)
    v = np.array(L.v)
    lu, lv = math.hypot(*u), math.hypot(*v)
    if abs(L.det) < 1e-14 * lu * lv:
        raise ValueError("degenerate lattice basis")
    u, v = _gauss(u, v)
    u1, v1, v2 = _upper_form(u, v)
    # v -> -v and a reflection make v1 >= 0
    v1 = abs(v1)
    if v1 > 0.5 * u1:  # only possible through rounding
        v1 = abs(v1 - u1)
    cand = [(v1 / u1, u1, v1, v2)]
    vlen = math.hypot(v1, v2)
    if abs(vlen - u1) <= 1e-12 * u1:
        # |u| = |v|: swapping the two vectors gives a second valid representative
        a1, b1, b2 = _upper_form(np.array([v1, v2]), np.array([u1, 0.0]))
        b1 = abs(b1)
        if b1 > 0.5 * a1:
            b1 = abs(b1 - a1)
        cand.append((b1 / a1, a1, b1, b2))
    _, u1, v1, v2 = min(cand)
    return ReducedLattice(u1, v1, v2)


def lattice_from_domain_point(d: DomainPoint) -> Lattice:
    ry = math.sqrt(d.y)
    return Lattice((1.0 / ry, 0.0), (d.x / ry, ry))


def reduced_from_domain_point(d: DomainPoint) -> ReducedLattice:
    ry = math.sqrt(d.y)
    return ReducedLattice(1.0 / ry, d.x / ry, ry)


def domain_point_of(L: Lattice, tol: float = 1e-9) -> DomainPoint:
    if abs(abs(L.det) - 1.0) > tol:
        raise ValueError(f"domain points need a unit-density lattice, |det| = {abs(L.det)}")
    r = reduce(L)
    x = min(max(r.v1 / r.u1, 0.0), 0.5)
    y = r.v2 / r.u1
    if x * x + y * y < 1.0:
        # reduction guarantees |v| >= |u|; absorb the last-ulp rounding
        y = math.sqrt(1.0 - x * x)
    return DomainPoint(x, y)


def linear_map_between(Lp: ReducedLattice, L: ReducedLattice) -> LinearMap2:
    """The unique linear map sending the basis of ``Lp`` onto the basis of ``L``."""
    a = L.u1 / Lp.u1
    b = (L.v1 - L.u1 * Lp.v1 / Lp.u1) / Lp.v2
    d = L.v2 / Lp.v2
    return LinearMap2(a, b, 0.0, d)


A2 = ReducedLattice(1.0, 0.5, SQRT3 / 2)
Z2 = ReducedLattice(1.0, 0.0, 1.0)
L1 = ReducedLattice(1.0, 0.5, 0.5)


def canonical_lp(p: float) -> ReducedLattice:
    """L_p for p in (1, inf); L_1 at p = 1 and Z^2 at p = inf."""
    if p == 1.0:
        return L1
    if p == INF:
        return Z2
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return ReducedLattice(1.0, 0.5, lp_height(p))


def canonical(name: str, p: float | None = None) -> ReducedLattice:
    key = name.strip().upper().replace("_", "")
    if key == "A2":
        return A2
    if key == "Z2":
        return Z2
    if key == "L1":
        return L1
    if key == "LP":
        if p is None:
            raise ValueError("L_p needs a value of p")
        if not (1.0 < p < INF):
            raise ValueError(f"L_p needs 1 < p < inf, got {p}")
        return canonical_lp(p)
    raise ValueError(f"unknown canonical lattice {name!r}")


def coefficients_in_disk(basis: np.ndarray, radius: float) -> np.ndarray:
    """All integer (m, n), including (0, 0), with |m u + n v|_2 <= radius.

    Rows come out sorted by n, then m.
    """
    u = np.asarray(basis[0], dtype=float)
    v = np.asarray(basis[1], dtype=float)
    det = abs(u[0] * v[1] - u[1] * v[0])
    uu = float(u @ u)
    uv = float(u @ v)
    vv = float(v @ v)
    r2 = radius * radius * (1 + 1e-12)
    # |m u + n v| >= |n| det / |u|
    nmax = int(math.floor(radius * math.sqrt(uu) / det * (1 + 1e-12)))
    rows = []
    for n in range(-nmax, nmax + 1):
        # uu m^2 + 2 uv n m + vv n^2 - r2 <= 0
        disc = (uv * n) ** 2 - uu * (vv * n * n - r2)
        if disc < 0:
            continue
        sq = math.sqrt(disc)
        lo = math.ceil((-uv * n - sq) / uu - 1e-9)
        hi = math.floor((-uv * n + sq) / uu + 1e-9)
        if hi < lo:
            continue
        m = np.arange(lo, hi + 1)
        pts = np.outer(m, u) + n * v
        keep = np.einsum("ij,ij->i", pts, pts) <= r2
        m = m[keep]
        rows.append(np.column_stack([m, np.full(m.shape, n)]))
    if not rows:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(rows).astype(np.int64)


def vectors_in_ball(L: Lattice, n: Norm, R: float) -> np.ndarray:
    """Every nonzero lattice vector with ``n(p) <= R``, as rows."""
    if not R > 0:
        raise ValueError("radius must be positive")
    c, _ = equivalence_constants(n)
    coeffs = coefficients_in_disk(L.basis, R / c * (1 + 1e-12))
    coeffs = coeffs[np.any(coeffs != 0, axis=1)]
    pts = L.points(coeffs)
    vals = norm_eval(n, pts)
    return pts[vals <= R * (1 + 1e-12)]


_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"


def _floats(text: str, count: int, what: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != count:
        raise ValueError(f"{what} needs {count} comma-separated numbers, got {text!r}")
    return [float(t) for t in parts]


def parse_lattice(spec: str) -> Lattice:
    """Parse ``reduced:u1,v1,v2``, ``basis:ux,uy,vx,vy``, ``domain:x,y`` or ``name:A2|Z2|L1|Lp:<p>``."""
    s = spec.strip()
    kind, _, rest = s.partition(":")
    kind = kind.lower()
    if kind == "reduced":
        return ReducedLattice(*_floats(rest, 3, "reduced lattice")).lattice()
    if kind == "basis":
        ux, uy, vx, vy = _floats(rest, 4, "basis")
        return Lattice((ux, uy), (vx, vy))
    if kind == "domain":
        x, y = _floats(rest, 2, "domain point")
        return lattice_from_domain_point(DomainPoint(x, y))
    if kind == "name":
        m = re.fullmatch(rf"(?i)(A2|Z2|L1|Lp)(?::({_NUM}|inf))?", rest)
        if not m:
            raise ValueError(f"unknown lattice name {rest!r}")
        p = float(m.group(2)) if m.group(2) else None
        return canonical(m.group(1), p).lattice()
    raise ValueError(f"unrecognised lattice spec {spec!r}")
