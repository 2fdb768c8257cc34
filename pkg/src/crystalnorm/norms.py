"""Planar norms: p-norms, linear compositions and the lattice-adapted norms N_{p,L}."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class LinearMap2:
    """The linear map (x, y) -> (a x + b y, c x + d y)."""

    a: float
    b: float
    c: float
    d: float

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @classmethod
    def identity(cls) -> "LinearMap2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m) -> "LinearMap2":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    def __call__(self, pts):
        """Apply to a single point ``(x, y)`` or to an ``(n, 2)`` array."""
        arr = np.asarray(pts, dtype=float)
        if arr.ndim == 1:
            x, y = arr
            return np.array([self.a * x + self.b * y, self.c * x + self.d * y])
        out = np.empty_like(arr)
        out[:, 0] = self.a * arr[:, 0] + self.b * arr[:, 1]
        out[:, 1] = self.c * arr[:, 0] + self.d * arr[:, 1]
        return out

    def compose(self, inner: "LinearMap2") -> "LinearMap2":
        """Return ``self o inner``."""
        return LinearMap2.from_matrix(self.matrix @ inner.matrix)

    def inverse(self) -> "LinearMap2":
        det = self.det
        if det == 0.0:
            raise ValueError("singular linear map")
        return LinearMap2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def singular_values(self) -> tuple[float, float]:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return float(s[-1]), float(s[0])


@dataclass(frozen=True)
class PNorm:
    p: float

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError(f"p-norm needs p >= 1, got {self.p}")

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)


@dataclass(frozen=True)
class Composed:
    """The norm ``x -> base(map(x))``."""

    base: "Norm"
    map: LinearMap2

    def __post_init__(self):
        if self.map.det == 0.0:
            raise ValueError("composed norm needs an invertible map")


Norm = Union[PNorm, Composed]


def _pnorm_rows(xy: np.ndarray, p: float) -> np.ndarray:
    ax = np.abs(xy[..., 0])
    ay = np.abs(xy[..., 1])
    big = np.maximum(ax, ay)
    if math.isinf(p):
        return big
    if p == 1.0:
        return ax + ay
    if p == 2.0:
        return np.hypot(ax, ay)
    small = np.minimum(ax, ay)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(big > 0, small / np.where(big > 0, big, 1.0), 0.0)
    # factored form keeps large p from overflowing
    return big * (1.0 + ratio**p) ** (1.0 / p)


def flatten(n: Norm) -> tuple[PNorm, LinearMap2]:
    """Write ``n`` as ``PNorm(p) o T`` with a single map ``T``."""
    total = LinearMap2.identity()
    while isinstance(n, Composed):
        total = n.map.compose(total)
        n = n.base
    return n, total


def norm_eval(n: Norm, x) -> float | np.ndarray:
    """Evaluate ``n`` at a point, or row-wise on an ``(m, 2)`` array."""
    arr = np.asarray(x, dtype=float)
    base, T = flatten(n)
    if isinstance(n, Composed):
        arr = T(arr)
    out = _pnorm_rows(arr, base.p)
    if arr.ndim == 1:
        return float(out)
    return out


def kissing_number(n: Norm) -> int:
    base, _ = flatten(n)
    return 8 if base.p == 1.0 or base.is_inf else 6


def contact_points(p: float) -> np.ndarray:
    """Kissing configuration on the unit sphere of the p-norm."""
    if p < 1.0:
        raise ValueError(f"p-norm needs p >= 1, got {p}")
    if p == 1.0:
        pts = [(1, 0), (-1, 0), (0, 1), (0, -1),
               (0.5, 0.5), (-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5)]
    elif math.isinf(p):
        pts = [(1, 0), (-1, 0), (0, 1), (0, -1),
               (1, 1), (-1, -1), (1, -1), (-1, 1)]
    else:
        h = lp_height(p)
        pts = [(1, 0), (-1, 0), (0.5, h), (-0.5, -h), (0.5, -h), (-0.5, h)]
    return np.array(pts, dtype=float)


def lp_height(p: float) -> float:
    """Second coordinate (1 - 2^-p)^(1/p) of the contact point with first coordinate 1/2."""
    if math.isinf(p):
        return 1.0
    return (1.0 - 0.5**p) ** (1.0 / p)


def equivalence_constants(n: Norm) -> tuple[float, float]:
    """Return ``(c, C)`` with ``c |x|_2 <= n(x) <= C |x|_2`` for all x."""
    base, T = flatten(n)
    p = base.p
    if math.isinf(p):
        c, C = 2.0**-0.5, 1.0
    else:
        e = 1.0 / p - 0.5
        c, C = (1.0, 2.0**e) if e >= 0 else (2.0**e, 1.0)
    if isinstance(n, Composed):
        smin, smax = T.singular_values()
        c, C = c * smin, C * smax
    return c, C


def norm_for_lattice(p: float, lattice) -> Composed:
    """Norm whose unit sphere carries all nearest vectors of ``lattice``.

    ``lattice`` is a :class:`~crystalnorm.lattices.ReducedLattice`. The
    result is ``PNorm(p) o T`` where ``T`` sends ``lattice`` onto ``L_p``
    (onto Z^2 when ``p`` is infinite, onto L_1 when ``p = 1``).
    """
    from .lattices import canonical_lp, linear_map_between

    if not lattice.is_reduced():
        raise ValueError(f"norm_for_lattice needs a reduced basis, got {lattice}")
    T = linear_map_between(lattice, canonical_lp(p))
    return Composed(PNorm(p), T)


_FLOAT = r"[-+]?(?:inf|\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"


def _parse_p(text: str) -> float:
    p = float(text)
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {text}")
    return p


def parse_norm(spec: str) -> Norm:
    """Parse ``p:<v>``, ``composed:p:<v>;map:a,b,c,d`` or ``for-lattice:p:<v>;u1,v1,v2``."""
    s = spec.strip().lower()
    m = re.fullmatch(rf"p:({_FLOAT})", s)
    if m:
        return PNorm(_parse_p(m.group(1)))
    m = re.fullmatch(rf"composed:p:({_FLOAT});map:(.+)", s)
    if m:
        coeffs = [float(t) for t in m.group(2).split(",")]
        if len(coeffs) != 4:
            raise ValueError(f"map needs 4 coefficients: {spec!r}")
        return Composed(PNorm(_parse_p(m.group(1))), LinearMap2(*coeffs))
    m = re.fullmatch(rf"for-lattice:p:({_FLOAT});(.+)", s)
    if m:
        from .lattices import ReducedLattice

        vals = [float(t) for t in m.group(2).split(",")]
        if len(vals) != 3:
            raise ValueError(f"lattice needs u1,v1,v2: {spec!r}")
        return norm_for_lattice(_parse_p(m.group(1)), ReducedLattice(*vals))
    raise ValueError(f"unrecognised norm spec {spec!r}")


def describe(n: Norm) -> str:
    if isinstance(n, PNorm):
        return "p:inf" if n.is_inf else f"p:{n.p:g}"
    base, T = flatten(n)
    return f"composed:{describe(base)};map:{T.a!r},{T.b!r},{T.c!r},{T.d!r}"
