"""Epstein zeta functions and Lennard-Jones energies of planar lattices under a norm.

A sum over ``L`` is split at a norm radius R: the vectors with ``n(q) <= R``
are added explicitly and the rest is replaced by the integral
``(1/covol) * int_{n(x) > R} n(x)^-s dx = 2 |B| R^(2-s) / ((s-2) covol)``,
where ``|B|`` is the area of the unit ball. Comparing every lattice term with
the integral over its centred fundamental cell bounds the error of that
replacement, so ``tail_bound`` is a certified bound on ``|value - exact|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from . import _kernels
from .lattices import DomainPoint, Lattice, coefficients_in_disk, lattice_from_domain_point
from .norms import Norm, PNorm, equivalence_constants, flatten, norm_eval

DEFAULT_TOL = 1e-10
MAX_TERMS = 4e8


class ToleranceUnreachable(RuntimeError):
    pass


@dataclass(frozen=True)
class SumResult:
    value: float
    tail_bound: float
    terms_used: int


@dataclass(frozen=True)
class LJResult:
    energy: float
    lmbda: float
    reduced: float
    zeta6: SumResult
    zeta12: SumResult


def unit_ball_area(p: float) -> float:
    if math.isinf(p):
        return 4.0
    return 4.0 * gamma(1.0 + 1.0 / p) ** 2 / gamma(1.0 + 2.0 / p)


def _short_basis(basis: np.ndarray) -> np.ndarray:
    u, v = np.array(basis[0], dtype=float), np.array(basis[1], dtype=float)
    if u @ u > v @ v:
        u, v = v, u
    while True:
        v = v - round(float(u @ v) / float(u @ u)) * u
        if v @ v >= u @ u:
            return np.array([u, v])
        u, v = v, u


@dataclass(frozen=True)
class _Frame:
    """A lattice moved so that the norm becomes a plain p-norm."""

    basis: np.ndarray
    p: float
    c: float  # p(x) >= c |x|_2
    C: float  # p(x) <= C |x|_2
    area: float
    cell_radius: float  # p-norm radius of the centred fundamental cell
    ball: float

    @classmethod
    def build(cls, L: Lattice, n: Norm) -> "_Frame":
        base, T = flatten(n)
        basis = L.basis
        if not isinstance(n, PNorm):
            basis = np.array([T(basis[0]), T(basis[1])])
        basis = _short_basis(basis)
        c, C = equivalence_constants(base)
        u, v = basis
        h = 0.5 * max(np.linalg.norm(u + v), np.linalg.norm(u - v))
        return cls(basis, base.p, c, C, abs(float(np.linalg.det(basis))), C * h,
                   unit_ball_area(base.p))


def tail_bound(frame: _Frame, s: float, R: float) -> float:
    """Bound on |sum_{n(q) > R} n(q)^-s - integral estimate|."""
    H = frame.cell_radius
    if R <= 2.0 * H:
        return math.inf
    t = R - 2.0 * H
    # first order: |f(q) - f(x)| <= s (n(x) - H)^(-s-1) H over each cell
    smooth = 2.0 * frame.ball * s * H * (t ** (1 - s) / (s - 1) + H * t ** (-s) / s)
    # cells straddling the sphere n = R
    rim = 4.0 * frame.ball * R * H * (R - H) ** (-s)
    return (smooth + rim) / frame.area


def _radius_for(frame: _Frame, s: float, tol: float) -> float:
    R = max(4.0 * frame.cell_radius, 1e-300)
    while tail_bound(frame, s, R) > tol:
        R *= 2.0
        if R > 1e12 * frame.cell_radius:
            raise ToleranceUnreachable(f"tolerance {tol} not reachable")
    lo, hi = R / 2.0, R
    if tail_bound(frame, s, lo) <= tol:
        return lo
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if tail_bound(frame, s, mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi


def epstein_zeta(L: Lattice, n: Norm, s: float, tol: float = DEFAULT_TOL,
                 order: str = "lex") -> SumResult:
    """Sum of ``n(q)^-s`` over the nonzero vectors q of ``L``, to absolute accuracy ``tol``.

    ``order="lex"`` runs the compiled kernel in coefficient order;
    ``order="radius"`` adds the same terms sorted by length with ``math.fsum``.
    """
    if not s > 2:
        raise ValueError(f"the lattice sum diverges for s <= 2 (s={s})")
    if not tol > 0:
        raise ValueError("tol must be positive")
    frame = _Frame.build(L, n)
    R = _radius_for(frame, s, tol)
    euclid = R / frame.c * (1 + 1e-12)
    if math.pi * euclid**2 / frame.area > MAX_TERMS:
        raise ToleranceUnreachable(
            f"tolerance {tol} needs about {math.pi * euclid**2 / frame.area:.3g} terms")
    bound = tail_bound(frame, s, R)
    tail = 2.0 * frame.ball * R ** (2.0 - s) / ((s - 2.0) * frame.area)
    if order == "lex":
        (u0, u1), (v0, v1) = frame.basis
        half, count = _kernels.zeta_half_plane(u0, u1, v0, v1, float(frame.p), float(s), R, euclid)
        return SumResult(2.0 * half + tail, bound, 2 * count)
    if order == "radius":
        coeffs = coefficients_in_disk(frame.basis, euclid)
        coeffs = coeffs[np.any(coeffs != 0, axis=1)]
        pts = coeffs @ frame.basis
        r = norm_eval(PNorm(frame.p), pts)
        keep = r <= R
        r, pts = r[keep], pts[keep]
        idx = np.lexsort((pts[:, 1], pts[:, 0], r))
        return SumResult(math.fsum(np.append(r[idx] ** (-s), tail)), bound, len(r))
    raise ValueError(f"unknown summation order {order!r}")


def lj_energy(L: Lattice, n: Norm, tol: float = DEFAULT_TOL) -> float:
    """Lennard-Jones lattice energy zeta(12) - 2 zeta(6)."""
    z12 = epstein_zeta(L, n, 12.0, tol / 3)
    z6 = epstein_zeta(L, n, 6.0, tol / 3)
    return z12.value - 2.0 * z6.value


def lj_from_lattice(L: Lattice, n: Norm, tol: float = DEFAULT_TOL) -> LJResult:
    z6 = epstein_zeta(L, n, 6.0, tol / 3)
    z12 = epstein_zeta(L, n, 12.0, tol / 3)
    return LJResult(
        energy=z12.value - 2.0 * z6.value,
        lmbda=(z12.value / z6.value) ** (1.0 / 6.0),
        reduced=-z6.value**2 / z12.value,
        zeta6=z6,
        zeta12=z12,
    )


def lj_reduced(d: DomainPoint, n: Norm, tol: float = DEFAULT_TOL) -> LJResult:
    """Minimal LJ energy over dilations of the unit-density lattice at ``d``."""
    return lj_from_lattice(lattice_from_domain_point(d), n, tol)
