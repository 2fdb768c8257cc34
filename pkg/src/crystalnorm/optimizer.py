"""Minimisation of lattice energies over the half-fundamental domain D.

Points (x, y) of D stand for the unit-density lattices
Z(1/sqrt(y), 0) + Z(x/sqrt(y), sqrt(y)), with the first vector kept on the
horizontal axis (the orientation matters for non-Euclidean norms).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .lattice_sums import DEFAULT_TOL, epstein_zeta
from .lattices import DOMAIN_TOL, DomainPoint, lattice_from_domain_point
from .norms import INF, Norm, PNorm

log = logging.getLogger(__name__)

Y_MAX = 1.6
TRIANGULAR = (0.5, math.sqrt(3.0) / 2)
SQUARE = (0.0, 1.0)
PHASE_TOL = 1e-4
ARC_TOL = 1e-6
PHASES = ("triangular", "square", "rhombic-x-half", "boundary-arc", "other")


@dataclass(frozen=True)
class EpsteinZeta:
    s: float

    def __post_init__(self):
        if not self.s > 2:
            raise ValueError(f"need s > 2, got {self.s}")

    def __str__(self):
        return f"zeta:{self.s:g}"


@dataclass(frozen=True)
class LJReduced:
    def __str__(self):
        return "lj"


Kind = EpsteinZeta | LJReduced


@dataclass(frozen=True)
class Objective:
    kind: Kind
    norm: Norm
    tol: float = DEFAULT_TOL

    def __call__(self, x: float, y: float) -> float:
        return _evaluate(self, float(x), float(y))

    def at(self, d: DomainPoint) -> float:
        return self(d.x, d.y)


@lru_cache(maxsize=200_000)
def _evaluate(f: Objective, x: float, y: float) -> float:
    L = lattice_from_domain_point(DomainPoint(x, y))
    if isinstance(f.kind, EpsteinZeta):
        return float(epstein_zeta(L, f.norm, f.kind.s, f.tol).value)
    z6 = epstein_zeta(L, f.norm, 6.0, f.tol / 3).value
    z12 = epstein_zeta(L, f.norm, 12.0, f.tol / 3).value
    return float(-z6 * z6 / z12)


def parse_objective(spec: str) -> Kind:
    s = spec.strip().lower()
    if s == "lj":
        return LJReduced()
    if s.startswith("zeta:"):
        return EpsteinZeta(float(s[5:]))
    raise ValueError(f"unknown objective {spec!r} (expected zeta:<s> or lj)")


# --- domain handling ------------------------------------------------------------

def project(x: float, y: float) -> tuple[float, float]:
    """Nearest point of D (closed, y capped away from 0)."""
    x = min(max(x, 0.0), 0.5)
    r2 = x * x + y * y
    if r2 < 1.0 or y <= 0:
        y = math.sqrt(1.0 - x * x)
    return x, y


def _violation(x: float, y: float) -> float:
    px, py = project(x, y)
    return math.hypot(x - px, y - py)


def phase_of(x: float, y: float) -> str:
    if math.hypot(x - TRIANGULAR[0], y - TRIANGULAR[1]) < PHASE_TOL:
        return "triangular"
    if math.hypot(x - SQUARE[0], y - SQUARE[1]) < PHASE_TOL:
        return "square"
    if abs(x - 0.5) < PHASE_TOL:
        return "rhombic-x-half"
    if abs(x * x + y * y - 1.0) < ARC_TOL:
        return "boundary-arc"
    return "other"


# --- Nelder-Mead ------------------------------------------------------------------

@dataclass(frozen=True)
class NMOptions:
    step: float = 0.02
    xtol: float = 1e-7
    ftol: float = 1e-12
    max_iter: int = 10_000
    penalty: float = 1e3
    polish: bool = True


@dataclass(frozen=True)
class MinResult:
    point: DomainPoint
    value: float
    converged: bool = True
    evaluations: int = 0
    history: tuple = field(default=(), repr=False)


def _penalised(f: Objective, penalty: float):
    def g(z: np.ndarray) -> float:
        px, py = project(z[0], z[1])
        dist = math.hypot(z[0] - px, z[1] - py)
        return f(px, py) + penalty * dist * dist

    return g


def nelder_mead(f: Objective, start: DomainPoint, opts: NMOptions = NMOptions()) -> MinResult:
    """Simplex search on D; infeasible vertices are projected and penalised."""
    g = _penalised(f, opts.penalty)
    x0 = np.array([start.x, start.y])
    # step into D so the first simplex straddles as little boundary as possible
    sx = -opts.step if start.x + opts.step > 0.5 else opts.step
    simplex = np.array([x0, x0 + [sx, 0.0], x0 + [0.0, opts.step]])
    values = np.array([g(v) for v in simplex])
    nfev = 3
    converged = False
    for _ in range(opts.max_iter):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        diam = max(np.linalg.norm(simplex[1] - simplex[0]), np.linalg.norm(simplex[2] - simplex[0]))
        if diam < opts.xtol or values[-1] - values[0] < opts.ftol:
            converged = True
            break
        centroid = simplex[:2].mean(axis=0)
        worst = simplex[2]
        xr = centroid + (centroid - worst)
        fr = g(xr)
        nfev += 1
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = g(xe)
            nfev += 1
            simplex[2], values[2] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < values[1]:
            simplex[2], values[2] = xr, fr
            continue
        if fr < values[2]:
            xc = centroid + 0.5 * (xr - centroid)
        else:
            xc = centroid + 0.5 * (worst - centroid)
        fc = g(xc)
        nfev += 1
        if fc < min(fr, values[2]):
            simplex[2], values[2] = xc, fc
            continue
        # shrink towards the best vertex
        for i in (1, 2):
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            values[i] = g(simplex[i])
        nfev += 2
    best = int(np.argmin(values))
    px, py = project(*simplex[best])
    value = f(px, py)
    if not converged:
        log.warning("Nelder-Mead stopped after %d iterations without converging", opts.max_iter)
    result = MinResult(DomainPoint(px, py), value, converged, nfev)
    if opts.polish:
        result = boundary_polish(f, result)
    return result


def _golden(h, a: float, b: float, tol: float = 1e-9, iters: int = 200) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = h(c), h(d)
    for _ in range(iters):
        if b - a < tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = h(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = h(d)
    t = 0.5 * (a + b)
    candidates = [(h(a), a), (h(b), b), (h(t), t)]
    v, t = min(candidates)
    return t, v


def boundary_polish(f: Objective, res: MinResult, window: float = 0.05) -> MinResult:
    """Line searches along the edges of D that pass near the current minimiser."""
    x, y = res.point.x, res.point.y
    best = (res.value, x, y)
    near = 10 * PHASE_TOL
    if abs(x * x + y * y - 1.0) < near:
        # arc x -> (x, sqrt(1 - x^2))
        lo, hi = max(0.0, x - window), min(0.5, x + window)
        t, v = _golden(lambda t: f(t, math.sqrt(1.0 - t * t)), lo, hi)
        best = min(best, (v, t, math.sqrt(1.0 - t * t)))
    if abs(x - 0.5) < near:
        lo, hi = max(TRIANGULAR[1], y - window), min(Y_MAX, y + window)
        t, v = _golden(lambda t: f(0.5, t), lo, hi)
        best = min(best, (v, 0.5, t))
    if x < near:
        lo, hi = max(1.0, y - window), min(Y_MAX, y + window)
        t, v = _golden(lambda t: f(0.0, t), lo, hi)
        best = min(best, (v, 0.0, t))
    for cx, cy in (TRIANGULAR, SQUARE):
        if math.hypot(x - cx, y - cy) < near:
            best = min(best, (f(cx, cy), cx, cy))
    v, bx, by = best
    if v < res.value:
        bx, by = project(bx, by)
        return MinResult(DomainPoint(bx, by), v, res.converged, res.evaluations)
    return res


# --- grids ----------------------------------------------------------------------------

def domain_grid(nx: int, ny: int) -> list[tuple[float, float]]:
    """Boundary-fitted grid of D below y = Y_MAX; both corners are grid nodes."""
    pts = []
    for x in np.linspace(0.0, 0.5, nx):
        ymin = math.sqrt(1.0 - x * x)
        if x == 0.5:
            ymin = TRIANGULAR[1]
        for y in np.linspace(ymin, Y_MAX, ny):
            pts.append((float(x), float(y)))
    return pts


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(*it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda it: fn(*it), items))


def global_minimize(f: Objective, grid: tuple[int, int] = (12, 12), refine: int = 5,
                    threads: int = 1, opts: NMOptions | None = None) -> MinResult:
    nx, ny = grid
    if nx < 8 or ny < 8:
        raise ValueError("grid must be at least 8 x 8")
    pts = domain_grid(nx, ny)
    vals = _map(f, pts, threads)
    ranked = sorted(zip(vals, pts))
    grid_best = ranked[0][0]
    if opts is None:
        opts = NMOptions(step=0.5 / (nx - 1))
    best = None
    for v, (x, y) in ranked[:refine]:
        res = nelder_mead(f, DomainPoint(x, y), opts)
        key = (res.value, res.point.x, res.point.y)
        if best is None or key < (best.value, best.point.x, best.point.y):
            best = res
    assert best.value <= grid_best
    return best


@dataclass(frozen=True)
class PhaseRow:
    p: float
    minimizer: DomainPoint
    value: float
    phase: str

    def csv(self) -> str:
        p = "inf" if math.isinf(self.p) else f"{self.p:.12g}"
        return f"{p},{self.minimizer.x:.12g},{self.minimizer.y:.12g},{self.value:.12g},{self.phase}"


def minimise_at_p(kind: Kind, p: float, grid=(12, 12), tol: float = DEFAULT_TOL,
                  threads: int = 1) -> PhaseRow:
    f = Objective(kind, PNorm(p), tol)
    res = global_minimize(f, grid, threads=threads)
    return PhaseRow(p, res.point, res.value, phase_of(res.point.x, res.point.y))


def scan_p(kind: Kind, p_list, grid=(12, 12), tol: float = DEFAULT_TOL,
           threads: int = 1) -> list[PhaseRow]:
    p_list = list(p_list)
    if not p_list:
        raise ValueError("empty list of p values")
    return [minimise_at_p(kind, p, grid, tol, threads) for p in p_list]


def default_p_list() -> list[float]:
    return [round(1 + 0.1 * i, 10) for i in range(91)] + [12.0, 16.0, 32.0, INF]


class TransitionError(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    p_lo: float
    p_hi: float
    phase_lo: str
    phase_hi: str
    rows: tuple


def locate_transition(kind: Kind, p_lo: float, p_hi: float, phase_lo: str | None = None,
                      phase_hi: str | None = None, tol_p: float = 0.01, grid=(12, 12),
                      tol: float = DEFAULT_TOL, threads: int = 1) -> Transition:
    """Bisect on p between two phases of the minimiser."""
    lo = minimise_at_p(kind, p_lo, grid, tol, threads)
    hi = minimise_at_p(kind, p_hi, grid, tol, threads)
    phase_lo = phase_lo or lo.phase
    phase_hi = phase_hi or hi.phase
    if phase_lo == phase_hi:
        raise TransitionError(f"same phase {phase_lo!r} requested at both ends")
    if lo.phase != phase_lo or hi.phase != phase_hi:
        raise TransitionError(
            f"endpoint phases are {lo.phase!r} at p={p_lo} and {hi.phase!r} at p={p_hi}, "
            f"expected {phase_lo!r} and {phase_hi!r}")
    rows = [lo, hi]
    while hi.p - lo.p > tol_p:
        mid = minimise_at_p(kind, 0.5 * (lo.p + hi.p), grid, tol, threads)
        rows.append(mid)
        if mid.phase == phase_lo:
            lo = mid
        elif mid.phase == phase_hi:
            hi = mid
        else:
            raise TransitionError(
                f"phase {mid.phase!r} at p={mid.p} lies between {phase_lo!r} and {phase_hi!r}")
    return Transition(lo.p, hi.p, phase_lo, phase_hi, tuple(rows))


def contour_grid(f: Objective, x_range, y_range, nx: int, ny: int,
                 threads: int = 1) -> list[tuple[float, float, float | None]]:
    """Values on a rectangular grid, row-major in y; None where (x, y) is outside D."""
    xs = np.linspace(x_range[0], x_range[1], nx) if nx > 1 else np.array([x_range[0]])
    ys = np.linspace(y_range[0], y_range[1], ny) if ny > 1 else np.array([y_range[0]])
    cells = [(float(x), float(y)) for y in ys for x in xs]
    inside = [(x, y) for x, y in cells if _in_d(x, y)]
    if not inside:
        raise ValueError("the grid does not meet the domain D")
    vals = dict(zip(inside, _map(f, inside, threads)))
    return [(x, y, vals.get((x, y))) for x, y in cells]


def _in_d(x: float, y: float) -> bool:
    return -DOMAIN_TOL <= x <= 0.5 + DOMAIN_TOL and y > 0 and x * x + y * y >= 1.0 - DOMAIN_TOL
