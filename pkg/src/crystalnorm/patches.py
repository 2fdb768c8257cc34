"""Sticky-disk minimizers H_N and Z_N, minimal-distance graphs and finite energies."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np
from scipy.spatial import cKDTree

from .lattices import ReducedLattice, vectors_in_ball
from .norms import Norm, PNorm, flatten, kissing_number, norm_eval

#: energy of a configuration violating the hard core
HARD_CORE = math.inf

EDGE_RTOL = 1e-9


class ContractViolation(RuntimeError):
    """A constructed minimizer missed its closed-form energy."""


@dataclass(frozen=True, eq=False)
class Configuration:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if len(pts) > 1 and len(cKDTree(pts).query_pairs(1e-9, output_type="ndarray")):
            raise ValueError("configuration has duplicate points")

    def __len__(self) -> int:
        return len(self.points)

    def mapped(self, T) -> "Configuration":
        return Configuration(T(self.points))

    def to_json(self) -> str:
        return json.dumps({"points": self.points.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        data = json.loads(text)
        return cls(np.array(data["points"], dtype=float))


@dataclass(frozen=True)
class HexIndex:
    s: int
    k: int
    j: int


@dataclass(frozen=True, eq=False)
class UnitGraph:
    n_vertices: int
    edges: np.ndarray  # (m, 2) index pairs, i < j, sorted
    distances: np.ndarray
    min_distance: float

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def to_csv(self) -> str:
        lines = ["i,j,distance"]
        lines += [f"{i},{j},{d:.12g}" for (i, j), d in zip(self.edges.tolist(), self.distances)]
        return "\n".join(lines) + "\n"


def hex_number(s: int) -> int:
    return 3 * s * s + 3 * s + 1


def oct_number(s: int) -> int:
    return 7 * s * s + 4 * s + 1


def hex_index(N: int) -> HexIndex:
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    s = 0
    while hex_number(s + 1) <= N:
        s += 1
    k, j = divmod(N - hex_number(s), s + 1)
    return HexIndex(s, k, j)


def _ceil_sqrt(n: int) -> int:
    r = isqrt(n)
    return r if r * r == n else r + 1


def predicted_min_energy(N: int, kissing: int) -> int:
    """Minimal sticky-disk energy of N points for a norm with the given kissing number."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    # floor(a - sqrt(b)) = a - ceil(sqrt(b)) for integer a
    if kissing == 6:
        return -(3 * N - _ceil_sqrt(12 * N - 3))
    if kissing == 8:
        return -(4 * N - _ceil_sqrt(28 * N - 12))
    raise ValueError(f"kissing number must be 6 or 8, got {kissing}")


# --- H_N on the triangular lattice -------------------------------------------

def _rot60(m: int, n: int, times: int) -> tuple[int, int]:
    # multiplication by e^{i pi/3} in the basis (1, e^{i pi/3})
    for _ in range(times % 6):
        m, n = -n, m + n
    return m, n


def hex_patch_coords(N: int) -> list[tuple[int, int]]:
    """Integer A2 coordinates of H_N, in construction order."""
    idx = hex_index(N)
    s, k, j = idx.s, idx.k, idx.j
    seen: dict[tuple[int, int], None] = {}
    for p in range(6):
        for m in range(s + 1):
            for n in range(s + 1 - m):
                seen.setdefault(_rot60(m, n, p))
    for r in range(k):
        for n in range(1, s + 2):
            seen.setdefault(_rot60(s + 1 - n, n, r))
    for n in range(1, j + 1):
        seen.setdefault(_rot60(s + 1 - n, n, k))
    coords = list(seen)
    assert len(coords) == N
    return coords


def build_hex_patch(N: int) -> Configuration:
    c = np.array(hex_patch_coords(N), dtype=float)
    pts = np.column_stack([c[:, 0] + 0.5 * c[:, 1], (math.sqrt(3.0) / 2) * c[:, 1]])
    return Configuration(pts)


# --- Z_N on the square lattice -------------------------------------------------

_KING = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)]

# Sides of the octagon, leftmost first and clockwise, as (index into the bound
# vector, step). Bounds: a >= b[0], a <= b[1], y >= b[2], y <= b[3],
# x + y >= b[4], x + y <= b[5], y - x <= b[6], x - y <= b[7].
_SIDES = {
    "A": (0, -1), "B": (6, +1), "C": (3, +1), "D": (5, +1),
    "E": (1, +1), "F": (7, +1), "G": (2, -1), "H": (4, -1),
}
_LAYER_ORDER = "HABCDBEFDCDEFG"


def octagon_coords(s: int) -> list[tuple[int, int]]:
    """The full octagon with s + 1 lattice points on each of its 8 sides."""
    w = 3 * s
    return [(a, b) for a in range(w + 1) for b in range(w + 1)
            if s <= a + b <= 5 * s and abs(a - b) <= 2 * s]


def _inside(bounds: list[int], a: int, b: int) -> bool:
    return (bounds[0] <= a <= bounds[1] and bounds[2] <= b <= bounds[3]
            and bounds[4] <= a + b <= bounds[5] and b - a <= bounds[6] and a - b <= bounds[7])


def _degree(S: set, q: tuple[int, int]) -> int:
    return sum((q[0] + dx, q[1] + dy) in S for dx, dy in _KING)


@lru_cache(maxsize=None)
def _small_sequence() -> tuple[tuple[int, int], ...]:
    """Nested sequence realising the optimum for N <= 12 inside the first octagon,
    found by exhaustive search."""
    target = octagon_coords(1)
    allowed = set(target)

    def dfs(seq, S, e):
        if len(seq) == len(target):
            return seq
        need = -predicted_min_energy(len(seq) + 1, 8) - e
        cands = sorted({(a + dx, b + dy) for a, b in S for dx, dy in _KING} & allowed - S)
        for q in cands:
            if _degree(S, q) == need:
                found = dfs(seq + [q], S | {q}, e + need)
                if found:
                    return found
        return None

    for start in target:
        found = dfs([start], {start}, 0)
        if found:
            return tuple(found)
    raise RuntimeError("no optimal growth sequence inside the first octagon")


@lru_cache(maxsize=64)
def _layer_sequence(s: int) -> tuple[tuple[int, int], ...]:
    """Points added to the octagon of size s, in order, until the next octagon is full."""
    S = set(octagon_coords(s))
    bounds = [0, 3 * s, 0, 3 * s, s, 5 * s, 2 * s, 2 * s]
    added: list[tuple[int, int]] = []
    for side in _LAYER_ORDER:
        i, step = _SIDES[side]
        bounds[i] += step
        lo = min(bounds[0], bounds[2]) - 1
        hi = max(bounds[1], bounds[3]) + 1
        new = {(a, b) for a in range(lo, hi + 1) for b in range(lo, hi + 1)
               if (a, b) not in S and _inside(bounds, a, b)}
        # fill the new side point by point, best-connected first
        while new:
            q = min(new, key=lambda t: (-_degree(S, t), t))
            new.remove(q)
            S.add(q)
            added.append(q)
    return tuple(added)


@lru_cache(maxsize=64)
def _layer_offset(s: int) -> tuple[int, int]:
    """Translation placing the octagon of size s inside the growth sequence."""
    if s == 1:
        return (0, 0)
    prev = _layer_offset(s - 1)
    full = set(octagon_coords(s - 1)) | set(_layer_sequence(s - 1))
    a0 = min(a for a, _ in full)
    b0 = min(b for _, b in full)
    # the completed layer is a translate of the next octagon, whose corner box starts at (0, 0)
    shift = (a0, b0)
    assert {(a - a0, b - b0) for a, b in full} == set(octagon_coords(s))
    return prev[0] + shift[0], prev[1] + shift[1]


def oct_patch_coords(N: int) -> list[tuple[int, int]]:
    """Integer coordinates of Z_N; Z_N is a subset of Z_{N+1}."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    if N <= oct_number(1):
        return list(_small_sequence()[:N])
    s = 1
    while oct_number(s + 1) <= N:
        s += 1
    da, db = _layer_offset(s)
    # same order as the growth: earlier layers first
    pts: list[tuple[int, int]] = list(_small_sequence())
    for r in range(1, s):
        oa, ob = _layer_offset(r)
        pts += [(a + oa, b + ob) for a, b in _layer_sequence(r)]
    pts += [(a + da, b + db) for a, b in _layer_sequence(s)[: N - len(pts)]]
    return pts


def build_oct_patch(N: int) -> Configuration:
    return Configuration(np.array(oct_patch_coords(N), dtype=float))


# --- graphs and energies -------------------------------------------------------

def _norm_frame(X: Configuration, n: Norm) -> tuple[np.ndarray, float]:
    base, T = flatten(n)
    pts = X.points if isinstance(n, PNorm) else T(X.points)
    return pts, base.p


def _pairs_within(pts: np.ndarray, p: float, r: float) -> np.ndarray:
    pairs = cKDTree(pts).query_pairs(r, p=p, output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def _pair_distances(pts: np.ndarray, pairs: np.ndarray, p: float) -> np.ndarray:
    diff = np.abs(pts[pairs[:, 0]] - pts[pairs[:, 1]])
    if math.isinf(p):
        return diff.max(axis=1)
    return (diff[:, 0] ** p + diff[:, 1] ** p) ** (1.0 / p)


def min_distance_graph(X: Configuration, n: Norm) -> UnitGraph:
    if len(X) < 2:
        raise ValueError("need at least two points")
    pts, p = _norm_frame(X, n)
    dist, _ = cKDTree(pts).query(pts, k=2, p=p)
    d = float(dist[:, 1].min())
    pairs = _pairs_within(pts, p, d * (1 + EDGE_RTOL))
    return UnitGraph(len(X), pairs, _pair_distances(pts, pairs, p), d)


def sticky_energy(X: Configuration, n: Norm) -> int | float:
    """Heitmann-Radin energy: -#(pairs at distance 1), or HARD_CORE if any pair is closer."""
    if len(X) < 2:
        return 0
    pts, p = _norm_frame(X, n)
    tree = cKDTree(pts)
    if len(tree.query_pairs(1 - EDGE_RTOL, p=p, output_type="ndarray")):
        return HARD_CORE
    return -len(tree.query_pairs(1 + EDGE_RTOL, p=p, output_type="ndarray"))


def bpd_energy_on_Z2(X: Configuration) -> int:
    """Energy for the potential equal to -1 on [1, sqrt 2], for points of Z^2."""
    pts = X.points
    if len(pts) < 2:
        return 0
    if not np.all(np.abs(pts - np.round(pts)) <= 1e-9):
        raise ValueError("bpd_energy_on_Z2 needs integer coordinates")
    pts = np.round(pts)
    # distinct integer points are at distance >= 1, and sqrt(2) is the next value after 1
    return -len(cKDTree(pts).query_pairs(math.sqrt(2.0) + 1e-9, output_type="ndarray"))


def _minimal_vectors(L: ReducedLattice, n: Norm) -> tuple[float, np.ndarray]:
    lat = L.lattice()
    u, v = lat.basis
    R = float(max(norm_eval(n, u), norm_eval(n, v)))
    vecs = vectors_in_ball(lat, n, R)
    r = norm_eval(n, vecs)
    m = float(r.min())
    vecs = vecs[r <= m * (1 + EDGE_RTOL)]
    # counter-clockwise from the positive x axis
    ang = np.mod(np.arctan2(vecs[:, 1], vecs[:, 0]), 2 * np.pi)
    return m, vecs[np.argsort(np.round(ang, 12), kind="stable")]


def neighbour_basis(L: ReducedLattice, n: Norm) -> np.ndarray:
    """Basis (a, b) of L carrying the unit-distance pattern of the standard patch.

    For kissing number 6 the vectors a, b, b - a are minimal (as for A2 and its
    generators (1, 0), (1/2, sqrt(3)/2)); for 8 the vectors a, b, a + b, a - b are
    minimal (as for Z^2 under the max norm). Raises ContractViolation if L has no
    such basis for ``n``.
    """
    k = kissing_number(n)
    m, vecs = _minimal_vectors(L, n)

    def minimal(w):
        return abs(norm_eval(n, w) - m) <= m * EDGE_RTOL

    for a in vecs:
        for b in vecs:
            det = a[0] * b[1] - a[1] * b[0]
            if det <= 0 or abs(det - L.covolume) > 1e-9 * L.covolume:
                continue
            if k == 6 and minimal(b - a):
                return np.array([a, b])
            if k == 8 and minimal(a + b) and minimal(a - b):
                return np.array([a, b])
    raise ContractViolation(f"{L} has no basis of minimal vectors for this norm")


def build_minimizer(N: int, n: Norm, L: ReducedLattice) -> Configuration:
    """Image of H_N or Z_N on ``L``; checks that the sticky energy hits its closed form.

    The patch is mapped by the linear map sending the generators of the
    standard lattice onto :func:`neighbour_basis`.
    """
    k = kissing_number(n)
    coords = hex_patch_coords(N) if k == 6 else oct_patch_coords(N)
    X = Configuration(np.array(coords, dtype=float) @ neighbour_basis(L, n))
    energy = sticky_energy(X, n)
    expected = predicted_min_energy(N, k)
    if energy != expected:
        raise ContractViolation(
            f"norm and lattice do not match: energy {energy}, expected {expected} (N={N})")
    return X
