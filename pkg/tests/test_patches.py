import math

import numpy as np
import pytest

from crystalnorm.lattices import A2, Z2, Lattice, canonical_lp, reduce
from crystalnorm.norms import INF, Composed, LinearMap2, PNorm, norm_for_lattice
from crystalnorm.patches import (HARD_CORE, Configuration, ContractViolation, bpd_energy_on_Z2,
                                 build_hex_patch, build_minimizer, build_oct_patch, hex_index,
                                 hex_number, hex_patch_coords, min_distance_graph, neighbour_basis, oct_number,
                                 oct_patch_coords, octagon_coords, predicted_min_energy,
                                 sticky_energy)


def test_predicted_energy_integer_form():
    # floor(a - sqrt(b)) computed with exact integer square roots
    for N in range(1, 3000):
        for k, (a, b) in {6: (3 * N, 12 * N - 3), 8: (4 * N, 28 * N - 12)}.items():
            r = math.isqrt(b)
            want = -(a - r) if r * r == b else -(a - r - 1)
            assert predicted_min_energy(N, k) == want
    with pytest.raises(ValueError):
        predicted_min_energy(10, 7)


@pytest.mark.parametrize("N", range(1, 400))
def test_hex_formula(N):
    assert sticky_energy(build_hex_patch(N), PNorm(2.0)) == predicted_min_energy(N, 6)


@pytest.mark.parametrize("N", range(1, 400))
def test_oct_formula(N):
    assert sticky_energy(build_oct_patch(N), PNorm(INF)) == predicted_min_energy(N, 8)


def test_figure_anchors():
    assert sticky_energy(build_hex_patch(26), PNorm(2.0)) == -60
    assert sticky_energy(build_oct_patch(16), PNorm(INF)) == -43
    assert sticky_energy(build_oct_patch(12), PNorm(INF)) == -30
    square = Configuration([(i, j) for i in range(4) for j in range(4)])
    assert sticky_energy(square, PNorm(INF)) == -42


def test_full_hexagons():
    for s in range(0, 12):
        N = hex_number(s)
        idx = hex_index(N)
        assert (idx.s, idx.k, idx.j) == (s, 0, 0)
        c = np.array(hex_patch_coords(N))
        # hexagonal distance max(|m|, |n|, |m + n|) <= s
        dist = np.max(np.abs(np.column_stack([c[:, 0], c[:, 1], c.sum(axis=1)])), axis=1)
        assert dist.max() == s and len(c) == N


def test_full_octagons():
    for s in range(1, 12):
        N = oct_number(s)
        assert len(octagon_coords(s)) == N
        c = np.array(oct_patch_coords(N))
        shifted = {tuple(q) for q in (c - c.min(axis=0)).tolist()}
        assert shifted == set(octagon_coords(s))


@pytest.mark.parametrize("coords", [hex_patch_coords, oct_patch_coords])
def test_patches_are_nested(coords):
    prev = set(coords(1))
    for N in range(2, 300):
        cur = set(coords(N))
        assert len(cur) == N and prev <= cur
        prev = cur


def test_hex_index():
    assert hex_index(7) == hex_index(7)
    assert (hex_index(8).s, hex_index(8).k, hex_index(8).j) == (1, 0, 1)
    assert (hex_index(18).s, hex_index(18).k, hex_index(18).j) == (1, 5, 1)
    with pytest.raises(ValueError):
        hex_index(0)


def _edge_set(G):
    return {tuple(e) for e in G.edges.tolist()}


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, INF])
def test_map_equivariance_of_edges(p):
    T = LinearMap2(1.4, 0.6, -0.3, 0.9)
    X = build_oct_patch(60) if p in (1.0, INF) else build_hex_patch(60)
    n = PNorm(p)
    G = min_distance_graph(X, n)
    H = min_distance_graph(X.mapped(T), Composed(n, T.inverse()))
    assert _edge_set(G) == _edge_set(H)
    assert H.min_distance == pytest.approx(G.min_distance, rel=1e-12)


def test_min_distance_graph_counts_match_energy():
    X = build_hex_patch(37)
    G = min_distance_graph(X, PNorm(2.0))
    assert G.n_edges == -sticky_energy(X, PNorm(2.0))
    assert G.min_distance == pytest.approx(1.0)
    assert G.to_csv().splitlines()[0] == "i,j,distance"


def test_hard_core():
    X = Configuration([(0, 0), (0.5, 0), (3, 3)])
    assert sticky_energy(X, PNorm(2.0)) == HARD_CORE


def test_configuration_json_round_trip():
    X = build_hex_patch(50).mapped(LinearMap2(1.1, 0.3, 0.0, 0.7))
    Y = Configuration.from_json(X.to_json())
    assert np.array_equal(X.points, Y.points)
    assert X.points.tobytes() == Y.points.tobytes()


def test_configuration_rejects_duplicates():
    with pytest.raises(ValueError):
        Configuration([(0, 0), (1, 1), (0, 0)])


def test_configuration_is_read_only():
    X = build_hex_patch(5)
    with pytest.raises(ValueError):
        X.points[0, 0] = 3.0


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0, INF])
@pytest.mark.parametrize("N", [12, 19, 100])
def test_build_minimizer_on_lp(p, N):
    X = build_minimizer(N, PNorm(p), canonical_lp(p))
    k = 8 if p in (1.0, INF) else 6
    assert sticky_energy(X, PNorm(p)) == predicted_min_energy(N, k)


def test_build_minimizer_wrong_lattice():
    with pytest.raises(ContractViolation):
        build_minimizer(30, PNorm(2.0), Z2)
    with pytest.raises(ContractViolation):
        build_minimizer(30, PNorm(INF), A2)


def test_build_minimizer_on_any_lattice(rng):
    for _ in range(10):
        u, v = rng.normal(size=(2, 2))
        L = reduce(Lattice(tuple(u), tuple(v)))
        for p in (1.0, 2.0, 3.0, INF):
            X = build_minimizer(50, norm_for_lattice(p, L), L)
            assert len(X) == 50


def test_bpd_on_z2():
    for N in range(1, 300):
        assert bpd_energy_on_Z2(build_oct_patch(N)) == predicted_min_energy(N, 8)
    with pytest.raises(ValueError):
        bpd_energy_on_Z2(build_hex_patch(10))


# |E/N + k/2| <= sqrt(12 / N) + 1/N for k = 6 and sqrt(28 / N) + 1/N for k = 8
@pytest.mark.parametrize("family,k,rate", [("hex", 6, 4.0), ("oct", 8, math.sqrt(28.0))])
def test_thermodynamic_limit(family, k, rate):
    N = 10_000
    X = build_hex_patch(N) if family == "hex" else build_oct_patch(N)
    e = sticky_energy(X, PNorm(2.0) if k == 6 else PNorm(INF))
    assert e == predicted_min_energy(N, k)
    assert abs(e / N + k / 2) <= rate / math.sqrt(N) + 1 / N


def test_t1_map_from_corollary_misses_the_optimum():
    # (x, y) -> (x + y/2, y/2) sends the diagonal (1, 1) to 1-norm length 2
    T1 = LinearMap2(1.0, 0.5, 0.0, 0.5)
    X = build_oct_patch(12).mapped(T1)
    assert sticky_energy(X, PNorm(1.0)) == -27 > predicted_min_energy(12, 8)
    a, b = neighbour_basis(canonical_lp(1.0), PNorm(1.0))
    assert sorted(map(tuple, np.abs([a + b, a - b]).tolist())) == [(0.0, 1.0), (1.0, 0.0)]
