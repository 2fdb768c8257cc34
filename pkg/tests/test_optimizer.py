import math

import pytest

from crystalnorm.lattice_sums import epstein_zeta
from crystalnorm.lattices import DomainPoint, Lattice, in_domain
from crystalnorm.norms import INF, PNorm
from crystalnorm.optimizer import (PHASES, SQUARE, TRIANGULAR, EpsteinZeta, LJReduced, MinResult,
                                   NMOptions, Objective, TransitionError, contour_grid,
                                   domain_grid, global_minimize, locate_transition, nelder_mead,
                                   parse_objective, phase_of, project, scan_p)

SQRT3_2 = math.sqrt(3) / 2


def dist(d: DomainPoint, q) -> float:
    return math.hypot(d.x - q[0], d.y - q[1])


def test_phase_labels():
    assert phase_of(0.5, SQRT3_2) == "triangular"
    assert phase_of(0.5, SQRT3_2 + 5e-5) == "triangular"
    assert phase_of(0.0, 1.0) == "square"
    assert phase_of(0.5, 1.05) == "rhombic-x-half"
    assert phase_of(0.1, math.sqrt(1 - 0.01)) == "boundary-arc"
    assert phase_of(0.2, 1.2) == "other"
    assert set(PHASES) == {"triangular", "square", "rhombic-x-half", "boundary-arc", "other"}


def test_project_lands_in_domain():
    for x, y in [(-0.3, 0.2), (0.8, 1.5), (0.2, 0.5), (0.1, -1.0), (0.25, 1.3)]:
        px, py = project(x, y)
        assert in_domain(px, py, 1e-15)
    assert project(0.25, 1.3) == (0.25, 1.3)


def test_domain_grid_has_both_corners():
    pts = domain_grid(8, 8)
    assert (0.0, 1.0) in pts and (0.5, SQRT3_2) in pts
    assert all(in_domain(x, y, 1e-15) for x, y in pts)


def test_parse_objective():
    assert parse_objective("lj") == LJReduced()
    assert parse_objective("zeta:6") == EpsteinZeta(6.0)
    for bad in ("zeta:2", "zeta:x", "energy"):
        with pytest.raises(ValueError):
            parse_objective(bad)


def test_nelder_mead_euclidean_triangular():
    f = Objective(EpsteinZeta(6.0), PNorm(2.0))
    r = nelder_mead(f, DomainPoint(0.4, 1.0))
    assert r.converged
    assert dist(r.point, TRIANGULAR) < 1e-5


def test_nelder_mead_lj_infinity_near_square():
    # The square is not a local minimum here: shearing it stretches a single
    # diagonal neighbour, and the energy drops to first order (see the notes).
    f = Objective(LJReduced(), PNorm(INF))
    r = nelder_mead(f, DomainPoint(0.3, 1.1))
    assert r.converged
    assert dist(r.point, SQUARE) < 1e-2
    assert r.value < f(*SQUARE) - 1e-3
    assert r.value == pytest.approx(-8.599032669, abs=1e-8)


def test_nelder_mead_constant_objective():
    start = DomainPoint(0.25, 1.2)
    r = nelder_mead(lambda x, y: 3.5, start, NMOptions(polish=False))
    assert r.value == 3.5
    assert dist(r.point, (start.x, start.y)) < 0.05


def test_nelder_mead_stays_in_domain():
    # distance to a point below the arc: the minimiser is its radial projection
    r = nelder_mead(lambda x, y: (x - 0.3) ** 2 + (y - 0.8) ** 2, DomainPoint(0.3, 1.3))
    assert in_domain(r.point.x, r.point.y, 1e-12)
    assert r.point.x == pytest.approx(0.3 / math.hypot(0.3, 0.8), abs=1e-5)
    assert r.point.y == pytest.approx(0.8 / math.hypot(0.3, 0.8), abs=1e-5)


def test_nelder_mead_reports_non_convergence(caplog):
    f = Objective(EpsteinZeta(6.0), PNorm(2.0))
    r = nelder_mead(f, DomainPoint(0.2, 1.3), NMOptions(max_iter=3, polish=False))
    assert not r.converged
    assert isinstance(r, MinResult)
    assert "without converging" in caplog.text


# s = 4 converges slowly (tail ~ R^-3), so its sums use a looser tolerance
@pytest.mark.parametrize("s,tol", [(4.0, 1e-7), (6.0, 1e-10), (12.0, 1e-10)])
def test_euclidean_global_minimum_is_triangular(s, tol):
    r = global_minimize(Objective(EpsteinZeta(s), PNorm(2.0), tol))
    assert dist(r.point, TRIANGULAR) < 1e-4


def test_global_minimize_examples():
    r = global_minimize(Objective(EpsteinZeta(6.0), PNorm(4.0)))
    assert dist(r.point, SQUARE) < 1e-4
    r = global_minimize(Objective(EpsteinZeta(6.0), PNorm(8.0)))
    assert r.point.x == pytest.approx(0.5, abs=1e-4)
    assert r.point.y == pytest.approx(1.098, abs=0.01)
    r = global_minimize(Objective(LJReduced(), PNorm(1.5)))
    assert dist(r.point, TRIANGULAR) < 1e-4


def test_global_minimize_beats_its_grid():
    f = Objective(EpsteinZeta(6.0), PNorm(2.3))
    r = global_minimize(f, (9, 9))
    assert r.value <= min(f(x, y) for x, y in domain_grid(9, 9))
    with pytest.raises(ValueError):
        global_minimize(f, (4, 12))


def test_scan_triangular_then_square():
    rows = scan_p(EpsteinZeta(6.0), [1.0, 1.5, 2.0, 3.0, 4.0, 5.0])
    assert [r.phase for r in rows] == ["triangular"] * 3 + ["square"] * 3
    assert [r.p for r in rows] == [1.0, 1.5, 2.0, 3.0, 4.0, 5.0]
    assert rows[0].csv().count(",") == 4


def test_scan_lj_at_p1_is_near_square_on_the_arc():
    # the square corner is beaten by a point on the arc at distance ~0.006
    (row,) = scan_p(LJReduced(), [1.0])
    assert row.phase == "boundary-arc"
    assert 0 < row.minimizer.x < 0.01
    assert row.value < Objective(LJReduced(), PNorm(1.0))(*SQUARE)


def test_scan_rejects_empty():
    with pytest.raises(ValueError):
        scan_p(EpsteinZeta(6.0), [])


def test_locate_transition_triangular_rhombic():
    t = locate_transition(EpsteinZeta(6.0), 2.0, 2.3, "triangular", "rhombic-x-half", tol_p=0.05)
    assert 2.0 <= t.p_lo < t.p_hi <= 2.3 and t.p_hi - t.p_lo <= 0.05


def test_locate_transition_rhombic_square():
    t = locate_transition(EpsteinZeta(6.0), 2.3, 2.6, "rhombic-x-half", "square", tol_p=0.01)
    assert 2.4 <= t.p_lo < t.p_hi <= 2.5


def test_locate_transition_rejects_bad_brackets():
    with pytest.raises(TransitionError):
        locate_transition(EpsteinZeta(6.0), 3.0, 4.0, "square", "square")
    with pytest.raises(TransitionError):
        locate_transition(EpsteinZeta(6.0), 3.0, 4.0)


def test_contour_grid():
    f = Objective(EpsteinZeta(6.0), PNorm(4.0))
    cells = contour_grid(f, (0.0, 0.5), (0.8, 1.6), 6, 9)
    assert len(cells) == 54
    assert all((v is None) == (not in_domain(x, y, 1e-12)) for x, y, v in cells)
    assert [(x, y) for x, y, _ in cells[:2]] == [(0.0, 0.8), (0.1, 0.8)]
    _, bx, by = min((v, x, y) for x, y, v in cells if v is not None)
    assert (bx, by) == (0.0, 1.0)


def test_contour_lj_infinity_minimum_cell():
    f = Objective(LJReduced(), PNorm(INF))
    cells = contour_grid(f, (0.0, 0.5), (0.85, 1.6), 11, 16)
    _, bx, by = min((v, x, y) for x, y, v in cells if v is not None)
    assert (bx, by) == (0.0, 1.0)


def test_contour_single_cell():
    f = Objective(EpsteinZeta(6.0), PNorm(3.0))
    ((x, y, v),) = contour_grid(f, (0.5, 0.5), (SQRT3_2, SQRT3_2), 1, 1)
    assert v == f(0.5, SQRT3_2)
    with pytest.raises(ValueError):
        contour_grid(f, (0.0, 0.5), (0.1, 0.5), 3, 3)


def test_reflection_symmetry():
    y = 1.2
    f = Objective(EpsteinZeta(6.0), PNorm(3.0))
    ry = math.sqrt(y)
    mirrored = Lattice((1 / ry, 0.0), (-0.01 / ry, ry))
    assert f(0.01, y) == pytest.approx(epstein_zeta(mirrored, PNorm(3.0), 6.0).value, abs=2e-10)


def test_threads_do_not_change_results(fresh_cache):
    from crystalnorm import optimizer

    one = scan_p(EpsteinZeta(6.0), [2.2, 7.0], threads=1)
    optimizer._evaluate.cache_clear()
    four = scan_p(EpsteinZeta(6.0), [2.2, 7.0], threads=4)
    assert one == four
