import numpy as np
import pytest

from softpack.dowker import (Arc, arc_functional, check_quadrangle,
                             dowker_table, get_engine, minimize_truncated_area)
from softpack.errors import ConstraintViolationError, ParameterError

from conftest import hexagon_cap_area

LAM = 0.1


def test_arc_degenerate_is_zero(disk):
    assert arc_functional(disk, LAM, Arc(1.2, 0.0)) == 0.0


def test_arc_sixth_matches_closed_form(disk):
    # untruncated regime: (2 sqrt(3) - pi)/6 per sixth
    got = arc_functional(disk, 0.2, Arc.between(0.0, np.pi / 3))
    assert got == pytest.approx((2 * np.sqrt(3) - np.pi) / 6, abs=2e-8)


def test_arc_sixth_truncated(disk):
    got = arc_functional(disk, LAM, Arc.between(0.3, 0.3 + np.pi / 3))
    assert got == pytest.approx((hexagon_cap_area(1.1) - np.pi) / 6, abs=2e-8)


def test_arc_full_circle(disk):
    # single cap: annulus minus one circular segment beyond the tangent line
    rho = 1.0 + LAM
    seg = rho ** 2 * np.arccos(1 / rho) - np.sqrt(rho ** 2 - 1)
    got = arc_functional(disk, LAM, Arc.full(0.7))
    assert got == pytest.approx(np.pi * (rho ** 2 - 1) - seg, abs=2e-8)


def test_arc_rotation_invariance_disk(disk):
    vals = [arc_functional(disk, LAM, Arc.between(t, t + 0.9))
            for t in (0.0, 0.5, 2.2, 4.0)]
    assert np.ptp(vals) < 1e-9


def test_quadrangle_identical_terms_cancel(disk):
    assert check_quadrangle(disk, LAM, 1.0, 1.0, 2.0, 2.0) == 0.0


def test_quadrangle_superadditivity_instance(disk):
    # degenerate inner arc: f(x1 x4) >= f(x1 x2) + f(x2 x4)
    d = check_quadrangle(disk, LAM, 0.2, 1.0, 1.0, 2.6)
    eng = get_engine(disk, LAM)
    direct = (eng.arc_area(0.2, 2.6) - eng.arc_area(0.2, 1.0)
              - eng.arc_area(1.0, 2.6))
    assert d == pytest.approx(direct, abs=1e-12)
    assert d >= -1e-9


def test_quadrangle_nesting_validated(disk):
    with pytest.raises(ConstraintViolationError):
        check_quadrangle(disk, LAM, 0.0, 2.0, 1.0, 3.0)


def test_quadrangle_random_disk_and_square(disk, square_body):
    rng = np.random.default_rng(17)
    for body in (disk, square_body):
        worst = np.inf
        for _ in range(50):
            base = rng.uniform(0, 2 * np.pi)
            w = np.sort(rng.uniform(0, 2 * np.pi, 3))
            d = check_quadrangle(body, LAM, base, base + w[0], base + w[1],
                                 base + w[2])
            worst = min(worst, d)
        assert worst >= -1e-8


def test_minimize_disk_hexagon(disk):
    a6, tiling, sym = minimize_truncated_area(disk, LAM, 6)
    assert a6 == pytest.approx(hexagon_cap_area(1.1), abs=1e-5)
    assert sym == pytest.approx(a6, abs=1e-6)
    assert len(tiling) == 6


def test_minimize_disk_untruncated(disk):
    a6, _, _ = minimize_truncated_area(disk, 0.2, 6)
    assert a6 == pytest.approx(2 * np.sqrt(3), abs=1e-5)


def test_minimize_disk_polygon_formula(disk):
    # truncation inactive for n = 8 at lambda = 0.1 (circumradius < 1.1)
    a8, _, _ = minimize_truncated_area(disk, LAM, 8)
    assert a8 == pytest.approx(8 * np.tan(np.pi / 8), abs=1e-5)


def test_minimize_large_n_approaches_disk_area(disk):
    a64, _, _ = minimize_truncated_area(disk, LAM, 64, n_contact=720)
    expect = 64 * np.tan(np.pi / 64)
    assert a64 == pytest.approx(expect, abs=1e-4)
    assert a64 > np.pi


def test_minimize_validates_n(disk):
    with pytest.raises(ParameterError):
        minimize_truncated_area(disk, LAM, 2)
    with pytest.raises(ParameterError):
        minimize_truncated_area(disk, LAM, 100, n_contact=720)


def test_hexagon_body_tiling_cell(hex_body):
    # the 6-gon of the edge-contact lattice: hexagonal cell of apothem
    # support(edge normal); its area is the exact A_6 value
    a6, tiling, sym = minimize_truncated_area(hex_body, LAM, 6)
    m = float(hex_body.support(np.array([np.pi / 6]))[0])
    cell = 6 * m * m * np.tan(np.pi / 6)
    assert a6 == pytest.approx(cell, abs=2e-5)
    assert sym == pytest.approx(a6, abs=1e-6)


def test_dowker_table_disk(disk):
    table = dowker_table(disk, LAM, 3, 8)
    defects = table.convexity_defects()
    assert all(d >= -1e-6 for d in defects.values())
    assert table.monotone_violation() <= 1e-10
    assert not table.flagged()
    # A_n >= area(M) always
    assert (table.values() >= np.pi - 1e-9).all()


def test_dowker_table_untruncated_matches_polygons(disk):
    # lambda = 0.3: circumscribed n-gons fit inside 1.3 B for n >= 5
    table = dowker_table(disk, 0.3, 5, 8)
    for n in (5, 6, 7, 8):
        assert table.entries[n][0] == pytest.approx(
            n * np.tan(np.pi / n), abs=1e-5)


def test_symmetric_restriction_no_loss(disk, hex_body):
    for body in (disk, hex_body):
        a6, _, sym = minimize_truncated_area(body, LAM, 6, symmetric=None)
        assert sym is not None
        assert abs(sym - a6) <= 1e-6
