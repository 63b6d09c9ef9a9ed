import math

import numpy as np
import pytest

import softpack.curved as C
from softpack.errors import ParameterError


def test_distances():
    assert C.distance(0, [0, 0], [3, 4]) == pytest.approx(5.0)
    north = np.array([0, 0, 1.0])
    eq = np.array([1.0, 0, 0])
    assert C.distance(1, north, eq) == pytest.approx(np.pi / 2)
    h = np.array([np.sinh(0.7), 0, np.cosh(0.7)])
    assert C.distance(-1, C.base_point(-1), h) == pytest.approx(0.7, abs=1e-12)


def test_metric_axioms_hyperbolic():
    rng = np.random.default_rng(2)
    pts = []
    for _ in range(12):
        x, y = rng.normal(scale=0.8, size=2)
        pts.append(np.array([x, y, np.sqrt(1 + x * x + y * y)]))
    for a in pts[:4]:
        for b in pts[4:8]:
            assert C.distance(-1, a, b) == pytest.approx(C.distance(-1, b, a), abs=1e-12)
            for c in pts[8:]:
                assert (C.distance(-1, a, c)
                        <= C.distance(-1, a, b) + C.distance(-1, b, c) + 1e-12)


def test_antipodal_rejected():
    with pytest.raises(ParameterError):
        C.distance(1, np.array([0, 0, 1.0]), np.array([0, 0, -1.0]))


def test_circumradius_euclidean():
    assert C.circumradius_regular_triangle(0, 1.0) == pytest.approx(
        2 / np.sqrt(3), abs=1e-14)


def test_circumradius_small_r_limit_spherical():
    for r in (1e-4, 1e-3):
        R = C.circumradius_regular_triangle(1, r)
        assert R / r == pytest.approx(2 / np.sqrt(3), rel=1e-5)


def test_circumradius_closed_forms_and_reconstruction():
    for kappa, closed in ((1, lambda r: math.asin(2 * math.sin(r) / math.sqrt(3))),
                          (-1, lambda r: math.asinh(2 * math.sinh(r) / math.sqrt(3)))):
        for r in (0.2, 0.4, 0.5 if kappa == 1 else 1.2):
            R = C.circumradius_regular_triangle(kappa, r)
            assert R == pytest.approx(closed(r), abs=1e-12)
            if kappa == 1:
                assert R < np.pi / 2
            _, vs, _ = C.regular_triangle(kappa, r)
            for i in range(3):
                side = C.distance(kappa, vs[i], vs[(i + 1) % 3])
                assert side == pytest.approx(2 * r, abs=1e-10)


def test_sphere_radius_limit_enforced():
    with pytest.raises(ParameterError):
        C.circumradius_regular_triangle(1, 1.2)


def test_octant_triangle_area():
    a, b, c = np.eye(3)
    tri = C.CurvedTriangle(1, (a, b, c))
    assert tri.area() == pytest.approx(np.pi / 2, abs=1e-12)
    assert C.triangle_area_polar(1, c, a, b) == pytest.approx(np.pi / 2, abs=1e-9)


def test_near_ideal_hyperbolic_triangle():
    # three mutually distant vertices: all angles shrink, area approaches pi
    q = C.base_point(-1)
    e1 = np.array([1.0, 0, 0])
    vs = [C.exp_map(-1, q, C.tangent_from_angle(-1, q, e1, a), 9.0)
          for a in (0.0, 2 * np.pi / 3, 4 * np.pi / 3)]
    tri = C.CurvedTriangle(-1, tuple(vs))
    defect = tri.area()
    assert defect > 3.13  # approaches pi from below
    assert defect < np.pi
    assert C.triangle_area_polar(-1, vs[0], vs[1], vs[2]) == pytest.approx(
        defect, abs=1e-8)


def test_euclid_circle_area_gauss_bonnet():
    c = np.array([0.2, -0.1])
    a = c + np.array([1.0, 0.0])
    b = c - np.array([1.0, 0.0])
    pieces = [C.CircularArc(c, a, b, True), C.CircularArc(c, b, a, True)]
    assert C.region_area_curved(0, pieces) == pytest.approx(np.pi, abs=1e-6)


def test_gauss_bonnet_sphere_disk_and_sector():
    c = np.array([0.0, 0.0, 1.0])
    r = 0.5
    pa = C.exp_map(1, c, np.array([1.0, 0, 0]), r)
    pb = C.exp_map(1, c, np.array([-1.0, 0, 0]), r)
    pieces = [C.CircularArc(c, pa, pb, True), C.CircularArc(c, pb, pa, True)]
    assert C.region_area_curved(1, pieces) == pytest.approx(
        2 * np.pi * (1 - np.cos(r)), abs=1e-12)
    # quarter sector: two geodesic radii plus the arc
    pc = C.exp_map(1, c, np.array([0.0, 1.0, 0]), r)
    sector = [C.GeodesicSegment(c, pa), C.CircularArc(c, pa, pc, True),
              C.GeodesicSegment(pc, c)]
    assert C.region_area_curved(1, sector) == pytest.approx(
        0.25 * 2 * np.pi * (1 - np.cos(r)), abs=1e-12)


def test_gauss_bonnet_open_boundary_rejected():
    c = np.array([0.0, 0.0, 1.0])
    pa = C.exp_map(1, c, np.array([1.0, 0, 0]), 0.4)
    with pytest.raises(ParameterError, match="closed"):
        C.region_area_curved(1, [C.GeodesicSegment(c, pa)])


def test_gauss_bonnet_hyperbolic_triangle_vs_polar():
    q = C.base_point(-1)
    p1 = C.exp_map(-1, q, np.array([1.0, 0, 0]), 1.3)
    p2 = C.exp_map(-1, q, C.tangent_from_angle(-1, q, np.array([1.0, 0, 0]), 1.1), 0.9)
    pieces = [C.GeodesicSegment(q, p1), C.GeodesicSegment(p1, p2),
              C.GeodesicSegment(p2, q)]
    gb = C.region_area_curved(-1, pieces)
    assert gb == pytest.approx(C.triangle_area_polar(-1, q, p1, p2), abs=1e-10)


def test_triangle_disk_area_matches_monte_carlo():
    rng_cases = [(0, 1.0, 0.1, 31), (1, 0.4, 0.1, 32), (-1, 0.4, 0.1, 33)]
    for kappa, r, lam, seed in rng_cases:
        cfg = C.SoftDiskConfig(kappa, r, lam)
        tris, _ = C.sample_admissible_triangles(kappa, r, lam, 3, seed=seed)
        for tri in tris:
            rho, rho_hat = C.rho_functionals(cfg, tri)
            (mc_rho, se_rho), (p_soft, se_soft), _ = C.monte_carlo_triangle_ratio(
                cfg, tri, 200_000, seed=seed)
            if rho is not None and mc_rho is not None and se_rho is not None:
                assert abs(rho - mc_rho) < 5 * max(se_rho, 1e-6)


def test_rho_trivial_cases():
    cfg = C.SoftDiskConfig(0, 1.0, 0.1)
    q = np.zeros(2)
    # tiny triangle inside the core disk
    tri = C.CurvedTriangle(0, (q, np.array([0.3, 0.0]), np.array([0.1, 0.25])))
    rho, rho_hat = C.rho_functionals(cfg, tri)
    assert rho == pytest.approx(1.0, abs=1e-12)
    assert rho_hat == pytest.approx(1.0, abs=1e-12)
    # triangle inside soft but poking out of the core
    tri2 = C.CurvedTriangle(0, (q, np.array([1.05, 0.0]), np.array([0.0, 1.02])))
    rho2, rho_hat2 = C.rho_functionals(cfg, tri2)
    assert rho_hat2 == pytest.approx(1.0, abs=1e-12)
    assert rho2 == pytest.approx(
        C.triangle_disk_area(0, q, np.array([1.05, 0.0]), np.array([0.0, 1.02]), 1.0)
        / tri2.area(), abs=1e-12)


def test_rho_requires_center_vertex():
    cfg = C.SoftDiskConfig(0, 1.0, 0.1)
    tri = C.CurvedTriangle(0, (np.array([3.0, 3.0]), np.array([4.0, 3.0]),
                               np.array([3.0, 4.0])))
    with pytest.raises(ParameterError, match="vertex"):
        C.rho_functionals(cfg, tri)


def test_union_euclid_tangent_disks_exact():
    got = C._union_disks_triangle_area(0, 1.0, 1.0)
    assert got == pytest.approx(np.pi / 2, abs=1e-9)


def test_union_scales_with_r_euclid():
    s1 = C.regular_triangle_bounds(0, 1.0, 0.1)
    s2 = C.regular_triangle_bounds(0, 0.37, 0.1)
    assert s1[0] == pytest.approx(s2[0], abs=1e-9)
    assert s1[1] == pytest.approx(s2[1], abs=1e-9)


def test_sigma_lambda_to_zero():
    s, _ = C.regular_triangle_bounds(0, 1.0, 1e-7)
    assert s == pytest.approx(1.0, abs=1e-5)


def test_sigma_equals_extremal_triangle_ratio():
    for kappa, r in ((0, 1.0), (1, 0.4), (-1, 0.4)):
        cfg = C.SoftDiskConfig(kappa, r, 0.1)
        q, qp, p = C.right_triangle_on_circumradius(kappa, r, r)
        rho, rho_hat = C.rho_functionals(cfg, C.CurvedTriangle(kappa, (q, qp, p)))
        sigma, sigma_bar = C.regular_triangle_bounds(kappa, r, 0.1)
        assert rho == pytest.approx(sigma, abs=1e-9)
        assert rho_hat == pytest.approx(sigma_bar, abs=1e-9)


def test_union_matches_monte_carlo_sphere():
    kappa, r, lam = 1, 0.4, 0.1
    den = C._union_disks_triangle_area(kappa, r, (1 + lam) * r)
    _, vs, _ = C.regular_triangle(kappa, r)
    tri = C.CurvedTriangle(kappa, tuple(vs))
    rng = np.random.default_rng(5)
    pts = C._sample_in_triangle(kappa, tri, 300_000, rng)
    hit = np.zeros(len(pts), dtype=bool)
    for v in vs:
        hit |= C._dist_many(kappa, pts, v) <= (1 + lam) * r
    p = hit.mean()
    area = tri.area()
    se = area * math.sqrt(p * (1 - p) / len(pts))
    assert abs(den - p * area) < 4 * se


def test_right_triangle_construction():
    for kappa in (0, 1, -1):
        r = 0.4 if kappa != 0 else 1.0
        q, qp, p = C.right_triangle_on_circumradius(kappa, r, 1.05 * r)
        u1, _ = C.log_unit(kappa, p, q)
        u2, _ = C.log_unit(kappa, p, qp)
        ang = C.angle_between(kappa, p, u1, u2)
        assert ang == pytest.approx(np.pi / 2, abs=1e-10)
        assert C.distance(kappa, q, p) == pytest.approx(1.05 * r, abs=1e-12)


def test_wedge_monotonicity_all_kappas():
    cases = ((0, 1.0, 1.0, np.linspace(0.1, 1.5, 7)),
             (1, 0.4, 0.4, np.linspace(0.1, 1.2, 7)),
             (-1, 0.4, 0.4, np.linspace(0.1, 1.5, 7)))
    for kappa, r, d_p, grid in cases:
        rep = C.lemma_monotone_wedge(kappa, r, 0.1, d_p, grid)
        assert rep.clean, (kappa, rep.max_increase_core, rep.max_increase_soft)


def test_hypotenuse_monotonicity_all_kappas():
    for kappa, r in ((0, 1.0), (1, 0.4), (-1, 0.4)):
        R = C.circumradius_regular_triangle(kappa, r)
        rep = C.lemma_monotone_hypotenuse(kappa, r, 0.1,
                                          np.linspace(r, R - 1e-6, 7))
        assert rep.clean
        # r1 = r2 limit: equal ratios
        rep2 = C.lemma_monotone_hypotenuse(kappa, r, 0.1,
                                           [1.02 * r, 1.02 * r + 1e-9])
        assert abs(rep2.max_increase_core) < 1e-6


def test_theorem_bound_sampled_small():
    for kappa, r in ((0, 1.0), (1, 0.4), (-1, 0.4)):
        out = C.theorem_bound_check(kappa, r, 0.1, n=60, seed=21)
        assert out["violations"] == 0
        assert out["worst_core_excess"] <= 1e-8
        assert out["worst_soft_excess"] <= 1e-8


def _random_triangle(kappa, rng):
    base = C.base_point(kappa)
    e1 = np.array([1.0, 0, 0]) if kappa != 0 else np.array([1.0, 0.0])
    cap = 1.2 if kappa == 1 else 1.8
    while True:
        angs = np.sort(rng.uniform(0, 2 * np.pi, 3))
        if np.diff(angs).min() < 0.35 or angs[0] + 2 * np.pi - angs[2] < 0.35:
            continue
        dists = rng.uniform(0.3, cap, 3)
        vs = [C.exp_map(kappa, base, C.tangent_from_angle(kappa, base, e1, a), d)
              for a, d in zip(angs, dists)]
        try:
            return C.CurvedTriangle(kappa, tuple(vs))
        except Exception:
            continue


def _triangle_mc_area(kappa, tri, n, rng):
    vs = tri.vertices
    if kappa == 0:
        center = np.mean(np.stack(vs), axis=0)
    elif kappa == 1:
        center = np.mean(np.stack(vs), axis=0)
        center = center / np.linalg.norm(center)
    else:
        center = np.mean(np.stack(vs), axis=0)
        center = center / math.sqrt(-C.mdot(-1, center, center))
    rad = max(C.distance(kappa, center, v) for v in vs) + 1e-6
    pts = C.sample_in_disk(kappa, center, rad, n, rng)
    if kappa == 0:
        a, b, c = vs
        rel = pts - a
        d1, d2 = b - a, c - a
        det = d1[0] * d2[1] - d1[1] * d2[0]
        u = (rel[:, 0] * d2[1] - rel[:, 1] * d2[0]) / det
        v = (d1[0] * rel[:, 1] - d1[1] * rel[:, 0]) / det
        inside = (u >= 0) & (v >= 0) & (u + v <= 1)
    else:
        inside = C._triangle_membership(kappa, tri)(pts)
    p = inside.mean()
    area = C.disk_area(kappa, rad)
    return p * area, area * math.sqrt(max(p * (1 - p), 1e-300) / n)


def test_gauss_bonnet_vs_monte_carlo_regions():
    # 50 random geodesic triangles per curvature
    rng = np.random.default_rng(31)
    for kappa in (1, 0, -1):
        for _ in range(50):
            tri = _random_triangle(kappa, rng)
            vs = list(tri.vertices)
            u1, _ = C.log_unit(kappa, vs[0], vs[1])
            u2, _ = C.log_unit(kappa, vs[0], vs[2])
            if C.signed_angle(kappa, vs[0], u1, u2) < 0:
                vs[1], vs[2] = vs[2], vs[1]
            pieces = [C.GeodesicSegment(vs[0], vs[1]),
                      C.GeodesicSegment(vs[1], vs[2]),
                      C.GeodesicSegment(vs[2], vs[0])]
            gb = C.region_area_curved(kappa, pieces)
            est, se = _triangle_mc_area(kappa, tri, 40_000, rng)
            assert abs(gb - est) < 4 * se + 1e-9, (kappa, gb, est, se)


def test_euclid_sigma_matches_disk_closed_form():
    # the Euclidean regular-triangle core bound is scale free and equals the
    # truncated density of the hexagonal disk packing
    from softpack.lattice import disk_closed_form
    for lam in (0.05, 0.1, 0.1547, 0.3):
        s, _ = C.regular_triangle_bounds(0, 1.0, lam)
        assert s == pytest.approx(disk_closed_form(lam), abs=1e-9)


def test_soft_disk_config_validation():
    with pytest.raises(ParameterError):
        C.SoftDiskConfig(1, 1.2, 0.1)       # r >= pi/3 on the sphere
    with pytest.raises(ParameterError):
        C.SoftDiskConfig(1, 1.0, 0.6)       # soft radius past pi/2
    with pytest.raises(ParameterError):
        C.SoftDiskConfig(0, 1.0, 0.0)


def test_curved_point_validation():
    with pytest.raises(ParameterError):
        C.CurvedPoint(1, np.array([0.5, 0.5, 0.5]))
    C.CurvedPoint(1, np.array([0.0, 0.0, 1.0]))
    C.CurvedPoint(-1, np.array([0.0, 0.0, 1.0]))
    with pytest.raises(ParameterError):
        C.CurvedPoint(-1, np.array([0.0, 0.0, -1.0]))
