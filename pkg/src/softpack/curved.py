"""Spherical, Euclidean and hyperbolic kernel: distances, triangle and disk
areas, density functionals of soft disks, and the regular-triangle bounds.

Points live in their standard embeddings: unit vectors in R^3 for curvature
+1, pairs in R^2 for curvature 0, and unit-hyperboloid vectors (x^2 + y^2
- z^2 = -1, z > 0) for curvature -1.  Areas of triangle/disk intersections
are 1-d quadratures in the polar angle around a vertex or the circumcenter,
with closed-form ray hits; Gauss-Bonnet assembly over explicit boundary
pieces is kept as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ParameterError

KAPPAS = (1, 0, -1)
_GAUSS_N = 48
_GX, _GW = np.polynomial.legendre.leggauss(_GAUSS_N)
_GX24, _GW24 = np.polynomial.legendre.leggauss(24)


def _gauss_panel(f, a: float, b: float, order48: bool = True) -> float:
    mid = 0.5 * (b - a)
    x, w = (_GX, _GW) if order48 else (_GX24, _GW24)
    return mid * float(np.sum(w * f(0.5 * (a + b) + mid * x)))


def _adaptive_gauss(f, a: float, b: float, tol: float = 1e-11,
                    depth: int = 28) -> float:
    """Recursive Gauss quadrature (24 vs 48 nodes) for piecewise-smooth
    integrands with possible boundary layers."""
    coarse = _gauss_panel(f, a, b, order48=False)
    fine = _gauss_panel(f, a, b, order48=True)
    if abs(fine - coarse) <= tol * max(1.0, abs(fine)) or depth <= 0:
        return fine
    m = 0.5 * (a + b)
    half_tol = 0.6 * tol
    return (_adaptive_gauss(f, a, m, half_tol, depth - 1)
            + _adaptive_gauss(f, m, b, half_tol, depth - 1))


def _check_kappa(kappa: int):
    if kappa not in KAPPAS:
        raise ParameterError("curvature must be one of +1, 0, -1")


# ---------------------------------------------------------------------- #
# embedding primitives

def base_point(kappa: int) -> np.ndarray:
    _check_kappa(kappa)
    if kappa == 0:
        return np.zeros(2)
    return np.array([0.0, 0.0, 1.0])


def mdot(kappa: int, a, b):
    """Ambient inner product (Lorentzian for kappa = -1)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if kappa == -1:
        return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]
    return np.sum(a * b, axis=-1)


def validate_point(kappa: int, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if kappa == 0:
        if p.shape[-1] != 2 or not np.all(np.isfinite(p)):
            raise ParameterError("plane points are finite pairs")
        return p
    if p.shape[-1] != 3:
        raise ParameterError("curved points are 3-vectors in the embedding")
    c = mdot(kappa, p, p)
    target = 1.0 if kappa == 1 else -1.0
    # the quadratic form cancels catastrophically for far hyperbolic points;
    # 1e-12 is achievable only up to that conditioning
    tol = max(1e-12, 64.0 * np.finfo(float).eps * float(np.max(p * p)))
    if abs(float(c) - target) > tol or (kappa == -1 and p[..., 2] <= 0):
        raise ParameterError(f"point violates the embedding constraint: <p,p> = {c}")
    return p


@dataclass(frozen=True)
class CurvedPoint:
    """A point of the curvature-kappa plane in its embedding coordinates."""

    kappa: int
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords",
                           validate_point(self.kappa, np.asarray(self.coords, float)))


def distance(kappa: int, a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    if kappa == 0:
        return float(np.linalg.norm(a - b))
    if kappa == 1:
        c = float(np.clip(mdot(1, a, b), -1.0, 1.0))
        if c <= -1.0 + 1e-15:
            raise ParameterError("antipodal points have no unique geodesic")
        return math.acos(c)
    c = float(-mdot(-1, a, b))
    return math.acosh(max(c, 1.0))


def log_unit(kappa: int, p, q):
    """(unit tangent at p toward q, distance)."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    d = distance(kappa, p, q)
    if d < 1e-15:
        raise ParameterError("log map of coincident points")
    if kappa == 0:
        return (q - p) / d, d
    if kappa == 1:
        v = q - math.cos(d) * p
        return v / math.sin(d), d
    v = q - math.cosh(d) * p
    return v / math.sinh(d), d


def exp_map(kappa: int, p, v, t: float):
    """Point at geodesic distance t from p along the unit tangent v,
    renormalized onto the embedding surface."""
    p, v = np.asarray(p, float), np.asarray(v, float)
    if kappa == 0:
        return p + t * v
    if kappa == 1:
        q = math.cos(t) * p + math.sin(t) * v
        return q / np.linalg.norm(q)
    q = math.cosh(t) * p + math.sinh(t) * v
    return q / math.sqrt(-mdot(-1, q, q))


def rot90(kappa: int, p, v):
    """The tangent at p obtained by rotating v by +90 degrees in the
    oriented tangent plane."""
    p, v = np.asarray(p, float), np.asarray(v, float)
    if kappa == 0:
        return np.array([-v[1], v[0]])
    if kappa == 1:
        return np.cross(p, v)
    w = np.cross(p, v)
    return np.array([w[0], w[1], -w[2]])


def tangent_from_angle(kappa: int, p, ref, ang: float):
    """Unit tangent at p making signed angle ang with the unit tangent ref."""
    return math.cos(ang) * np.asarray(ref, float) + math.sin(ang) * rot90(kappa, p, ref)


def signed_angle(kappa: int, p, u, v) -> float:
    """Signed angle from tangent u to tangent v at p, in (-pi, pi]."""
    e2 = rot90(kappa, p, u)
    x = float(mdot(kappa, u, v))
    y = float(mdot(kappa, e2, v))
    return math.atan2(y, x)


def angle_between(kappa: int, p, u, v) -> float:
    return abs(signed_angle(kappa, p, u, v))


# ---------------------------------------------------------------------- #
# area elements and ray hits

def sector_area_fn(kappa: int):
    """A(t): area of a unit-angle geodesic sector of radius t."""
    if kappa == 0:
        return lambda t: 0.5 * t * t
    if kappa == 1:
        return lambda t: 1.0 - np.cos(t)
    return lambda t: np.cosh(t) - 1.0


def disk_area(kappa: int, r: float) -> float:
    return float(2.0 * math.pi * sector_area_fn(kappa)(r))


def circumference(kappa: int, r: float) -> float:
    if kappa == 0:
        return 2.0 * math.pi * r
    if kappa == 1:
        return 2.0 * math.pi * math.sin(r)
    return 2.0 * math.pi * math.sinh(r)


def circle_geodesic_curvature(kappa: int, r: float) -> float:
    if kappa == 0:
        return 1.0 / r
    if kappa == 1:
        return 1.0 / math.tan(r)
    return 1.0 / math.tanh(r)


def ray_to_line(kappa: int, dfoot: float, delta):
    """Distance along a ray to a geodesic line at foot distance dfoot, where
    delta is the angle between the ray and the foot direction; inf when the
    ray misses the line."""
    delta = np.asarray(delta, dtype=float)
    c = np.cos(delta)
    out = np.full(delta.shape, np.inf)
    ok = c > 1e-14
    if kappa == 0:
        out[ok] = dfoot / c[ok]
    elif kappa == 1:
        out[ok] = np.arctan(math.tan(dfoot) / c[ok])
    else:
        x = math.tanh(dfoot) / c[ok]
        sub = x < 1.0 - 1e-15
        vals = np.full(x.shape, np.inf)
        vals[sub] = np.arctanh(x[sub])
        out[ok] = vals
    return out


def ray_circle_interval(kappa: int, d_center: float, delta, radius: float):
    """Parameter interval [t0, t1] where a unit-speed ray meets the disk of
    the given radius whose center sits at distance d_center from the ray
    origin, at angle delta from the ray direction.  Returns (t0, t1) arrays
    with t0 > t1 (empty) where the ray misses the disk."""
    delta = np.asarray(delta, dtype=float)
    cd = np.cos(delta)
    if kappa == 0:
        # t^2 - 2 t d cos(delta) + d^2 - r^2 = 0
        disc = radius * radius - d_center * d_center * (1.0 - cd * cd)
        ok = disc >= 0
        root = np.sqrt(np.maximum(disc, 0.0))
        t0 = np.where(ok, d_center * cd - root, 1.0)
        t1 = np.where(ok, d_center * cd + root, 0.0)
        return t0, t1
    if kappa == 1:
        # cos(dist) = cos(d) cos t + sin(d) cos(delta) sin t = cos(r)
        a, b, k = math.cos(d_center), math.sin(d_center) * cd, math.cos(radius)
        # z = tan(t/2):  (-a - k) z^2 + 2 b z + (a - k) = 0
        A, Bq, C = -(a + k), 2.0 * b, a - k
    else:
        # cosh(dist) = cosh(d) cosh t - sinh(d) cos(delta) sinh t = cosh(r)
        a, b, k = math.cosh(d_center), math.sinh(d_center) * cd, math.cosh(radius)
        # z = tanh(t/2):  (a + k) z^2 - 2 b z + (a - k) = 0
        A, Bq, C = a + k, -2.0 * b, a - k
    A = np.broadcast_to(A, delta.shape).astype(float) if np.ndim(A) == 0 else A
    Bq = np.broadcast_to(Bq, delta.shape) if np.ndim(Bq) == 0 else Bq
    disc = Bq * Bq - 4.0 * A * C
    ok = disc >= 0
    root = np.sqrt(np.maximum(disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z0 = (-Bq - root) / (2.0 * A)
        z1 = (-Bq + root) / (2.0 * A)
    zlo, zhi = np.minimum(z0, z1), np.maximum(z0, z1)
    if kappa == 1:
        t0, t1 = 2.0 * np.arctan(zlo), 2.0 * np.arctan(zhi)
    else:
        inside = (np.abs(zlo) < 1) & (np.abs(zhi) < 1)
        ok = ok & inside
        t0 = 2.0 * np.arctanh(np.clip(zlo, -1 + 1e-16, 1 - 1e-16))
        t1 = 2.0 * np.arctanh(np.clip(zhi, -1 + 1e-16, 1 - 1e-16))
    t0 = np.where(ok, t0, 1.0)
    t1 = np.where(ok, t1, 0.0)
    return t0, t1


# ---------------------------------------------------------------------- #
# triangles

@dataclass(frozen=True)
class CurvedTriangle:
    kappa: int
    vertices: tuple  # three embedding coordinate arrays

    def __post_init__(self):
        vs = tuple(validate_point(self.kappa, v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if self.area() <= 0:
            raise ParameterError("triangle has nonpositive area")

    @classmethod
    def from_points(cls, a: CurvedPoint, b: CurvedPoint, c: CurvedPoint):
        if not (a.kappa == b.kappa == c.kappa):
            raise ParameterError("mixed curvatures")
        return cls(a.kappa, (a.coords, b.coords, c.coords))

    def angles(self) -> np.ndarray:
        out = []
        for i in range(3):
            p = self.vertices[i]
            u, _ = log_unit(self.kappa, p, self.vertices[(i + 1) % 3])
            v, _ = log_unit(self.kappa, p, self.vertices[(i + 2) % 3])
            out.append(angle_between(self.kappa, p, u, v))
        return np.asarray(out)

    def sides(self) -> np.ndarray:
        return np.asarray([
            distance(self.kappa, self.vertices[(i + 1) % 3], self.vertices[(i + 2) % 3])
            for i in range(3)])

    def area(self) -> float:
        """Angle excess/defect; Euclidean case via the cross product."""
        if self.kappa == 0:
            a, b, c = self.vertices
            return abs(0.5 * ((b[0] - a[0]) * (c[1] - a[1])
                              - (b[1] - a[1]) * (c[0] - a[0])))
        ang = []
        for i in range(3):
            p = self.vertices[i]
            u, _ = log_unit(self.kappa, p, self.vertices[(i + 1) % 3])
            v, _ = log_unit(self.kappa, p, self.vertices[(i + 2) % 3])
            ang.append(angle_between(self.kappa, p, u, v))
        s = sum(ang)
        return float(s - math.pi) if self.kappa == 1 else float(math.pi - s)


def _foot_on_line(kappa: int, q, a, b):
    """(distance from q to geodesic(a, b), unit tangent at q toward the foot)."""
    q, a, b = (np.asarray(x, float) for x in (q, a, b))
    if kappa == 0:
        e = (b - a) / np.linalg.norm(b - a)
        f = a + np.dot(q - a, e) * e
        d = float(np.linalg.norm(q - f))
        if d < 1e-15:
            raise ParameterError("apex lies on the opposite side line")
        return d, (f - q) / d
    if kappa == 1:
        n = np.cross(a, b)
        n = n / np.linalg.norm(n)
        s = float(np.dot(q, n))
        d = math.asin(max(-1.0, min(1.0, abs(s))))
        if d >= 0.5 * math.pi - 1e-12:
            # apex is the pole of the side line: every ray hits at pi/2
            return d, None
        f = q - s * n
        f = f / np.linalg.norm(f)
    else:
        n = np.cross(a, b)
        n = np.array([n[0], n[1], -n[2]])          # Lorentz-orthogonal to a, b
        nn = float(mdot(-1, n, n))
        n = n / math.sqrt(nn)
        s = float(mdot(-1, q, n))
        d = math.asinh(abs(s))
        f = q - s * n
        f = f / math.sqrt(-float(mdot(-1, f, f)))
    if d < 1e-15:
        raise ParameterError("apex lies on the opposite side line")
    u, _ = log_unit(kappa, q, f)
    return d, u


def _panels(lo: float, hi: float, events) -> list:
    cuts = [lo] + sorted(e for e in events if lo + 1e-14 < e < hi - 1e-14) + [hi]
    return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]


def triangle_disk_area(kappa: int, q, p1, p2, radius: float | None) -> float:
    """Area of triangle(q, p1, p2) intersected with the disk of the given
    radius centered at the apex q (full triangle area for radius None).

    Polar quadrature around q: rays hit the opposite side at a closed-form
    distance; the integrand kinks where that distance equals the disk
    radius, and panels are split there.
    """
    q = np.asarray(q, float)
    u1, d1 = log_unit(kappa, q, np.asarray(p1, float))
    u2, d2 = log_unit(kappa, q, np.asarray(p2, float))
    gamma = signed_angle(kappa, q, u1, u2)
    sgn = 1.0 if gamma >= 0 else -1.0
    gamma = abs(gamma)
    if gamma < 1e-15 or gamma > math.pi - 1e-12:
        raise ParameterError("degenerate apex angle")
    dfoot, ufoot = _foot_on_line(kappa, q, p1, p2)
    A = sector_area_fn(kappa)
    if ufoot is None:  # spherical pole: the side is at distance pi/2 everywhere
        beta_f = 0.0
        rho_T = lambda beta: np.full(np.shape(beta), 0.5 * math.pi)
    else:
        beta_f = signed_angle(kappa, q, u1, ufoot) * sgn

        def rho_T(beta):
            return ray_to_line(kappa, dfoot, beta - beta_f)

    events = []
    if radius is not None:
        # rho_T(beta) == radius at beta_f +- delta*
        if kappa == 0:
            cosd = dfoot / radius if radius > 0 else 2.0
        elif kappa == 1:
            cosd = math.tan(dfoot) / math.tan(radius)
        else:
            cosd = math.tanh(dfoot) / math.tanh(radius)
        if 0.0 < cosd < 1.0:
            dstar = math.acos(cosd)
            events.extend([beta_f - dstar, beta_f + dstar])

    def integrand(beta):
        t = rho_T(beta)
        if radius is not None:
            t = np.minimum(t, radius)
        return A(t)

    total = 0.0
    for (a, b) in _panels(0.0, gamma, events):
        total += _adaptive_gauss(integrand, a, b)
    return total


def triangle_area_polar(kappa: int, q, p1, p2) -> float:
    return triangle_disk_area(kappa, q, p1, p2, None)


# ---------------------------------------------------------------------- #
# soft-disk functionals

@dataclass(frozen=True)
class SoftDiskConfig:
    """A hard disk of radius r with soft enlargement (1 + lam) r."""

    kappa: int
    r: float
    lam: float
    center: np.ndarray = None

    def __post_init__(self):
        _check_kappa(self.kappa)
        if self.r <= 0 or self.lam <= 0:
            raise ParameterError("need r > 0 and lambda > 0")
        if self.kappa == 1 and self.r >= math.pi / 3:
            raise ParameterError("on the sphere the disk radius must be < pi/3")
        if self.kappa == 1 and (1.0 + self.lam) * self.r >= 0.5 * math.pi:
            raise ParameterError("soft radius must stay below pi/2 on the sphere")
        c = base_point(self.kappa) if self.center is None else self.center
        object.__setattr__(self, "center", validate_point(self.kappa, c))

    @property
    def soft_r(self) -> float:
        return (1.0 + self.lam) * self.r


def rho_functionals(config: SoftDiskConfig, tri: CurvedTriangle):
    """(core ratio, soft ratio) of a triangle with the disk center as a
    vertex: area(T∩B)/area(T∩B_soft) and area(T∩B_soft)/area(T).

    Returns (None, soft_ratio) when the soft intersection has zero area.
    """
    if tri.kappa != config.kappa:
        raise ParameterError("curvature mismatch")
    vs = tri.vertices
    which = None
    for i, v in enumerate(vs):
        if distance(config.kappa, v, config.center) < 1e-10:
            which = i
            break
    if which is None:
        raise ParameterError("the disk center must be a vertex of the triangle")
    q = vs[which]
    p1, p2 = vs[(which + 1) % 3], vs[(which + 2) % 3]
    a_core = triangle_disk_area(config.kappa, q, p1, p2, config.r)
    a_soft = triangle_disk_area(config.kappa, q, p1, p2, config.soft_r)
    a_full = triangle_disk_area(config.kappa, q, p1, p2, None)
    rho = (a_core / a_soft) if a_soft > 0 else None
    rho_hat = a_soft / a_full
    return rho, rho_hat


# ---------------------------------------------------------------------- #
# regular-triangle bounds

def circumradius_regular_triangle(kappa: int, r: float) -> float:
    """Circumradius R(r) of the regular triangle of side 2r, solved from the
    vertex reconstruction (closed forms verify it in the tests)."""
    _check_kappa(kappa)
    if r <= 0:
        raise ParameterError("r must be positive")
    if kappa == 1 and r >= math.pi / 3:
        raise ParameterError("on the sphere r must be < pi/3")
    if kappa == 0:
        return 2.0 * r / math.sqrt(3.0)
    c = base_point(kappa)
    e1 = np.array([1.0, 0.0, 0.0])

    def side_of(R):
        v1 = exp_map(kappa, c, e1, R)
        u2 = tangent_from_angle(kappa, c, e1, 2.0 * math.pi / 3.0)
        v2 = exp_map(kappa, c, u2, R)
        return distance(kappa, v1, v2) - 2.0 * r

    hi = 0.5 * math.pi - 1e-9 if kappa == 1 else 10.0 * r + 5.0
    return brentq(side_of, 1e-12, hi, xtol=1e-14)


def regular_triangle(kappa: int, r: float):
    """Vertices of the regular triangle with side 2r around the base point."""
    R = circumradius_regular_triangle(kappa, r)
    c = base_point(kappa)
    e1 = np.array([1.0, 0.0, 0.0]) if kappa != 0 else np.array([1.0, 0.0])
    vs = []
    for k in range(3):
        u = tangent_from_angle(kappa, c, e1, 2.0 * math.pi * k / 3.0)
        vs.append(exp_map(kappa, c, u, R))
    return c, vs, R


def _union_disks_triangle_area(kappa: int, r: float, disk_r: float) -> float:
    """Area of (union of disks of radius disk_r at the vertices) ∩ T_r,
    by polar sweep around the triangle center with per-ray interval merging."""
    c, vs, R = regular_triangle(kappa, r)
    e1 = np.array([1.0, 0.0, 0.0]) if kappa != 0 else np.array([1.0, 0.0])
    # apothem: right triangle with legs r, m and hypotenuse R
    if kappa == 0:
        m = math.sqrt(max(R * R - r * r, 0.0))
    elif kappa == 1:
        m = math.acos(min(1.0, math.cos(R) / math.cos(r)))
    else:
        m = math.acosh(max(1.0, math.cosh(R) / math.cosh(r)))
    A = sector_area_fn(kappa)
    psi = np.array([0.0, 2 * math.pi / 3, -2 * math.pi / 3])  # vertex directions

    def union_measure(phi: np.ndarray) -> np.ndarray:
        # triangle radial: the side between vertices 0 and 1 has its foot
        # direction at +pi/3; by symmetry fold phi into [0, 2pi/3)
        ph = np.mod(phi, 2 * math.pi / 3)
        rho_t = ray_to_line(kappa, m, ph - math.pi / 3)
        out = np.zeros(phi.shape)
        ivs = []
        for pv in psi:
            t0, t1 = ray_circle_interval(kappa, R, phi - pv, disk_r)
            ivs.append((np.maximum(t0, 0.0), np.minimum(t1, rho_t)))
        # merge up to three intervals per ray
        los = np.stack([iv[0] for iv in ivs])
        his = np.stack([iv[1] for iv in ivs])
        bad = los >= his
        los = np.where(bad, np.inf, los)
        his = np.where(bad, -np.inf, his)
        order = np.argsort(los, axis=0)
        los = np.take_along_axis(los, order, axis=0)
        his = np.take_along_axis(his, order, axis=0)
        cur_lo, cur_hi = los[0], his[0]
        measure = np.zeros(phi.shape)

        def block(lo_v, hi_v, mask):
            lo_f = np.where(mask, lo_v, 0.0)
            hi_f = np.where(mask, hi_v, 0.0)
            return np.where(mask, A(np.maximum(hi_f, 0)) - A(np.maximum(lo_f, 0)), 0.0)

        for k in range(1, 3):
            lo_k, hi_k = los[k], his[k]
            new = lo_k > cur_hi  # disjoint: flush current block
            have = np.isfinite(cur_lo)
            measure += block(cur_lo, cur_hi, new & have)
            cur_lo = np.where(new, lo_k, cur_lo)
            cur_hi = np.where(new, hi_k, np.maximum(cur_hi, np.where(np.isfinite(hi_k), hi_k, -np.inf)))
        have = np.isfinite(cur_lo) & (cur_hi > cur_lo)
        measure += block(cur_lo, cur_hi, have)
        return measure

    # events: disk tangency angles, interval/triangle crossings; scan + refine
    grid = np.linspace(0.0, 2 * math.pi / 3, 4097)
    vals = union_measure(grid)
    events = [0.0, math.pi / 3, 2 * math.pi / 3]
    dv = np.diff(vals)
    # kink candidates where the second difference spikes
    dd = np.abs(np.diff(dv))
    thresh = 50.0 * np.median(dd) + 1e-14
    for idx in np.nonzero(dd > thresh)[0]:
        events.append(float(grid[idx + 1]))
    total = 0.0
    for (a, b) in _panels(0.0, 2 * math.pi / 3, events):
        total += _adaptive_gauss(union_measure, a, b)
    return 3.0 * total


def regular_triangle_bounds(kappa: int, r: float, lam: float):
    """(core bound, soft bound) from the regular triangle of side 2r with
    disks of radius r and (1+lam) r at its vertices."""
    _check_kappa(kappa)
    if r <= 0 or lam <= 0:
        raise ParameterError("need r > 0 and lambda > 0")
    if kappa == 1 and r >= math.pi / 3:
        raise ParameterError("on the sphere r must be < pi/3")
    rr = (1.0 + lam) * r
    if kappa == 1 and rr >= 0.5 * math.pi:
        raise ParameterError("soft radius must stay below pi/2 on the sphere")
    num = _union_disks_triangle_area(kappa, r, r)
    den = _union_disks_triangle_area(kappa, r, rr)
    _, vs, _ = regular_triangle(kappa, r)
    t_area = CurvedTriangle(kappa, tuple(vs)).area()
    return num / den, den / t_area


# ---------------------------------------------------------------------- #
# monotonicity harnesses

@dataclass
class HarnessReport:
    kappa: int
    r: float
    lam: float
    max_increase_core: float
    max_increase_soft: float
    n_cases: int
    details: dict = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return max(self.max_increase_core, self.max_increase_soft) <= 1e-8


def perpendicular_scene(kappa: int, d_p: float):
    """q at the base point, p on a line L at distance d_p, and the unit
    tangent of the half line perpendicular to L at p."""
    q = base_point(kappa)
    e1 = np.array([1.0, 0.0, 0.0]) if kappa != 0 else np.array([1.0, 0.0])
    p = exp_map(kappa, q, e1, d_p)
    away, _ = log_unit(kappa, p, q)
    perp = rot90(kappa, p, -np.asarray(away))
    return q, p, perp


def lemma_monotone_wedge(kappa: int, r: float, lam: float, d_p: float,
                         s_grid) -> HarnessReport:
    """Non-increase of both triangle ratios in each leg length, for right
    triangles (q, p(s1), p(s2)) built on a perpendicular half line."""
    if d_p < r:
        raise ParameterError("p must lie outside the open disk (d_p >= r)")
    s_grid = np.asarray(sorted(s_grid), dtype=float)
    if kappa == 1 and (s_grid.max() >= 0.5 * math.pi or d_p >= 0.5 * math.pi):
        raise ParameterError("spherical scene needs s < pi/2 and d_p < pi/2")
    cfg = SoftDiskConfig(kappa, r, lam)
    q, p, perp = perpendicular_scene(kappa, d_p)
    pts = [exp_map(kappa, p, perp, s) for s in s_grid]
    n = len(s_grid)
    rho = np.full((n, n), np.nan)
    rho_hat = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(i + 1, n):
            tri = CurvedTriangle(kappa, (q, pts[i], pts[j]))
            a, b = rho_functionals(cfg, tri)
            rho[i, j] = a if a is not None else np.nan
            rho_hat[i, j] = b
    inc_core = inc_soft = -np.inf
    for M, tag in ((rho, "core"), (rho_hat, "soft")):
        d2 = np.diff(M, axis=1)   # increasing s2
        d1 = np.diff(M, axis=0)   # increasing s1
        vals = np.concatenate([d2[np.isfinite(d2)], d1[np.isfinite(d1)]])
        worst = float(vals.max()) if len(vals) else -np.inf
        if tag == "core":
            inc_core = worst
        else:
            inc_soft = worst
    return HarnessReport(kappa=kappa, r=r, lam=lam,
                         max_increase_core=inc_core, max_increase_soft=inc_soft,
                         n_cases=n * (n - 1) // 2,
                         details={"d_p": d_p, "s_grid": s_grid.tolist()})


def right_triangle_on_circumradius(kappa: int, r: float, r_i: float):
    """Triangle (q, q', p) with |q q'| = R(r), |q p| = r_i and a right angle
    at p; the construction places p at the closed-form angle from q."""
    R = circumradius_regular_triangle(kappa, r)
    if not (r <= r_i < R):
        raise ParameterError("need r <= r_i < R(r)")
    if kappa == 0:
        alpha = math.acos(r_i / R)
    elif kappa == 1:
        alpha = math.acos(math.tan(r_i) / math.tan(R))
    else:
        alpha = math.acos(math.tanh(r_i) / math.tanh(R))
    q = base_point(kappa)
    e1 = np.array([1.0, 0.0, 0.0]) if kappa != 0 else np.array([1.0, 0.0])
    qp = exp_map(kappa, q, e1, R)
    u = tangent_from_angle(kappa, q, e1, alpha)
    p = exp_map(kappa, q, u, r_i)
    return q, qp, p


def lemma_monotone_hypotenuse(kappa: int, r: float, lam: float,
                              r_values) -> HarnessReport:
    """Non-increase of both ratios as the right-angle vertex moves outward
    along triangles sharing the circumradius hypotenuse."""
    cfg = SoftDiskConfig(kappa, r, lam)
    r_values = np.asarray(sorted(r_values), dtype=float)
    rhos, rhats = [], []
    for r_i in r_values:
        q, qp, p = right_triangle_on_circumradius(kappa, r, float(r_i))
        tri = CurvedTriangle(kappa, (q, qp, p))
        a, b = rho_functionals(cfg, tri)
        rhos.append(a if a is not None else np.nan)
        rhats.append(b)
    rhos, rhats = np.asarray(rhos), np.asarray(rhats)
    inc_core = float(np.nanmax(np.diff(rhos))) if len(rhos) > 1 else -np.inf
    inc_soft = float(np.nanmax(np.diff(rhats))) if len(rhats) > 1 else -np.inf
    return HarnessReport(kappa=kappa, r=r, lam=lam,
                         max_increase_core=inc_core, max_increase_soft=inc_soft,
                         n_cases=len(r_values) - 1,
                         details={"r_values": r_values.tolist()})


def sample_admissible_triangles(kappa: int, r: float, lam: float, n: int,
                                seed: int = 0):
    """Random triangles from the Voronoi-dissection family: q a vertex, the
    opposite side line at distance >= r, far vertex at distance >= R(r),
    right or obtuse at the near vertex of the opposite side."""
    rng = np.random.default_rng(seed)
    R = circumradius_regular_triangle(kappa, r)
    cfg = SoftDiskConfig(kappa, r, lam)
    out = []
    cap = 0.5 * math.pi - 1e-3
    guard = 0
    while len(out) < n and guard < 50 * n:
        guard += 1
        d_p = r + rng.uniform(0.0, 0.8 * r) if kappa != 1 else \
            r + rng.uniform(0.0, min(0.8 * r, cap - r - 1e-3))
        q, p, perp = perpendicular_scene(kappa, d_p)
        # minimal s with dist(q, p(s)) >= R
        if kappa == 0:
            s_min = math.sqrt(max(R * R - d_p * d_p, 0.0))
            s_hi = 2.5 * max(s_min, r)
        elif kappa == 1:
            val = math.cos(R) / math.cos(d_p)
            s_min = math.acos(min(1.0, val)) if val < 1 else 0.0
            s_hi = min(cap, s_min + 1.2 * r + 0.2)
        else:
            val = math.cosh(R) / math.cosh(d_p)
            s_min = math.acosh(val) if val > 1 else 0.0
            s_hi = s_min + 2.0 * r + 0.3
        if s_hi <= s_min + 1e-9:
            continue
        s2 = rng.uniform(s_min, s_hi)
        if s2 < 1e-6:
            continue
        if kappa == 1 and distance(1, q, exp_map(1, p, perp, s2)) >= cap:
            continue
        s1 = rng.uniform(0.0, 0.95 * s2)
        p2 = exp_map(kappa, p, perp, s2)
        p1 = exp_map(kappa, p, perp, s1) if s1 > 1e-9 else p
        try:
            tri = CurvedTriangle(kappa, (q, p1, p2))
        except ParameterError:
            continue
        out.append(tri)
    if len(out) < n:
        raise ParameterError("rejection sampling starved; loosen the scene ranges")
    return out, cfg


def theorem_bound_check(kappa: int, r: float, lam: float, n: int = 200,
                        seed: int = 0, slack: float = 1e-8) -> dict:
    """Sampled verification that triangle ratios stay below the regular-
    triangle bounds."""
    sigma, sigma_bar = regular_triangle_bounds(kappa, r, lam)
    tris, cfg = sample_admissible_triangles(kappa, r, lam, n, seed)
    worst_core = -np.inf
    worst_soft = -np.inf
    viol = 0
    for tri in tris:
        rho, rho_hat = rho_functionals(cfg, tri)
        if rho is not None:
            worst_core = max(worst_core, rho - sigma)
        worst_soft = max(worst_soft, rho_hat - sigma_bar)
        if (rho is not None and rho > sigma + slack) or rho_hat > sigma_bar + slack:
            viol += 1
    return {"kappa": kappa, "r": r, "lam": lam, "n": n,
            "sigma": sigma, "sigma_bar": sigma_bar,
            "worst_core_excess": float(worst_core),
            "worst_soft_excess": float(worst_soft),
            "violations": viol}


# ---------------------------------------------------------------------- #
# Gauss-Bonnet region areas (independent oracle)

@dataclass(frozen=True)
class GeodesicSegment:
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class CircularArc:
    center: np.ndarray
    a: np.ndarray
    b: np.ndarray
    ccw: bool = True  # traversal keeps the center on the left


def region_area_curved(kappa: int, pieces) -> float:
    """Area of the region bounded by a closed counterclockwise chain of
    geodesic segments and circular arcs, via Gauss-Bonnet
    (kappa * area = 2 pi - sum of turning angles - integral of geodesic
    curvature).  The Euclidean case falls back to a polyline shoelace.
    """
    _check_kappa(kappa)
    if not pieces:
        raise ParameterError("empty boundary")
    if kappa == 0:
        return _region_area_euclid(pieces)

    ends = []       # (start, end, tan_in_at_start, tan_out_at_end)
    kg_total = 0.0
    for piece in pieces:
        if isinstance(piece, GeodesicSegment):
            a = validate_point(kappa, piece.a)
            b = validate_point(kappa, piece.b)
            ta, _ = log_unit(kappa, a, b)
            tb_, _ = log_unit(kappa, b, a)
            ends.append((a, b, ta, -np.asarray(tb_)))
        elif isinstance(piece, CircularArc):
            c = validate_point(kappa, piece.center)
            a = validate_point(kappa, piece.a)
            b = validate_point(kappa, piece.b)
            ra = distance(kappa, c, a)
            rb = distance(kappa, c, b)
            if abs(ra - rb) > 1e-9:
                raise ParameterError("arc endpoints at different radii")
            ua, _ = log_unit(kappa, c, a)
            ub, _ = log_unit(kappa, c, b)
            chi = signed_angle(kappa, c, ua, ub)
            if piece.ccw:
                chi = chi % (2 * math.pi)
            else:
                chi = -((-chi) % (2 * math.pi))
            arclen = abs(chi) * (math.sin(ra) if kappa == 1 else math.sinh(ra))
            kg = circle_geodesic_curvature(kappa, ra)
            kg_total += kg * arclen * (1.0 if piece.ccw else -1.0)
            rad_a, _ = log_unit(kappa, a, c)
            rad_b, _ = log_unit(kappa, b, c)
            # outward radial = away from center; ccw tangent = rot90(outward)
            s = 1.0 if piece.ccw else -1.0
            ta = s * rot90(kappa, a, -np.asarray(rad_a))
            tb = s * rot90(kappa, b, -np.asarray(rad_b))
            ends.append((a, b, ta, tb))
        else:
            raise ParameterError(f"unknown boundary piece {piece!r}")

    turn = 0.0
    m = len(ends)
    for k in range(m):
        b_pt = ends[k][1]
        nxt = ends[(k + 1) % m]
        if np.linalg.norm(b_pt - nxt[0]) > 1e-9:
            raise ParameterError("boundary is not closed")
        turn += signed_angle(kappa, b_pt, ends[k][3], nxt[2])
    total = 2.0 * math.pi - turn - kg_total
    return total / kappa


def _region_area_euclid(pieces) -> float:
    pts = []
    for piece in pieces:
        if isinstance(piece, GeodesicSegment):
            pts.append(np.asarray(piece.a, float)[None, :])
            pts.append(np.asarray(piece.b, float)[None, :])
        elif isinstance(piece, CircularArc):
            c = np.asarray(piece.center, float)
            a = np.asarray(piece.a, float) - c
            b = np.asarray(piece.b, float) - c
            r = np.linalg.norm(a)
            a0 = math.atan2(a[1], a[0])
            b0 = math.atan2(b[1], b[0])
            if piece.ccw:
                sweep = (b0 - a0) % (2 * math.pi)
            else:
                sweep = -((a0 - b0) % (2 * math.pi))
            ts = a0 + np.linspace(0.0, sweep, max(16, int(abs(sweep) * 2048)))
            pts.append(c + r * np.stack([np.cos(ts), np.sin(ts)], axis=1))
        else:
            raise ParameterError(f"unknown boundary piece {piece!r}")
    poly = np.vstack(pts)
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


# ---------------------------------------------------------------------- #
# Monte Carlo oracles

def monte_carlo_triangle_ratio(cfg: SoftDiskConfig, tri: CurvedTriangle,
                               n: int, seed: int = 0):
    """Monte Carlo (core ratio, soft ratio) for cross-checking the
    quadrature path; returns ((rho, se), (rho_hat, se))."""
    kappa = cfg.kappa
    rng = np.random.default_rng(seed)
    q = tri.vertices[0]
    pts = _sample_in_triangle(kappa, tri, n, rng)
    d = _dist_many(kappa, pts, cfg.center)
    in_core = d <= cfg.r
    in_soft = d <= cfg.soft_r
    p_core = in_core.mean()
    p_soft = in_soft.mean()
    area = tri.area()
    se_core = math.sqrt(max(p_core * (1 - p_core), 1e-300) / n)
    se_soft = math.sqrt(max(p_soft * (1 - p_soft), 1e-300) / n)
    rho = p_core / p_soft if p_soft > 0 else None
    se_rho = (rho * math.sqrt((se_core / max(p_core, 1e-12)) ** 2
                              + (se_soft / p_soft) ** 2)
              if rho is not None and p_core > 0 else None)
    return (rho, se_rho), (p_soft, se_soft), area


def _dist_many(kappa, pts, c):
    if kappa == 0:
        return np.linalg.norm(pts - c, axis=1)
    if kappa == 1:
        return np.arccos(np.clip(pts @ c, -1, 1))
    val = -(pts[:, 0] * c[0] + pts[:, 1] * c[1] - pts[:, 2] * c[2])
    return np.arccosh(np.maximum(val, 1.0))


def sample_in_disk(kappa, center, rad: float, m: int, rng):
    """Uniform (area-measure) samples in the geodesic disk of radius rad."""
    center = np.asarray(center, float)
    if kappa == 0:
        t = rad * np.sqrt(rng.random(m))
        ang = rng.uniform(0, 2 * math.pi, m)
        return center + np.stack([t * np.cos(ang), t * np.sin(ang)], axis=1)
    t = _sample_disk_radii(kappa, rad, m, rng)
    ang = rng.uniform(0, 2 * math.pi, m)
    e1, e2 = _tangent_basis(kappa, center)
    dirs = np.cos(ang)[:, None] * e1 + np.sin(ang)[:, None] * e2
    return _exp_many(kappa, center, dirs, t)


def _sample_in_triangle(kappa, tri: CurvedTriangle, n: int, rng):
    """Uniform (area-measure) samples inside a curved triangle by rejection
    from a geodesic disk around a vertex-centroid-ish point."""
    vs = tri.vertices
    if kappa == 0:
        a, b, c = vs
        u = rng.random((2 * n, 2))
        flip = u.sum(axis=1) > 1
        u[flip] = 1 - u[flip]
        pts = a + u[:, :1] * (b - a) + u[:, 1:] * (c - a)
        return pts[:n]
    center = np.mean(np.stack(vs), axis=0)
    if kappa == 1:
        center = center / np.linalg.norm(center)
    else:
        center = center / math.sqrt(-mdot(-1, center, center))
    rad = max(distance(kappa, center, v) for v in vs) + 1e-9
    inside_fn = _triangle_membership(kappa, tri)
    out = []
    need = n
    while need > 0:
        m = max(4 * need, 1024)
        t = _sample_disk_radii(kappa, rad, m, rng)
        ang = rng.uniform(0, 2 * math.pi, m)
        e1, e2 = _tangent_basis(kappa, center)
        dirs = np.cos(ang)[:, None] * e1 + np.sin(ang)[:, None] * e2
        pts = _exp_many(kappa, center, dirs, t)
        good = inside_fn(pts)
        sel = pts[good]
        out.append(sel[:need])
        need -= len(sel[:need])
    return np.vstack(out)


def _tangent_basis(kappa, p):
    if kappa == 1:
        e1 = np.cross(p, np.array([0.0, 0.0, 1.0]))
        if np.linalg.norm(e1) < 1e-9:
            e1 = np.cross(p, np.array([1.0, 0.0, 0.0]))
        e1 = e1 / np.linalg.norm(e1)
    else:
        e1 = np.array([1.0, 0.0, 0.0]) + mdot(-1, p, np.array([1.0, 0.0, 0.0])) * p
        e1 = e1 / math.sqrt(mdot(-1, e1, e1))
    return e1, rot90(kappa, p, e1)


def _exp_many(kappa, p, dirs, t):
    t = np.asarray(t)[:, None]
    if kappa == 1:
        return np.cos(t) * p + np.sin(t) * dirs
    return np.cosh(t) * p + np.sinh(t) * dirs


def _sample_disk_radii(kappa, rad, m, rng):
    u = rng.random(m)
    if kappa == 1:
        return np.arccos(1 - u * (1 - math.cos(rad)))
    return np.arccosh(1 + u * (math.cosh(rad) - 1))


def _triangle_membership(kappa, tri: CurvedTriangle):
    vs = tri.vertices
    normals = []
    inner = np.mean(np.stack(vs), axis=0)
    for i in range(3):
        a, b = vs[i], vs[(i + 1) % 3]
        n = np.cross(a, b)
        if kappa == -1:
            n = np.array([n[0], n[1], -n[2]])
        sgn = mdot(kappa, inner, n)
        normals.append(n * (1.0 if sgn >= 0 else -1.0))

    def member(pts):
        ok = np.ones(len(pts), dtype=bool)
        for n in normals:
            ok &= (pts @ np.array([n[0], n[1], -n[2]]) if kappa == -1
                   else pts @ n) >= -1e-12
        return ok
    return member
