"""Bisectors of the Minkowski norm, bisector n-gons, and the three-point
equidistant center.

For a smooth strictly convex o-symmetric unit ball the bisector of two
points is a simple curve.  Regions bounded by bisectors of the origin and
sites of gauge >= 2 are star-shaped about the origin, so most constructions
here work radially: along each ray from the origin we locate the first
point where the gauge to the origin stops being the smallest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, root

from .bodies import ConvexBody
from .errors import ConstraintViolationError, ConvergenceError, DegeneratePairError
from .regions import ArcChainRegion

BISECT_ITERS = 42  # ~2e-13 of the initial bracket


def _unit(phi):
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def halfregion_radial(body: ConvexBody, sites: np.ndarray, phi: np.ndarray,
                      cap: np.ndarray) -> np.ndarray:
    """Radial boundary of ``{x : |x|_M <= |x - s|_M for all sites s}`` along rays.

    ``sites`` has shape (S, 2) with gauge >= 2 each, ``phi`` the ray angles,
    ``cap`` the per-ray search limit (Euclidean radius).  Returns the (S, n)
    first crossing radii, clipped to ``cap`` where the bisector of a site
    does not meet the ray within the limit.  Entries never fall below the
    body boundary.
    """
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    phi = np.asarray(phi, dtype=float)
    cap = np.broadcast_to(np.asarray(cap, dtype=float), phi.shape)
    d = _unit(phi)                      # (n, 2)
    r_m = body.radial(phi)              # (n,)

    def g_of(r):  # r: (S, n) -> residual r/r_M - gauge(r d - site)
        pts = r[..., None] * d - sites[:, None, :]
        flat = pts.reshape(-1, 2)
        gg = body.gauge_fast(flat).reshape(r.shape)
        return r / r_m - gg

    S, n = len(sites), len(phi)
    lo = np.broadcast_to(r_m, (S, n)).copy()
    hi = np.broadcast_to(cap, (S, n)).copy()
    found = g_of(hi) > 0.0
    # keep brackets trivial where no crossing exists
    hi_work = np.where(found, hi, lo)
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi_work)
        below = g_of(mid) <= 0.0
        lo = np.where(found & below, mid, lo)
        hi_work = np.where(found & ~below, mid, hi_work)
    r = np.where(found, 0.5 * (lo + hi_work), hi)
    return np.maximum(r, r_m)


def halfregion_radial_single(body: ConvexBody, site, phi: float, cap: float) -> float:
    """Scalar convenience wrapper around :func:`halfregion_radial`."""
    r = halfregion_radial(body, np.asarray(site, float)[None, :],
                          np.asarray([phi]), np.asarray([cap]))
    return float(r[0, 0])


def halfregion_radial_elementwise(body: ConvexBody, sites: np.ndarray,
                                  phi: np.ndarray, cap: np.ndarray) -> np.ndarray:
    """Like :func:`halfregion_radial` but elementwise: sites[k] paired with
    phi[k] and cap[k].  Used to batch many independent scalar solves."""
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    phi = np.asarray(phi, dtype=float)
    cap = np.asarray(cap, dtype=float)
    d = _unit(phi)
    r_m = body.radial(phi)

    def g_of(r):
        return r / r_m - body.gauge_fast(r[:, None] * d - sites)

    lo = r_m.copy()
    hi = cap.copy()
    found = g_of(hi) > 0.0
    hi_work = np.where(found, hi, lo)
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi_work)
        below = g_of(mid) <= 0.0
        lo = np.where(found & below, mid, lo)
        hi_work = np.where(found & ~below, mid, hi_work)
    r = np.where(found, 0.5 * (lo + hi_work), hi)
    return np.maximum(r, r_m)


def equal_gauge_point(body: ConvexBody, x, y) -> np.ndarray:
    """The point of segment [x, y] with equal gauge distance to both ends."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    f = lambda t: body.gauge(x + t * (y - x) - x) - body.gauge(x + t * (y - x) - y)
    t0 = brentq(f, 0.0, 1.0, xtol=1e-15)
    return x + t0 * (y - x)


@dataclass
class BisectorCurve:
    """A traced bisector ``B(x, y)`` clipped to a window around the pair."""

    x: np.ndarray
    y: np.ndarray
    trace: np.ndarray          # (n, 2) polyline, ordered along the curve
    param_range: tuple         # (arclength before midpoint, after midpoint)

    def residuals(self, body: ConvexBody) -> np.ndarray:
        gx = body.gauge(self.trace - self.x)
        gy = body.gauge(self.trace - self.y)
        return np.abs(gx - gy) / np.maximum(1.0, gx)


def trace_bisector(body: ConvexBody, x, y, window: float = 8.0,
                   max_step: float = 0.05, init_step: float = 0.01) -> BisectorCurve:
    """Trace the bisector of x and y by predictor-corrector marching.

    Marching starts at the equal-gauge point of the segment and proceeds in
    both directions until the gauge distance to the segment midpoint exceeds
    ``window``.  Each step is corrected by a 1-d root solve transverse to
    the march direction, so every trace point satisfies the defining
    equation to ~1e-12.
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.linalg.norm(x - y) < 1e-14:
        raise DegeneratePairError("bisector of coincident points is undefined")
    center = 0.5 * (x + y)

    def res(p):
        return float(body.gauge(p - x) - body.gauge(p - y))

    def grad(p):
        return body.gauge_grad(p - x) - body.gauge_grad(p - y)

    p0 = equal_gauge_point(body, x, y)

    def correct(p, h):
        g = grad(p)
        ng = np.linalg.norm(g)
        if ng < 1e-14:
            raise ConvergenceError("degenerate bisector gradient")
        g = g / ng
        f = lambda s: res(p + s * g)
        a, b = -h, h
        fa, fb = f(a), f(b)
        k = 0
        while fa * fb > 0 and k < 40:
            a, b = 1.6 * a, 1.6 * b
            fa, fb = f(a), f(b)
            k += 1
        if fa * fb > 0:
            raise ConvergenceError("bisector corrector failed to bracket")
        s0 = brentq(f, a, b, xtol=1e-14)
        return p + s0 * g

    def march(direction_sign):
        pts = []
        p = p0
        g = grad(p)
        t = np.array([-g[1], g[0]])
        t = direction_sign * t / np.linalg.norm(t)
        h = init_step
        arclen = 0.0
        guard = 0
        while body.gauge(p - center) <= window and guard < 100000:
            guard += 1
            p_try = correct(p + h * t, 0.8 * h)
            g = grad(p_try)
            t_new = np.array([-g[1], g[0]])
            t_new /= np.linalg.norm(t_new)
            if np.dot(t_new, t) < 0:
                t_new = -t_new
            turn = np.linalg.norm(t_new - t)
            if turn > 0.25 and h > 1e-4:
                h *= 0.5
                continue
            arclen += np.linalg.norm(p_try - p)
            pts.append(p_try)
            p, t = p_try, t_new
            if turn < 0.05:
                h = min(max_step, 1.4 * h)
        return pts, arclen

    fwd, len_f = march(+1.0)
    bwd, len_b = march(-1.0)
    trace = np.array(list(reversed(bwd)) + [p0] + fwd)
    return BisectorCurve(x=x, y=y, trace=trace, param_range=(-len_b, len_f))


def tripoint(body: ConvexBody, x, y, z):
    """The unique point gauge-equidistant from three non-collinear points.

    Returns None for collinear triples (no equidistant point exists in a
    strictly convex norm); raises for coincident inputs.  The result is the
    center of the homothet of the unit ball through all three points.
    """
    x, y, z = (np.asarray(v, float) for v in (x, y, z))
    scale = max(1.0, np.abs(np.stack([x, y, z])).max())
    if (np.linalg.norm(x - y) < 1e-12 * scale or np.linalg.norm(y - z) < 1e-12 * scale
            or np.linalg.norm(x - z) < 1e-12 * scale):
        raise DegeneratePairError("tripoint needs three distinct points")
    a, b = y - x, z - x
    cross = a[0] * b[1] - a[1] * b[0]
    if abs(cross) < 1e-12 * scale * scale:
        return None

    def fun(p):
        gx = body.gauge(p - x)
        gy = body.gauge(p - y)
        gz = body.gauge(p - z)
        return [gx - gy, gy - gz]

    def jac(p):
        gx = body.gauge_grad(p - x)
        gy = body.gauge_grad(p - y)
        gz = body.gauge_grad(p - z)
        return np.stack([gx - gy, gy - gz])

    # Euclidean circumcenter as the initial guess
    d = 2.0 * cross
    ux = (b[1] * (a @ a) - a[1] * (b @ b)) / d
    uy = (a[0] * (b @ b) - b[0] * (a @ a)) / d
    guesses = [x + np.array([ux, uy]), (x + y + z) / 3.0]
    rng = np.random.default_rng(7)
    for k in range(24):
        g0 = guesses[k] if k < len(guesses) else \
            (x + y + z) / 3.0 + rng.normal(scale=0.5 * scale, size=2)
        sol = root(fun, g0, jac=jac, method="hybr", tol=1e-14)
        p = sol.x
        if max(abs(v) for v in fun(p)) < 1e-10 * max(1.0, float(body.gauge(p - x))):
            return p
    raise ConvergenceError("tripoint solve did not converge")


@dataclass
class BNGon:
    """A bisector n-gon: points gauge-closer to the origin than to every
    generator.  Star-shaped about the origin; stored radially."""

    body: ConvexBody
    generators: np.ndarray       # (k, 2), deduplicated
    phi: np.ndarray              # ray angles
    r: np.ndarray                # radial boundary values
    active: np.ndarray           # which generators contribute boundary
    bounded: bool
    window: float
    k: int = field(init=False)

    def __post_init__(self):
        self.k = len(self.generators)

    def boundary_region(self) -> ArcChainRegion:
        pts = self.r[:, None] * _unit(self.phi)
        return ArcChainRegion([np.vstack([pts, pts[:1]])])

    def area(self) -> float:
        phi_c = np.append(self.phi, self.phi[0] + 2 * np.pi)
        r_c = np.append(self.r, self.r[0])
        return float(0.5 * np.trapezoid(r_c ** 2, phi_c))

    def truncated_area_radial(self, lam: float) -> float:
        """Area of the n-gon clipped by (1 + lam) M, via the radial overlay."""
        if lam < 0:
            raise ConstraintViolationError("lambda must be >= 0")
        r_m = self.body.radial(self.phi)
        rr = np.minimum(self.r, (1.0 + lam) * r_m)
        phi_c = np.append(self.phi, self.phi[0] + 2 * np.pi)
        r_c = np.append(rr, rr[0])
        return float(0.5 * np.trapezoid(r_c ** 2, phi_c))

    def residual(self) -> float:
        """max over boundary points of gauge(p) - min_i gauge(p - x_i)."""
        pts = self.r[:, None] * _unit(self.phi)
        g0 = self.body.gauge(pts)
        worst = -np.inf
        for s in self.generators:
            worst = max(worst, np.max(g0 - self.body.gauge(pts - s)))
        return float(worst)

    def to_json(self) -> dict:
        return {
            "generators": self.generators.tolist(),
            "boundary": (self.r[:, None] * _unit(self.phi)).tolist(),
            "active": self.active.tolist(),
            "bounded": self.bounded,
        }


def build_bngon(body: ConvexBody, generators, n_phi: int = 4096,
                window: float = 8.0) -> BNGon:
    """Assemble the bisector n-gon of the given generators.

    Every generator must satisfy gauge >= 2; duplicates (within 1e-12) are
    merged.  Generators whose bisector never attains the radial minimum are
    reported inactive.
    """
    gens = np.atleast_2d(np.asarray(generators, dtype=float))
    keep = []
    for g in gens:
        if not any(np.linalg.norm(g - k) < 1e-12 for k in keep):
            keep.append(g)
    gens = np.asarray(keep)
    gauges = np.asarray([body.gauge(g) for g in gens])
    bad = np.nonzero(gauges < 2.0 - 1e-9)[0]
    if len(bad):
        worst = bad[np.argmin(gauges[bad])]
        raise ConstraintViolationError(
            f"generator {gens[worst].tolist()} has gauge {gauges[worst]:.12f} < 2")

    phi = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    r_m = body.radial(phi)
    cap = window * r_m
    roots = halfregion_radial(body, gens, phi, cap)
    r = roots.min(axis=0)
    which = roots.argmin(axis=0)
    strict = r < cap * (1.0 - 1e-9)
    active = np.zeros(len(gens), dtype=bool)
    for i in range(len(gens)):
        active[i] = bool(np.any(strict & (which == i)))
    return BNGon(body=body, generators=gens, phi=phi, r=r,
                 active=active, bounded=bool(strict.all()), window=window)


def truncated_area(body: ConvexBody, gon: BNGon, lam: float) -> float:
    """lam-truncated area of a bisector n-gon: area(P ∩ (1+lam) M)."""
    return gon.truncated_area_radial(lam)
