"""Origin-symmetric planar convex bodies and the norm (gauge) they induce.

A body is ingested either as support-function samples on a uniform angular
grid or as a convex polygon.  Polygons are rounded: the polygon is shrunk by
the smoothing radius ``s`` and the disk of radius ``s`` is added back, which
replaces each corner by a circular arc while keeping the edges in place
(area ``A - (4 - pi) s^2``-style corner loss, e.g. ``4 - (4-pi)s^2`` for the
square ``[-1,1]^2``).  The working representation is the radial function
``r(phi)`` of the boundary about the origin; for disks and rounded polygons
it is evaluated from exact piecewise formulas, for generic support samples
from a periodic cubic spline through the reconstructed boundary.
"""

from __future__ import annotations

import json

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BodyError, ParameterError

DEFAULT_GRID = 4096
SYMMETRY_TOL = 1e-12
RADIAL_TABLE_SIZE = 32768


def _unit(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


class _HermiteTable:
    """Periodic cubic-Hermite interpolation of a function on a uniform grid,
    built from exact values and derivatives.  Error is O(h^4) where the
    function is smooth and stays below ~1e-10 at isolated curvature kinks of
    rounded polygons at the default table size."""

    def __init__(self, values: np.ndarray, derivs: np.ndarray):
        n = len(values)
        self.n = n
        self.h = 2.0 * np.pi / n
        self.v0 = values
        self.v1 = np.roll(values, -1)
        self.m0 = derivs * self.h
        self.m1 = np.roll(derivs, -1) * self.h

    def __call__(self, phi):
        x = np.asarray(phi, dtype=float) % (2.0 * np.pi) / self.h
        i = x.astype(np.int64) % self.n
        t = x - np.floor(x)
        t2 = t * t
        t3 = t2 * t
        return ((2 * t3 - 3 * t2 + 1) * self.v0[i] + (t3 - 2 * t2 + t) * self.m0[i]
                + (-2 * t3 + 3 * t2) * self.v1[i] + (t3 - t2) * self.m1[i])


class ConvexBody:
    """An o-symmetric convex body M with gauge ``|x|_M = min{mu > 0 : x in mu M}``.

    Instances are immutable after construction; every method is pure and
    safe to call concurrently.
    """

    def __init__(self, kind: str, params: dict, n_grid: int = DEFAULT_GRID):
        if n_grid < 64 or n_grid % 2:
            raise ParameterError("support grid must be even and >= 64")
        self.kind = kind
        self.n_grid = n_grid
        self._params = params
        self._rtable = None
        if kind == "disk":
            self.radius = float(params["radius"])
            if self.radius <= 0:
                raise BodyError("disk radius must be positive")
        elif kind == "rounded_polygon":
            self._init_rounded_polygon(params)
        elif kind == "support":
            self._init_support(params)
        else:
            raise BodyError(f"unknown body kind {kind!r}")
        if kind != "disk":
            grid = np.arange(RADIAL_TABLE_SIZE) * (2.0 * np.pi / RADIAL_TABLE_SIZE)
            self._rtable = _HermiteTable(self.radial_exact(grid),
                                         self.radial_deriv(grid))

    # ------------------------------------------------------------------ #
    # constructors

    @classmethod
    def disk(cls, radius: float = 1.0) -> "ConvexBody":
        return cls("disk", {"radius": float(radius)})

    @classmethod
    def from_polygon(cls, vertices, smoothing: float = 0.05,
                     n_grid: int = DEFAULT_GRID) -> "ConvexBody":
        return cls("rounded_polygon",
                   {"vertices": np.asarray(vertices, dtype=float),
                    "smoothing": float(smoothing)}, n_grid)

    @classmethod
    def from_support_samples(cls, theta, h, smoothing: float = 0.0,
                             n_grid: int = DEFAULT_GRID) -> "ConvexBody":
        return cls("support",
                   {"theta": np.asarray(theta, dtype=float),
                    "h": np.asarray(h, dtype=float),
                    "smoothing": float(smoothing)}, n_grid)

    @classmethod
    def regular_polygon(cls, sides: int, circumradius: float = 1.0,
                        smoothing: float = 0.05) -> "ConvexBody":
        if sides < 3 or sides % 2:
            raise BodyError("regular polygon body needs an even side count >= 4 "
                            "for central symmetry")
        ang = 2.0 * np.pi * np.arange(sides) / sides
        verts = circumradius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return cls.from_polygon(verts, smoothing)

    @classmethod
    def square(cls, half_side: float = 1.0, smoothing: float = 0.05) -> "ConvexBody":
        v = half_side * np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
        return cls.from_polygon(v, smoothing)

    # ------------------------------------------------------------------ #
    # kind-specific setup

    def _init_rounded_polygon(self, params):
        verts = np.asarray(params["vertices"], dtype=float)
        s = float(params["smoothing"])
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise BodyError("polygon needs at least three 2-d vertices")
        if s < 0:
            raise BodyError("smoothing radius must be >= 0")
        # ccw orientation
        area2 = np.sum(verts[:, 0] * np.roll(verts[:, 1], -1)
                       - np.roll(verts[:, 0], -1) * verts[:, 1])
        if area2 < 0:
            verts = verts[::-1]
        # central symmetry: every vertex must have its antipode
        worst = 0.0
        scale = np.abs(verts).max()
        for v in verts:
            d = np.linalg.norm(verts + v, axis=1).min()
            worst = max(worst, d)
        if worst > 1e-9 * scale:
            raise BodyError(f"polygon is not centrally symmetric; worst antipodal "
                            f"mismatch {worst:.3e}")
        edges = np.roll(verts, -1, axis=0) - verts
        nxt = np.roll(edges, -1, axis=0)
        crosses = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
        if np.any(crosses <= 0):
            raise BodyError("polygon is not strictly convex (collinear or reflex vertices)")
        normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offs = np.einsum("ij,ij->i", normals, verts)
        if np.any(offs <= s):
            raise BodyError("smoothing radius too large: an edge would vanish")
        # erode: intersect half planes <x, n_e> <= off_e - s
        inner = []
        m = len(verts)
        for i in range(m):
            j = (i - 1) % m
            A = np.stack([normals[j], normals[i]])
            b = np.array([offs[j] - s, offs[i] - s])
            inner.append(np.linalg.solve(A, b))
        inner = np.asarray(inner)
        self.smoothing = s
        self._verts = verts
        self._inner = inner             # rounded-corner arc centers
        self._normals = normals
        self._inner_offs = offs - s     # offsets of the eroded edges
        # exact area: eroded polygon + s * perimeter + pi s^2
        ix, iy = inner[:, 0], inner[:, 1]
        inner_area = 0.5 * np.sum(ix * np.roll(iy, -1) - np.roll(ix, -1) * iy)
        per = np.sum(np.linalg.norm(np.roll(inner, -1, axis=0) - inner, axis=1))
        self._area = float(inner_area + s * per + np.pi * s * s)
        self._r_max = float(np.linalg.norm(inner, axis=1).max() + s)

    def _init_support(self, params):
        theta = np.asarray(params["theta"], dtype=float)
        h = np.asarray(params["h"], dtype=float) + float(params.get("smoothing", 0.0))
        if theta.ndim != 1 or theta.shape != h.shape or len(theta) < 16:
            raise BodyError("support samples need matching 1-d theta/h with >= 16 entries")
        if np.any(h <= 0):
            raise BodyError("support function must be positive")
        order = np.argsort(theta)
        theta, h = theta[order], h[order]
        # central symmetry h(theta + pi) = h(theta)
        hs = CubicSpline(np.append(theta, theta[0] + 2 * np.pi),
                         np.append(h, h[0]), bc_type="periodic")
        probe = np.linspace(0, np.pi, 512, endpoint=False)
        mism = np.abs(hs(probe) - hs(probe + np.pi))
        worst = float(mism.max())
        if worst > max(1e-9, 1e-6 * h.max()):
            k = int(mism.argmax())
            raise BodyError(
                f"support samples are not centrally symmetric; worst antipodal "
                f"mismatch {worst:.3e} at theta={probe[k]:.6f}")
        # discrete convexity: h + h'' >= 0 (radius of curvature), checked densely
        dense = np.linspace(0, 2 * np.pi, 4 * len(theta), endpoint=False)
        curv = hs(dense) + hs(dense, 2)
        if np.any(curv < -1e-7 * h.max()):
            raise BodyError("support samples violate convexity (h + h'' < 0)")
        self._h_spline = hs
        # boundary p(theta) = h u + h' u_perp gives the radial table directly
        tt = np.linspace(0, 2 * np.pi, self.n_grid, endpoint=False)
        hh, hp = hs(tt), hs(tt, 1)
        u = _unit(tt)
        up = np.stack([-u[:, 1], u[:, 0]], axis=1)
        p = hh[:, None] * u + hp[:, None] * up
        phi = np.unwrap(np.arctan2(p[:, 1], p[:, 0]))
        r = np.linalg.norm(p, axis=1)
        if np.any(np.diff(phi) <= 0):
            raise BodyError("boundary parametrization is not monotone; body too "
                            "non-convex or under-resolved")
        phi0 = phi[0]
        self._r_spline = CubicSpline(np.append(phi, phi0 + 2 * np.pi) - phi0,
                                     np.append(r, r[0]), bc_type="periodic")
        self._phi0 = phi0
        # support-form area on the uniform theta grid (periodic trapezoid is
        # spectrally accurate for smooth h)
        self._area = float(0.5 * np.mean(hh * hh - hp * hp) * 2 * np.pi)
        self._r_max = float(r.max())

    # ------------------------------------------------------------------ #
    # radial function r(phi) of the boundary, and its derivative

    def radial(self, phi) -> np.ndarray:
        """Boundary radius in direction phi (fast path; ~1e-10 accurate)."""
        phi = np.asarray(phi, dtype=float)
        if self.kind == "disk":
            return np.full(phi.shape, self.radius)
        return self._rtable(phi)

    def radial_exact(self, phi) -> np.ndarray:
        """Boundary radius from the defining representation (slower)."""
        phi = np.asarray(phi, dtype=float)
        if self.kind == "disk":
            return np.full(phi.shape, self.radius)
        if self.kind == "support":
            return self._r_spline(np.mod(phi - self._phi0, 2 * np.pi))
        return self._rounded_radial(phi)[0]

    def radial_deriv(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        if self.kind == "disk":
            return np.zeros(phi.shape)
        if self.kind == "support":
            return self._r_spline(np.mod(phi - self._phi0, 2 * np.pi), 1)
        r, u = self._rounded_radial(phi)
        d = _unit(phi)
        dp = np.stack([-d[..., 1], d[..., 0]], axis=-1)
        return -r * np.einsum("...i,...i->...", dp, u) / np.einsum("...i,...i->...", d, u)

    def _rounded_radial(self, phi):
        """Radial function of the rounded polygon plus the outward unit
        normal at the hit, both exact.

        The boundary is the union of corner arcs (circles of radius s about
        the eroded vertices) and offset edge segments; the ray hit is the
        farthest candidate intersection, all of which lie inside the body.
        """
        d = _unit(phi)  # (..., 2)
        s = self.smoothing
        W = self._inner  # (m, 2)
        NONE = -1e300
        proj = d @ W.T                                # (..., m)
        crossv = d[..., 0, None] * W[:, 1] - d[..., 1, None] * W[:, 0]
        disc = s * s - crossv ** 2
        t_arc = np.where(disc >= 0, proj + np.sqrt(np.maximum(disc, 0.0)), NONE)
        best = np.max(t_arc, axis=-1)
        idx = np.argmax(t_arc, axis=-1)
        normal = (np.maximum(best, 0.0)[..., None] * d - W[idx]) / max(s, 1e-300)
        if s == 0.0:
            best = np.full(best.shape, NONE)
        # offset edges: <x, n_e> = inner_off_e + s, hit must project inside the edge
        Wn = np.roll(W, -1, axis=0)
        E = Wn - W
        elen2 = np.einsum("ij,ij->i", E, E)
        den = d @ self._normals.T                      # (..., m)
        offs = self._inner_offs + s
        t_edge = np.where(den > 1e-14, offs / np.maximum(den, 1e-14), NONE)
        hit = t_edge[..., None] * d[..., None, :]      # (..., m, 2)
        tau = np.einsum("...mi,mi->...m", hit - W, E) / elen2
        ok = (tau >= -1e-12) & (tau <= 1 + 1e-12) & (t_edge > NONE)
        t_edge = np.where(ok, t_edge, NONE)
        e_best = np.max(t_edge, axis=-1)
        e_idx = np.argmax(t_edge, axis=-1)
        use_edge = e_best > best
        r = np.where(use_edge, e_best, best)
        normal = np.where(use_edge[..., None], self._normals[e_idx], normal)
        return r, normal

    # ------------------------------------------------------------------ #
    # gauge and friends

    def gauge(self, x) -> np.ndarray | float:
        """Minkowski gauge min{mu >= 0 : x in mu M}; 0 exactly at the origin."""
        return self._gauge_impl(x, self.radial_exact)

    def gauge_fast(self, x) -> np.ndarray | float:
        """Gauge through the radial lookup table (~1e-7 relative for rounded
        polygons, machine precision otherwise); the hot-loop variant."""
        return self._gauge_impl(x, self.radial)

    def _gauge_impl(self, x, radial_fn) -> np.ndarray | float:
        pts = np.asarray(x, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        rr = np.hypot(pts[:, 0], pts[:, 1])
        out = np.zeros(len(pts))
        nz = rr > 0
        if nz.any():
            phi = np.arctan2(pts[nz, 1], pts[nz, 0])
            out[nz] = rr[nz] / radial_fn(phi)
        return float(out[0]) if scalar else out

    def gauge_grad(self, x) -> np.ndarray:
        """Gradient of the gauge (undefined at the origin)."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        rr = np.linalg.norm(pts, axis=1)
        if np.any(rr == 0):
            raise ParameterError("gauge gradient undefined at the origin")
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        r, rp = self.radial_exact(phi), self.radial_deriv(phi)
        dhat = pts / rr[:, None]
        phat = np.stack([-dhat[:, 1], dhat[:, 0]], axis=1)
        g = (r[:, None] * dhat - rp[:, None] * phat) / (r * r)[:, None]
        return g[0] if np.asarray(x).ndim == 1 else g

    def contains(self, x, scale: float = 1.0, tol: float = 1e-12) -> np.ndarray:
        g = self.gauge(x)
        return np.asarray(g) <= scale * (1.0 + tol)

    def support(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "disk":
            return np.full(theta.shape, self.radius)
        if self.kind == "support":
            return self._h_spline(np.mod(theta, 2 * np.pi))
        u = _unit(theta)
        return np.max(u @ self._inner.T, axis=-1) + self.smoothing

    def boundary_point_for_normal(self, u) -> np.ndarray:
        """The boundary point whose outer unit normal is ``u``.

        Unique for strictly convex boundaries; on a flat edge of a rounded
        polygon (normal exactly along the edge normal) the midpoint of the
        tied support set is returned.
        """
        u = np.asarray(u, dtype=float).reshape(2)
        nu = np.linalg.norm(u)
        if nu == 0:
            raise ParameterError("normal direction must be nonzero")
        u = u / nu
        if self.kind == "disk":
            return self.radius * u
        if self.kind == "rounded_polygon":
            vals = self._inner @ u
            top = vals.max()
            tied = self._inner[vals >= top - 1e-12 * max(1.0, abs(top))]
            return tied.mean(axis=0) + self.smoothing * u
        theta = float(np.arctan2(u[1], u[0]))
        h = float(self._h_spline(np.mod(theta, 2 * np.pi)))
        hp = float(self._h_spline(np.mod(theta, 2 * np.pi), 1))
        return h * u + hp * np.array([-u[1], u[0]])

    def scale(self, factor: float) -> "ConvexBody":
        """The scaled body ``factor * M``; factor must be >= 0 (0 is rejected
        because the result would not be a body)."""
        if factor < 0:
            raise ParameterError("scale factor must be nonnegative")
        if factor == 0:
            raise ParameterError("scale factor 0 would collapse the body")
        if self.kind == "disk":
            return ConvexBody.disk(self.radius * factor)
        if self.kind == "rounded_polygon":
            return ConvexBody.from_polygon(self._verts * factor,
                                           self.smoothing * factor, self.n_grid)
        th = self._params["theta"]
        return ConvexBody.from_support_samples(
            th, (np.asarray(self._params["h"]) +
                 self._params.get("smoothing", 0.0)) * factor, 0.0, self.n_grid)

    def area(self) -> float:
        if self.kind == "disk":
            return np.pi * self.radius ** 2
        return self._area

    def r_max(self) -> float:
        """Largest Euclidean distance from the origin to the boundary."""
        if self.kind == "disk":
            return self.radius
        return self._r_max

    def flat_normals(self) -> np.ndarray:
        """Outer-normal angles of flat boundary edges (empty for strictly
        convex bodies).  At these angles the touching point is non-unique
        and boundary_point_for_normal returns the edge midpoint; quantities
        optimized over contact normals may be discontinuous across them."""
        if self.kind != "rounded_polygon":
            return np.zeros(0)
        return np.sort(np.arctan2(self._normals[:, 1], self._normals[:, 0]) % (2 * np.pi))

    def boundary_polyline(self, n: int = 4096) -> np.ndarray:
        phi = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        r = self.radial(phi)
        return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)

    # ------------------------------------------------------------------ #
    # JSON interface

    @classmethod
    def from_json(cls, data: dict | str) -> "ConvexBody":
        if isinstance(data, str):
            data = json.loads(data)
        kind = data.get("kind")
        s = float(data.get("smoothing", 0.0))
        if kind == "polygon":
            return cls.from_polygon(np.asarray(data["vertices"], dtype=float), s)
        if kind == "support":
            samples = np.asarray(data["samples"], dtype=float)
            if samples.ndim != 2 or samples.shape[1] != 2:
                raise BodyError("'samples' must be a list of [theta, h] pairs")
            return cls.from_support_samples(samples[:, 0], samples[:, 1], s)
        if kind == "disk":
            return cls.disk(float(data.get("radius", 1.0)))
        raise BodyError(f"unknown body kind {kind!r} in JSON")

    def to_json(self) -> dict:
        if self.kind == "disk":
            return {"kind": "disk", "radius": self.radius}
        if self.kind == "rounded_polygon":
            return {"kind": "polygon", "vertices": self._verts.tolist(),
                    "smoothing": self.smoothing}
        return {"kind": "support",
                "samples": np.stack([self._params["theta"],
                                     self._params["h"]], axis=1).tolist(),
                "smoothing": self._params.get("smoothing", 0.0)}

    def __repr__(self):
        return f"ConvexBody(kind={self.kind!r}, area={self.area():.6f})"
