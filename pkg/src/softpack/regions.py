"""Planar arc-chain regions: signed areas, clipping against convex curves,
and Monte Carlo area estimation.

Curves are polylines sampled densely enough that chord error stays below the
geometric tolerance; all booleans here assume a star-shaped subject and a
convex clipper, which is the only combination the rest of the package needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MalformedRegionError, ParameterError

# Relative chord/closure tolerance for polyline geometry.
EPS_GEOM = 1e-9


def as_vec(p) -> np.ndarray:
    v = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(v)):
        raise ParameterError(f"non-finite coordinates: {p!r}")
    return v


@dataclass
class ArcChainRegion:
    """A closed region bounded by an ordered chain of polyline segments.

    Counterclockwise orientation gives positive signed area.  An empty
    region (``segments == []``) is a legitimate value with area 0; it is
    what clipping returns when the intersection is empty.
    """

    segments: list = field(default_factory=list)

    @classmethod
    def empty(cls) -> "ArcChainRegion":
        return cls([])

    @classmethod
    def from_polyline(cls, pts) -> "ArcChainRegion":
        pts = np.asarray(pts, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise MalformedRegionError("polyline must have shape (n, 2)")
        return cls([pts])

    @property
    def is_empty(self) -> bool:
        return len(self.segments) == 0

    def boundary(self) -> np.ndarray:
        """Concatenated boundary points (consecutive duplicates dropped)."""
        if self.is_empty:
            return np.zeros((0, 2))
        parts = []
        for seg in self.segments:
            seg = np.asarray(seg, dtype=float)
            if parts and len(seg) and np.allclose(parts[-1][-1], seg[0], rtol=0.0, atol=1e-12):
                seg = seg[1:]
            if len(seg):
                parts.append(seg)
        return np.vstack(parts)

    def scale_hint(self) -> float:
        b = self.boundary()
        if len(b) == 0:
            return 1.0
        return max(1.0, float(np.abs(b).max()))

    def is_closed(self, tol: float | None = None) -> bool:
        b = self.boundary()
        if len(b) < 3:
            return False
        tol = (10.0 * EPS_GEOM * self.scale_hint()) if tol is None else tol
        return bool(np.linalg.norm(b[0] - b[-1]) <= tol)


def signed_area(region: ArcChainRegion) -> float:
    """Signed area of a closed arc-chain region via the shoelace integral.

    Positive for counterclockwise boundaries.  Raises MalformedRegionError
    when the boundary does not close within tolerance.
    """
    if region.is_empty:
        return 0.0
    if not region.is_closed():
        raise MalformedRegionError("region boundary is not closed")
    pts = region.boundary()
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class ConvexClipper:
    """A closed convex curve used as a clipping window.

    Stored as a dense counterclockwise polyline together with a radial
    lookup about an interior point, so containment tests and boundary arcs
    are cheap.  The clipper *is* the polygon of its polyline; callers control
    accuracy through the sampling density.
    """

    def __init__(self, pts: np.ndarray):
        pts = np.asarray(pts, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise ParameterError("clipper needs a (n>=3, 2) polyline")
        if np.linalg.norm(pts[0] - pts[-1]) < 1e-14:
            pts = pts[:-1]
        center = pts.mean(axis=0)
        d = pts - center
        ang = np.arctan2(d[:, 1], d[:, 0])
        # normalize to ccw starting at the smallest angle
        if signed_area(ArcChainRegion([np.vstack([pts, pts[:1]])])) < 0:
            pts, d, ang = pts[::-1], d[::-1], ang[::-1]
        k = int(np.argmin(ang))
        pts, ang = np.roll(pts, -k, axis=0), np.roll(ang, -k)
        if np.any(np.diff(ang) <= 0):
            raise ParameterError("clipper polyline is not star-shaped convex about its centroid")
        self.center = center
        self.pts = pts
        self.angles = ang
        self.radii = np.linalg.norm(pts - center, axis=1)

    @classmethod
    def from_body(cls, body, scale: float = 1.0, n: int = 16384) -> "ConvexClipper":
        phi = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        r = scale * body.radial(phi)
        return cls(np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1))

    @classmethod
    def circle(cls, radius: float, center=(0.0, 0.0), n: int = 16384) -> "ConvexClipper":
        phi = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        c = as_vec(center)
        return cls(c + radius * np.stack([np.cos(phi), np.sin(phi)], axis=1))

    def _radius_at(self, ang: np.ndarray) -> np.ndarray:
        # linear interpolation in angle, periodic
        a0 = self.angles
        ang = np.mod(ang - a0[0], 2.0 * np.pi) + a0[0]
        idx = np.searchsorted(a0, ang, side="right") - 1
        idx = np.clip(idx, 0, len(a0) - 1)
        nxt = (idx + 1) % len(a0)
        da = np.mod(a0[nxt] - a0[idx], 2.0 * np.pi)
        da[da == 0] = 1.0
        t = np.mod(ang - a0[idx], 2.0 * np.pi) / da
        # interpolate the chord between boundary points, not the radius:
        p = self.pts[idx] + t[:, None] * (self.pts[nxt] - self.pts[idx])
        return np.linalg.norm(p - self.center, axis=1)

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts - self.center
        rr = np.linalg.norm(d, axis=1)
        ang = np.arctan2(d[:, 1], d[:, 0])
        return rr <= self._radius_at(ang) * (1.0 + 1e-12) + 1e-15

    def arc(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Boundary polyline from p to q going counterclockwise (p, q on boundary)."""
        ap = np.arctan2(p[1] - self.center[1], p[0] - self.center[0])
        aq = np.arctan2(q[1] - self.center[1], q[0] - self.center[0])
        i = int(np.searchsorted(self.angles, np.mod(ap - self.angles[0], 2 * np.pi) + self.angles[0]))
        j = int(np.searchsorted(self.angles, np.mod(aq - self.angles[0], 2 * np.pi) + self.angles[0]))
        n = len(self.pts)
        if j >= i:
            mid = self.pts[i:j]
        else:
            mid = np.vstack([self.pts[i:], self.pts[:j]])
        return np.vstack([p[None, :], mid, q[None, :]])


def _point_in_polygon(pt: np.ndarray, poly: np.ndarray) -> bool:
    # ray casting; poly closed implicitly
    x, y = pt
    px, py = poly[:, 0], poly[:, 1]
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    cond = (py > y) != (qy > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = px + (y - py) * (qx - px) / (qy - py)
    return bool(np.count_nonzero(cond & (x < xs)) % 2)


def _densify(pts: np.ndarray, max_len: float) -> np.ndarray:
    """Insert collinear points so no boundary segment exceeds max_len;
    leaves the region geometry unchanged."""
    out = []
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        out.append(a[None, :])
        seg = np.linalg.norm(b - a)
        if seg > max_len:
            k = int(np.ceil(seg / max_len))
            t = np.arange(1, k)[:, None] / k
            out.append(a + t * (b - a))
    return np.vstack(out)


def clip_region(region: ArcChainRegion, clipper: ConvexClipper) -> ArcChainRegion:
    """Intersect a (star-shaped) region with a convex clipping curve.

    Returns a single arc-chain region; an empty intersection yields the
    typed empty region rather than raising.  Crossings are detected on the
    subject polyline, which is densified first so short excursions through
    the clipper boundary are not missed between vertices.
    """
    if region.is_empty:
        return ArcChainRegion.empty()
    if not region.is_closed():
        raise MalformedRegionError("clip subject must be a closed region")
    pts = region.boundary()
    if np.linalg.norm(pts[0] - pts[-1]) <= 10 * EPS_GEOM * region.scale_hint():
        pts = pts[:-1]
    pts = _densify(pts, float(np.mean(clipper.radii)) * (2.0 * np.pi / 1024.0))
    inside = clipper.contains(pts)

    if inside.all():
        return ArcChainRegion([np.vstack([pts, pts[:1]])])
    if not inside.any():
        # the clipper might sit entirely inside the subject
        if _point_in_polygon(clipper.center, pts):
            return ArcChainRegion([np.vstack([clipper.pts, clipper.pts[:1]])])
        return ArcChainRegion.empty()

    n = len(pts)
    nxt = np.arange(1, n + 1) % n
    crossing = np.nonzero(inside != inside[nxt])[0]

    def refine(i: int) -> np.ndarray:
        a, b = pts[i], pts[(i + 1) % n]
        fa = inside[i]
        lo, hi = 0.0, 1.0
        for _ in range(44):  # bisection to ~5e-14 of the segment
            mid = 0.5 * (lo + hi)
            m = a + mid * (b - a)
            if bool(clipper.contains(m[None, :])[0]) == bool(fa):
                lo = mid
            else:
                hi = mid
        return a + 0.5 * (lo + hi) * (b - a)

    cross_pts = {i: refine(i) for i in crossing}

    # walk the subject boundary, collecting inside runs
    start = int(np.argmax(inside))  # some inside point
    order = [(start + k) % n for k in range(n)]
    chains = []  # list of (entry_point_or_None, [pts...], exit_point)
    cur = [pts[start]]
    entry_pt = None
    for idx in order:
        j = (idx + 1) % n
        if inside[idx] and inside[j]:
            cur.append(pts[j])
        elif inside[idx] and not inside[j]:
            cur.append(cross_pts[idx])
            chains.append((entry_pt, cur, cross_pts[idx]))
            cur, entry_pt = None, None
        elif not inside[idx] and inside[j]:
            entry_pt = cross_pts[idx]
            cur = [cross_pts[idx], pts[j]]
    if cur is not None and chains:
        # wrapped around back to the start point: prepend to the first chain
        first_entry, first_pts, first_exit = chains[0]
        chains[0] = (entry_pt, cur[:-1] + first_pts, first_exit)

    if not chains:  # fully inside handled above; defensive
        return ArcChainRegion.empty()

    segs = []
    m = len(chains)
    for k, (_, chain, exit_pt) in enumerate(chains):
        segs.append(np.asarray(chain))
        next_entry = chains[(k + 1) % m][0]
        if next_entry is None:
            next_entry = chains[(k + 1) % m][1][0]
        segs.append(clipper.arc(exit_pt, next_entry))
    # close the loop explicitly
    segs.append(segs[0][:1])
    return ArcChainRegion(segs)


def monte_carlo_area(predicate, bbox, n_samples: int, seed: int,
                     batch: int = 2_000_000) -> tuple[float, float]:
    """Monte Carlo area of ``{p : predicate(p)}`` inside an axis-aligned box.

    ``predicate`` must accept an (m, 2) array and return a boolean mask.
    Returns (estimate, standard_error); deterministic for a fixed seed.
    """
    (x0, y0), (x1, y1) = bbox
    if not (x1 > x0 and y1 > y0):
        raise ParameterError("degenerate bounding box")
    if n_samples < 1:
        raise ParameterError("need at least one sample")
    rng = np.random.default_rng(seed)
    box_area = (x1 - x0) * (y1 - y0)
    hits = 0
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        pts = rng.uniform((x0, y0), (x1, y1), size=(m, 2))
        hits += int(np.count_nonzero(predicate(pts)))
        done += m
    p = hits / n_samples
    return box_area * p, box_area * float(np.sqrt(max(p * (1.0 - p), 1e-300) / n_samples))
