"""Truncated densities of unit-ball packings in 3-space: spherical caps,
the dodecahedral density bound, a weaker comparison bound, the weighted
neighbor-count inequality, and Monte Carlo volumes of truncated cells.

The regular dodecahedron circumscribed about the unit ball has circumradius
sqrt(3) tan(pi/5) and midradius sqrt(10 - 2 sqrt(5))/2; for soft parameters
up to midradius - 1 its twelve caps are pairwise disjoint, which makes the
truncated volume a plain cap subtraction and the density bound a closed
form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolationError, ParameterError

DODEC_CIRCUMRADIUS = math.sqrt(3.0) * math.tan(math.pi / 5.0)       # 1.2584...
DODEC_MIDRADIUS = math.sqrt(10.0 - 2.0 * math.sqrt(5.0)) / 2.0      # 1.1755...
ALPHA0 = 1.26            # weighted neighbor count: L(t) = (a0 - t)/(a0 - 1)
PHI0 = math.atan(1.0 / math.sqrt(2.0))                              # 0.6154...
PSI0 = -math.atan(math.sqrt(2.0 / 3.0) * math.tan(5.0 * PHI0))      # 0.0524...

BALL_VOLUME = 4.0 * math.pi / 3.0


@dataclass(frozen=True)
class DodecConstants:
    circumradius: float = DODEC_CIRCUMRADIUS
    midradius: float = DODEC_MIDRADIUS
    inradius: float = 1.0


def dodecahedron_normals() -> np.ndarray:
    """Unit face normals of the regular dodecahedron circumscribed about the
    unit ball (the icosahedron vertex directions)."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    out = []
    for a in (-1.0, 1.0):
        for b in (-phi, phi):
            out += [(0.0, a, b), (a, b, 0.0), (b, 0.0, a)]
    return np.asarray(out) / math.sqrt(1.0 + phi * phi)


def fcc_normals() -> np.ndarray:
    """Unit face normals of the rhombic dodecahedron (FCC Voronoi cell)."""
    out = []
    for i in range(3):
        for j in range(i + 1, 3):
            for si in (-1.0, 1.0):
                for sj in (-1.0, 1.0):
                    v = [0.0, 0.0, 0.0]
                    v[i], v[j] = si, sj
                    out.append(v)
    return np.asarray(out) / math.sqrt(2.0)


# ---------------------------------------------------------------------- #
# caps

def cap_volume(rho: float, h: float) -> float:
    """Volume of a spherical cap of height h cut from a ball of radius rho:
    pi (rho h^2 - h^3 / 3); strictly increasing and convex in h on (0, rho)."""
    if not 0.0 <= h <= rho:
        raise ParameterError(f"cap height must lie in [0, {rho}], got {h}")
    return math.pi * (rho * h * h - h ** 3 / 3.0)


def cap_volume_quadrature(rho: float, h: float, n: int = 20000) -> float:
    """Solid-of-revolution oracle for the cap volume (midpoint rule on
    pi (rho^2 - z^2) over z in [rho - h, rho])."""
    if not 0.0 <= h <= rho:
        raise ParameterError("cap height out of range")
    z = np.linspace(rho - h, rho, n + 1)
    zm = 0.5 * (z[1:] + z[:-1])
    return float(np.sum(math.pi * (rho * rho - zm * zm)) * (h / n))


@dataclass
class CapSumReport:
    total: float
    sum_heights: float
    bound_applicable: bool
    bound_value: float | None
    bound_holds: bool | None


def cap_sum_bound(lam: float, heights) -> CapSumReport:
    """Sum of cap volumes F(h_1..h_m) at ball radius 1 + lam, with the
    twelve-cap comparison: when sum h_i <= 12 lam (and each h_i <= lam),
    F is at most 12 caps of height lam, which equals the volume between the
    scaled ball and the circumscribed dodecahedron for lam <= midradius - 1.
    """
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    rho = 1.0 + lam
    heights = np.asarray(heights, dtype=float)
    if np.any(heights < 0) or np.any(heights > rho):
        raise ParameterError("cap heights must lie in [0, 1 + lambda]")
    total = float(sum(cap_volume(rho, float(h)) for h in heights))
    s = float(heights.sum())
    applicable = bool(s <= 12.0 * lam + 1e-15 and np.all(heights <= lam + 1e-15)
                      and lam <= DODEC_MIDRADIUS - 1.0 + 1e-15)
    if applicable:
        bound = 12.0 * cap_volume(rho, lam)
        return CapSumReport(total, s, True, bound, bool(total <= bound + 1e-12))
    return CapSumReport(total, s, False, None, None)


# ---------------------------------------------------------------------- #
# density bounds

def ball_density_bound(lam: float) -> float:
    """Sharp truncated-density bound: ball volume over the volume of the
    circumscribed regular dodecahedron clipped by the (1 + lam) ball,
    in closed form 4 pi / (4 pi (1+lam)^3 - 36 pi (lam^2 + 2 lam^3 / 3)).

    The closed form equals the definitional ratio for lam <= midradius - 1,
    where the twelve caps are disjoint; it is defined up to circumradius - 1.
    """
    if not 0.0 < lam <= DODEC_CIRCUMRADIUS - 1.0 + 1e-15:
        raise ParameterError(
            f"lambda must lie in (0, {DODEC_CIRCUMRADIUS - 1.0:.6f}]")
    denom = 4.0 * math.pi * (1.0 + lam) ** 3 \
        - 36.0 * math.pi * (lam * lam + (2.0 / 3.0) * lam ** 3)
    return 4.0 * math.pi / denom


def ball_density_bound_definitional(lam: float) -> float:
    """The same bound from its definition via cap subtraction:
    vol(ball) / (vol((1+lam) ball) - 12 caps); valid while caps are disjoint
    (lam <= midradius - 1)."""
    if not 0.0 < lam <= DODEC_MIDRADIUS - 1.0 + 1e-12:
        raise ParameterError(
            f"cap subtraction needs lambda in (0, {DODEC_MIDRADIUS - 1.0:.6f}]")
    rho = 1.0 + lam
    vol = BALL_VOLUME * rho ** 3 - 12.0 * cap_volume(rho, lam)
    return BALL_VOLUME / vol


def ball_density_bound_coarse(lam: float) -> float:
    """A weaker closed-form comparison bound (strictly above the sharp one
    on its whole range (0, 2/sqrt(3) - 1])."""
    lim = 2.0 / math.sqrt(3.0) - 1.0
    if not 0.0 < lam <= lim + 1e-15:
        raise ParameterError(f"lambda must lie in (0, {lim:.6f}]")
    a = math.pi - 6.0 * PSI0
    denom = a + (3.0 * math.pi - 18.0 * PSI0) * lam \
        - (6.0 * math.pi + 18.0 * PSI0) * lam ** 2 \
        - (5.0 * math.pi + 6.0 * PSI0) * lam ** 3
    return a / denom


# ---------------------------------------------------------------------- #
# weighted neighbor count

def weighted_neighbor_count(points) -> float:
    """Sum of L(|x_i| / 2) with L(t) = (1.26 - t) / 0.26 over a configuration
    with 2 <= |x_i| <= 2.52 and pairwise distances >= 2; the classical
    inequality bounds this by 12 (checked by callers, not proved here)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 3:
        raise ParameterError("points must be 3-dimensional")
    norms = np.linalg.norm(pts, axis=1)
    for i, nv in enumerate(norms):
        if not (2.0 - 1e-12 <= nv <= 2.0 * ALPHA0 + 1e-12):
            raise ConstraintViolationError(
                f"point {i} has norm {nv:.12f} outside [2, {2 * ALPHA0}]")
    for i in range(len(pts)):
        d = np.linalg.norm(pts[i + 1:] - pts[i], axis=1)
        if len(d) and d.min() < 2.0 - 1e-12:
            j = i + 1 + int(np.argmin(d))
            raise ConstraintViolationError(
                f"points {i} and {j} are at distance {d.min():.12f} < 2")
    return float(np.sum((ALPHA0 - norms / 2.0) / (ALPHA0 - 1.0)))


def indirect_estimate_check(m: int, lam: float, heights=None) -> dict:
    """The contradiction bookkeeping for m > 12 faces: the chain
    12 lam < sum h_i <= 12 (a0 - 1) - m (a0 - 1 - lam) is infeasible because
    (m - 12)(a0 - 1 - lam) > 0."""
    if m <= 12:
        raise ParameterError("the check applies to m > 12 faces")
    if not 0.0 < lam <= DODEC_MIDRADIUS - 1.0 + 1e-12:
        raise ParameterError("lambda must lie in (0, midradius - 1]")
    lhs = 12.0 * lam
    rhs = 12.0 * (ALPHA0 - 1.0) - m * (ALPHA0 - 1.0 - lam)
    contradiction = (m - 12) * (ALPHA0 - 1.0 - lam)
    out = {"m": m, "lam": lam, "lhs": lhs, "rhs": rhs,
           "contradiction": contradiction, "chain_feasible": bool(rhs > lhs)}
    if heights is not None:
        heights = np.asarray(heights, dtype=float)
        out["sum_heights"] = float(heights.sum())
        out["satisfies_chain"] = bool(lhs < heights.sum() <= rhs)
    return out


# ---------------------------------------------------------------------- #
# truncated cells

@dataclass
class Polytope3Cell:
    """Voronoi-type cell of a unit ball: face planes (unit normal, distance),
    every distance >= 1 so the cell contains the ball."""

    normals: np.ndarray
    dists: np.ndarray

    def __post_init__(self):
        self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        self.dists = np.asarray(self.dists, dtype=float)
        if self.normals.shape[1] != 3 or len(self.dists) != len(self.normals):
            raise ParameterError("need matching (m,3) normals and (m,) distances")
        norms = np.linalg.norm(self.normals, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            self.normals = self.normals / norms[:, None]
        bad = np.nonzero(self.dists < 1.0 - 1e-12)[0]
        if len(bad):
            raise ParameterError(
                f"face {bad[0]} at distance {self.dists[bad[0]]:.12f} < 1 "
                f"cannot bound a unit-ball cell")

    @classmethod
    def dodecahedron(cls) -> "Polytope3Cell":
        n = dodecahedron_normals()
        return cls(n, np.ones(len(n)))

    @classmethod
    def fcc(cls) -> "Polytope3Cell":
        n = fcc_normals()
        return cls(n, np.ones(len(n)))

    @classmethod
    def all_far(cls, dist: float) -> "Polytope3Cell":
        n = dodecahedron_normals()
        return cls(n, np.full(len(n), dist))

    @classmethod
    def from_json(cls, data) -> "Polytope3Cell":
        faces = np.asarray(data["faces"], dtype=float)
        return cls(faces[:, :3], faces[:, 3])

    def to_json(self) -> dict:
        return {"faces": np.column_stack([self.normals, self.dists]).tolist()}

    def cap_heights(self, lam: float) -> np.ndarray:
        return np.maximum(0.0, (1.0 + lam) - self.dists)

    def caps_pairwise_disjoint(self, lam: float) -> bool:
        """Exact disjointness of the solid caps: the surface caps around the
        face normals must not overlap on the sphere of radius 1 + lam."""
        rho = 1.0 + lam
        h = self.cap_heights(lam)
        act = h > 0
        if act.sum() < 2:
            return True
        n = self.normals[act]
        ang_r = np.arccos(np.clip(self.dists[act] / rho, -1.0, 1.0))
        cosang = np.clip(n @ n.T, -1.0, 1.0)
        ang = np.arccos(cosang)
        need = ang_r[:, None] + ang_r[None, :]
        mask = ~np.eye(len(n), dtype=bool)
        return bool(np.all(ang[mask] >= need[mask] - 1e-12))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return np.all(pts @ self.normals.T <= self.dists[None, :] + 1e-15, axis=1)


@dataclass
class CellDensityReport:
    lam: float
    density: float
    density_stderr: float
    volume: float
    volume_stderr: float
    exact_volume: float | None
    exact_density: float | None
    method: str
    samples: int
    notes: list = field(default_factory=list)


def truncated_cell_volume_mc(cell: Polytope3Cell, lam: float, samples: int,
                             seed: int) -> tuple[float, float]:
    """Monte Carlo volume of cell ∩ (1+lam) ball, stratified by octant:
    base points are drawn in the positive octant of the bounding cube and
    evaluated under all eight sign patterns."""
    rho = 1.0 + lam
    m = max(samples // 8, 1)
    rng = np.random.default_rng(seed)
    signs = np.array([[sx, sy, sz] for sx in (1.0, -1.0)
                      for sy in (1.0, -1.0) for sz in (1.0, -1.0)])
    batch = 500_000
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < m:
        k = min(batch, m - done)
        base = rng.uniform(0.0, rho, size=(k, 3))
        acc = np.zeros(k)
        in_ball_r2 = np.sum(base * base, axis=1) <= rho * rho
        for s in signs:
            pts = base * s
            ok = in_ball_r2 & cell.contains(pts)
            acc += ok
        acc /= 8.0
        total += float(acc.sum())
        total_sq += float((acc * acc).sum())
        done += k
    mean = total / m
    var = max(total_sq / m - mean * mean, 0.0)
    cube = (2.0 * rho) ** 3
    return mean * cube, math.sqrt(var / m) * cube


def truncated_cell_density(cell: Polytope3Cell, lam: float,
                           samples: int = 10_000_000, seed: int = 0) -> CellDensityReport:
    """Density of the unit ball in its lam-truncated cell, by Monte Carlo,
    with the exact cap-subtraction value whenever the caps are disjoint."""
    if not 0.0 < lam <= DODEC_MIDRADIUS - 1.0 + 1e-12:
        raise ParameterError("lambda must lie in (0, midradius - 1]")
    if samples < 8:
        raise ParameterError("need at least 8 samples")
    rho = 1.0 + lam
    vol_mc, se = truncated_cell_volume_mc(cell, lam, samples, seed)
    exact_vol = None
    exact_density = None
    method = "monte-carlo"
    notes = []
    if cell.caps_pairwise_disjoint(lam):
        h = cell.cap_heights(lam)
        exact_vol = BALL_VOLUME * rho ** 3 - float(
            sum(cap_volume(rho, float(x)) for x in h if x > 0))
        exact_density = BALL_VOLUME / exact_vol
        method = "cap-subtraction+monte-carlo"
    else:
        notes.append("caps overlap; exact cap subtraction not applicable")
    density = BALL_VOLUME / vol_mc
    density_se = BALL_VOLUME * se / (vol_mc * vol_mc)
    return CellDensityReport(lam=lam, density=density, density_stderr=density_se,
                             volume=vol_mc, volume_stderr=se,
                             exact_volume=exact_vol, exact_density=exact_density,
                             method=method, samples=samples, notes=notes)
