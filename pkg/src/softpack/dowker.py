"""Minimal truncated areas of bisector n-gons as a circle-tiling problem.

A bisector n-gon of minimal truncated area circumscribes the body, touching
it once per side, so the minimization runs over n-part tilings of the circle
of contact normals.  Each contact normal contributes a "cap": the radial
boundary of the half-region of points gauge-closer to the origin than to
twice the touching point, clipped inside the scaled body (1 + lambda) M.
The area assigned to an arc of normals is the area between the body boundary
and the two end caps, a 1-d integral in the polar angle; arc costs satisfy a
quadrangle inequality, which makes the minimal values A_n convex in n.  Both
facts are verified numerically by the test suite rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .bodies import ConvexBody
from .bisectors import halfregion_radial, halfregion_radial_elementwise
from .errors import ConstraintViolationError, ConvergenceError, ParameterError

TWO_PI = 2.0 * math.pi
TOL_DOWKER = 1e-6  # convexity-defect tolerance, dominated by DP discretization


def _unit(phi):
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


@dataclass(frozen=True)
class Arc:
    """A closed counterclockwise arc of the unit circle: ``start`` plus
    ``width`` radians; width 0 is the degenerate arc, width 2*pi the full
    circle."""

    start: float
    width: float

    def __post_init__(self):
        if not 0.0 <= self.width <= TWO_PI:
            raise ParameterError("arc width must lie in [0, 2*pi]")

    @classmethod
    def between(cls, start: float, end: float) -> "Arc":
        return cls(start % TWO_PI, (end - start) % TWO_PI)

    @classmethod
    def full(cls, start: float = 0.0) -> "Arc":
        return cls(start % TWO_PI, TWO_PI)

    @property
    def end(self) -> float:
        return (self.start + self.width) % TWO_PI


@dataclass
class _Cap:
    """Bisector cap of one contact normal, sampled on the engine grid.

    Node ids are absolute: node i sits at polar angle i*h, where negative
    ids wrap below zero.  q holds the (nonpositive) area deficit density
    (c^2 - cap^2)/2 at nodes strictly inside the window (wa, wb).
    """

    theta: float
    site: np.ndarray
    phi_t: float
    r_t: float
    wa: float
    wb: float
    i_lo: int
    q: np.ndarray
    cumq: np.ndarray
    q_t: float = 0.0        # deficit value at the tangency angle
    def_left: float = 0.0   # integral of q over [wa, phi_t]
    def_right: float = 0.0  # integral of q over [phi_t, wb]

    @property
    def left_width(self) -> float:
        return self.phi_t - self.wa

    @property
    def right_width(self) -> float:
        return self.wb - self.phi_t


def _min_of_linear(a: float, b: float, fa, fb, ga, gb) -> float:
    """Integral over [a, b] of the min of two linear functions given their
    endpoint values (exact, including a single crossing inside)."""
    seg = b - a
    if seg <= 0:
        return 0.0
    da, db = fa - ga, fb - gb
    if da * db >= 0:
        return 0.5 * (min(fa, ga) + min(fb, gb)) * seg
    t = da / (da - db)
    w = fa + t * (fb - fa)
    return seg * (t * 0.5 * (min(fa, ga) + w) + (1 - t) * 0.5 * (w + min(fb, gb)))


class DowkerEngine:
    """Shared state for arc areas and tiling minimization at one (body, lambda)."""

    def __init__(self, body: ConvexBody, lam: float, n_contact: int = 720,
                 n_phi: int = 16384):
        if lam <= 0:
            raise ParameterError("lambda must be positive")
        if n_contact % 2:
            raise ParameterError("contact grid size must be even")
        self.body = body
        self.lam = float(lam)
        self.rho = 1.0 + float(lam)
        self.n_contact = int(n_contact)
        self.n_phi = int(n_phi)
        self.h = TWO_PI / self.n_phi
        phi = np.arange(self.n_phi) * self.h
        self.phi_grid = phi
        self.r_m = body.radial(phi)
        self.cap_r = self.rho * self.r_m
        self._w = 0.5 * (self.cap_r ** 2 - self.r_m ** 2)
        cum = np.zeros(self.n_phi + 1)
        cum[1:] = np.cumsum(0.5 * (self._w + np.roll(self._w, -1)) * self.h)
        self._cumU = cum
        self.area_m = float(0.5 * np.sum(
            0.5 * (self.r_m ** 2 + np.roll(self.r_m, -1) ** 2) * self.h))
        self._caps: dict[float, _Cap] = {}
        self._F: np.ndarray | None = None

    # ------------------------------------------------------------------ #
    # full-annulus cumulative

    def _V(self, phi: float) -> float:
        k = math.floor(phi / TWO_PI)
        psi = phi - k * TWO_PI
        i = min(int(psi / self.h), self.n_phi - 1)
        f = psi / self.h - i
        j = (i + 1) % self.n_phi
        part = self.h * (f * self._w[i] + 0.5 * f * f * (self._w[j] - self._w[i]))
        return k * self._cumU[-1] + self._cumU[i] + part

    # ------------------------------------------------------------------ #
    # caps

    def _cap_exit_residual(self, phis: np.ndarray, site: np.ndarray) -> np.ndarray:
        pts = (self.rho * self.body.radial(phis))[:, None] * _unit(phis) - site
        return self.body.gauge_fast(pts) - self.rho

    def cap(self, theta: float) -> _Cap:
        key = round(theta % TWO_PI, 13)
        hit = self._caps.get(key)
        if hit is None:
            hit = self._build_cap(theta % TWO_PI)
            self._caps[key] = hit
        return hit

    def _build_cap(self, theta: float) -> _Cap:
        body, h = self.body, self.h
        u = np.array([math.cos(theta), math.sin(theta)])
        p = body.boundary_point_for_normal(u)
        site = 2.0 * p
        phi_t = math.atan2(p[1], p[0]) % TWO_PI
        r_t = float(np.linalg.norm(p))

        def scan(sign: int) -> float:
            last_neg = phi_t
            chunk = 64
            step = 1
            limit = int(0.49 * self.n_phi)
            while step <= limit:
                k = np.arange(step, min(step + chunk, limit + 1))
                angs = phi_t + sign * k * h
                vals = self._cap_exit_residual(angs, site)
                pos = np.nonzero(vals > 0)[0]
                if len(pos):
                    jhit = int(pos[0])
                    hi_ang = angs[jhit]
                    lo_ang = angs[jhit - 1] if jhit > 0 else last_neg
                    f = lambda a: float(self._cap_exit_residual(np.array([a]), site)[0])
                    return float(brentq(f, min(lo_ang, hi_ang), max(lo_ang, hi_ang),
                                        xtol=1e-13))
                last_neg = angs[-1]
                step += len(k)
            raise ConvergenceError(
                f"bisector cap at theta={theta:.6f} does not exit the scaled body "
                f"within half a turn (lambda={self.lam})")

        wb = scan(+1)
        wa = scan(-1)
        if wa > phi_t:
            wa -= TWO_PI

        i_lo = math.floor(wa / h) + 1
        i_hi = math.ceil(wb / h) - 1
        if i_hi >= i_lo:
            ids = np.arange(i_lo, i_hi + 1)
            angs = ids * h
            caps = self.cap_r[ids % self.n_phi]
            c = halfregion_radial(body, site[None, :], angs, caps)[0]
            q = np.minimum(0.5 * (c ** 2 - caps ** 2), 0.0)
            cumq = np.zeros(len(q))
            if len(q) > 1:
                cumq[1:] = np.cumsum(0.5 * (q[:-1] + q[1:]) * h)
        else:
            i_lo, q, cumq = 0, np.zeros(0), np.zeros(0)

        cap = _Cap(theta=theta, site=site, phi_t=phi_t, r_t=r_t, wa=wa, wb=wb,
                   i_lo=i_lo, q=q, cumq=cumq)
        cap.q_t = self._q_value(cap, phi_t, known_c=r_t)
        cap.def_left = self._deficit(cap, wa, phi_t, q_b=cap.q_t)
        cap.def_right = self._deficit(cap, phi_t, wb, q_a=cap.q_t)
        return cap

    def _q_value(self, cap: _Cap, phi: float, known_c: float | None = None) -> float:
        """Deficit density of one cap at a continuous angle (0 outside window)."""
        if phi <= cap.wa + 1e-14 or phi >= cap.wb - 1e-14:
            return 0.0
        cap_r = self.rho * float(self.body.radial(np.array([phi]))[0])
        c = known_c if known_c is not None else float(
            halfregion_radial(self.body, cap.site[None, :],
                              np.array([phi]), np.array([cap_r]))[0, 0])
        return min(0.0, 0.5 * (c * c - cap_r * cap_r))

    def _deficit(self, cap: _Cap, a: float, b: float,
                 q_a: float | None = None, q_b: float | None = None) -> float:
        """Integral of the cap deficit over [a, b] (clamped to the window)."""
        a = max(a, cap.wa)
        b = min(b, cap.wb)
        if b - a <= 1e-15:
            return 0.0
        h = self.h
        ia = max(math.floor(a / h) + 1, cap.i_lo)
        ib = min(math.ceil(b / h) - 1, cap.i_lo + len(cap.q) - 1)
        if q_a is None:
            q_a = self._q_value(cap, a)
        if q_b is None:
            q_b = self._q_value(cap, b)
        if ia > ib:
            return 0.5 * (q_a + q_b) * (b - a)
        ja, jb = ia - cap.i_lo, ib - cap.i_lo
        total = cap.cumq[jb] - cap.cumq[ja]
        total += 0.5 * (q_a + cap.q[ja]) * (ia * h - a)
        total += 0.5 * (cap.q[jb] + q_b) * (b - ib * h)
        return total

    # ------------------------------------------------------------------ #
    # arc areas

    def _node_q(self, cap: _Cap, ids: np.ndarray, id_shift: int) -> np.ndarray:
        """Cap deficits at absolute node ids, where the cap has been rotated
        by id_shift grid cells; zero outside the stored window."""
        rel = ids - id_shift - cap.i_lo
        out = np.zeros(len(ids))
        ok = (rel >= 0) & (rel < len(cap.q))
        out[ok] = cap.q[rel[ok]]
        return out

    def _overlap_integral(self, angs: np.ndarray, va: np.ndarray,
                          vb: np.ndarray) -> float:
        """Integral of min(va, vb) through sample angles, with exact handling
        of cells where the two piecewise-linear branches cross."""
        a0, b0 = angs[:-1], angs[1:]
        fa, fb = va[:-1], va[1:]
        ga, gb = vb[:-1], vb[1:]
        seg = b0 - a0
        da, db = fa - ga, fb - gb
        plain = da * db >= 0
        total = float(np.sum(np.where(
            plain, 0.5 * (np.minimum(fa, ga) + np.minimum(fb, gb)) * seg, 0.0)))
        for k in np.nonzero(~plain)[0]:
            total += _min_of_linear(a0[k], b0[k], fa[k], fb[k], ga[k], gb[k])
        return total

    def _pair_area(self, cap_a: _Cap, cap_b: _Cap, delta: float) -> float:
        """Arc area between two caps whose tangencies are ``delta`` apart in
        the polar angle (unwrapped; delta in (0, 2*pi])."""
        pa = cap_a.phi_t
        pb = pa + delta
        base = self._V(pb) - self._V(pa)
        # b's window, expressed around pb
        wa_b = pb - cap_b.left_width
        shift = pb - cap_b.phi_t
        if cap_a.wb <= wa_b:  # windows disjoint: precomputed tails only
            return base + cap_a.def_right + cap_b.def_left
        lo = max(pa, wa_b)
        hi = min(pb, cap_a.wb)
        tail_a = self._deficit(cap_a, pa, lo, q_a=cap_a.q_t) if lo > pa else 0.0
        tail_b = (self._deficit(cap_b, hi - shift, pb - shift, q_b=cap_b.q_t)
                  if hi < pb else 0.0)
        if lo == pa:
            qa_lo = cap_a.q_t
            qb_lo = self._q_value(cap_b, pa - shift)
        else:
            qa_lo = self._q_value(cap_a, lo)
            qb_lo = 0.0
        if hi == pb:
            qa_hi = self._q_value(cap_a, pb)
            qb_hi = cap_b.q_t
        else:
            qa_hi = 0.0
            qb_hi = self._q_value(cap_b, hi - shift)
        h = self.h
        ia = math.floor(lo / h) + 1
        ib = math.ceil(hi / h) - 1
        if ia > ib:
            mid = _min_of_linear(lo, hi, qa_lo, qa_hi, qb_lo, qb_hi)
        else:
            ids = np.arange(ia, ib + 1)
            qa = self._node_q(cap_a, ids, 0)
            qb = self._node_q(cap_b, ids, round(shift / h))
            angs = np.concatenate([[lo], ids * h, [hi]])
            va = np.concatenate([[qa_lo], qa, [qa_hi]])
            vb = np.concatenate([[qb_lo], qb, [qb_hi]])
            mid = self._overlap_integral(angs, va, vb)
        return base + tail_a + tail_b + mid

    def arc_area(self, theta_a: float, theta_b: float,
                 width: float | None = None) -> float:
        """Truncated area between the body boundary and the two end caps over
        the counterclockwise normal arc theta_a -> theta_b."""
        if width is None:
            width = (theta_b - theta_a) % TWO_PI
        if width <= 0.0:
            return 0.0
        cap_a = self.cap(theta_a)
        cap_b = self.cap(theta_b)
        delta = (cap_b.phi_t - cap_a.phi_t) % TWO_PI
        if width >= TWO_PI - 1e-15 or (delta == 0.0 and width > math.pi):
            delta = TWO_PI
        return self._pair_area(cap_a, cap_b, delta)

    # ------------------------------------------------------------------ #
    # cost matrix over the contact grid (batched)

    def contact_thetas(self) -> np.ndarray:
        return np.arange(self.n_contact) * (TWO_PI / self.n_contact)

    def build_cost_matrix(self) -> np.ndarray:
        """F[i, j] = arc area from grid normal i counterclockwise to grid
        normal j; the diagonal holds the full-circle arc."""
        if self._F is not None:
            return self._F
        nc = self.n_contact
        caps = [self.cap(t) for t in self.contact_thetas()]
        pt = np.array([c.phi_t for c in caps])
        lw = np.array([c.left_width for c in caps])
        rw = np.array([c.right_width for c in caps])
        defl = np.array([c.def_left for c in caps])
        defr = np.array([c.def_right for c in caps])
        v_pt = np.array([self._V(p) for p in pt])
        full = self._cumU[-1]

        delta = (pt[None, :] - pt[:, None]) % TWO_PI
        np.fill_diagonal(delta, TWO_PI)
        wrap = delta - (pt[None, :] - pt[:, None])  # 0 or 2*pi
        base = v_pt[None, :] - v_pt[:, None] + wrap / TWO_PI * full
        F = base + defr[:, None] + defl[None, :]

        overlap = delta < rw[:, None] + lw[None, :] - 1e-15
        oi, oj = np.nonzero(overlap)
        if len(oi):
            d = delta[oi, oj]
            lo = np.maximum(0.0, d - lw[oj])      # pair frame: pa = 0
            hi = np.minimum(d, rw[oi])
            # batched endpoint solves: one per pair per end
            lo_on_a = lo == 0.0
            hi_on_b = hi == d
            sites = np.empty((len(oi), 2))
            phis = np.empty(len(oi))
            # at lo: if lo == 0 solve cap_b at (pa - shift), else cap_a at lo
            for k in range(len(oi)):
                i, j = oi[k], oj[k]
                if lo_on_a[k]:
                    sites[k] = caps[j].site
                    phis[k] = caps[j].phi_t - d[k]
                else:
                    sites[k] = caps[i].site
                    phis[k] = caps[i].phi_t + lo[k]
            caps_r = self.rho * self.body.radial(phis)
            c_lo = halfregion_radial_elementwise(self.body, sites, phis, caps_r)
            q_lo_other = np.minimum(0.0, 0.5 * (c_lo ** 2 - caps_r ** 2))
            for k in range(len(oi)):
                i, j = oi[k], oj[k]
                if hi_on_b[k]:
                    sites[k] = caps[i].site
                    phis[k] = caps[i].phi_t + d[k]
                else:
                    sites[k] = caps[j].site
                    phis[k] = caps[j].phi_t + (hi[k] - d[k])
            caps_r = self.rho * self.body.radial(phis)
            c_hi = halfregion_radial_elementwise(self.body, sites, phis, caps_r)
            q_hi_other = np.minimum(0.0, 0.5 * (c_hi ** 2 - caps_r ** 2))

            h = self.h
            for k in range(len(oi)):
                i, j = oi[k], oj[k]
                ca, cb = caps[i], caps[j]
                pa = ca.phi_t
                dk = d[k]
                lo_k, hi_k = pa + lo[k], pa + hi[k]
                shift = pa + dk - cb.phi_t
                if lo_on_a[k]:
                    qa_lo, qb_lo = ca.q_t, q_lo_other[k]
                    tail_a = 0.0
                else:
                    qa_lo, qb_lo = q_lo_other[k], 0.0
                    tail_a = self._deficit(ca, pa, lo_k, q_a=ca.q_t, q_b=qa_lo)
                if hi_on_b[k]:
                    qa_hi, qb_hi = q_hi_other[k], cb.q_t
                    tail_b = 0.0
                else:
                    qa_hi, qb_hi = 0.0, q_hi_other[k]
                    tail_b = self._deficit(cb, hi_k - shift, pa + dk - shift,
                                           q_a=qb_hi, q_b=cb.q_t)
                ia = math.floor(lo_k / h) + 1
                ib = math.ceil(hi_k / h) - 1
                if ia > ib:
                    mid = _min_of_linear(lo_k, hi_k, qa_lo, qa_hi, qb_lo, qb_hi)
                else:
                    ids = np.arange(ia, ib + 1)
                    qa = self._node_q(ca, ids, 0)
                    qb = self._node_q(cb, ids, round(shift / h))
                    angs = np.concatenate([[lo_k], ids * h, [hi_k]])
                    va = np.concatenate([[qa_lo], qa, [qa_hi]])
                    vb = np.concatenate([[qb_lo], qb, [qb_hi]])
                    mid = self._overlap_integral(angs, va, vb)
                F[i, j] = base[i, j] + tail_a + tail_b + mid
        self._F = F
        return F

    # ------------------------------------------------------------------ #
    # tiling minimization

    def minimize(self, n: int, symmetric: bool = False, refine: bool = True):
        """Minimal sum of arc areas over n-part tilings of the circle.

        The DP pins one breakpoint at grid angle 0; the refinement pass then
        moves every breakpoint freely, removing the pin's bias.  Returns
        (value, sorted breakpoint angles).
        """
        if n < 3:
            raise ParameterError("tilings need n >= 3")
        if symmetric and n % 2:
            raise ParameterError("symmetric tilings need even n")
        F = self.build_cost_matrix()
        nc = self.n_contact
        span = nc // 2 if symmetric else nc
        parts = n // 2 if symmetric else n
        if parts > span:
            raise ParameterError("n too large for the contact grid")
        C = np.full((span + 1, span + 1), np.inf)
        for a in range(span):
            cols = np.arange(a + 1, span + 1)
            C[a, a + 1:] = F[a % nc, cols % nc]
        best = C[0, :].copy()
        back = [np.zeros(span + 1, dtype=int)]
        for _ in range(1, parts):
            tot = best[:, None] + C
            nxt = np.argmin(tot, axis=0)
            back.append(nxt)
            best = tot[nxt, np.arange(span + 1)]
        value = float(best[span])
        bps = [span]
        t = span
        for k in range(parts - 1, 0, -1):
            t = int(back[k][t])
            bps.append(t)
        bps.append(0)
        bps = sorted(set(b % span for b in bps))
        thetas = np.asarray(bps, dtype=float) * (TWO_PI / nc)
        if symmetric:
            thetas = np.sort(np.concatenate([thetas, thetas + math.pi]) % TWO_PI)
            value *= 2.0
        if len(thetas) != n:
            raise ConvergenceError("tiling traceback produced a degenerate breakpoint set")
        if refine:
            # Candidate tilings: the DP result and the equal-width tiling.
            # Each is first rotated rigidly to its best offset (coordinate
            # descent alone cannot rotate a whole tiling across the kinks
            # that flat body edges put into the objective), then polished.
            equal = np.arange(n) * (TWO_PI / n)
            best_val, best_th = np.inf, None
            for cand in (thetas, equal):
                cand = self._best_rotation(cand)
                th_p, v_p = self._polish(cand, symmetric)
                if v_p < best_val:
                    best_val, best_th = v_p, th_p
            value, thetas = best_val, best_th
        return value, thetas

    def _best_rotation(self, thetas: np.ndarray, samples: int = 18) -> np.ndarray:
        n = len(thetas)
        window = TWO_PI / n
        offs = list(np.arange(samples) * (window / samples))
        # offsets aligning any breakpoint with any flat-edge normal, where
        # the arc cost is discontinuous and the good value lives
        flats = self.body.flat_normals()
        for f in flats:
            offs.extend(((f - t) % window for t in thetas))
        offs = sorted(set(float(o) for o in offs))
        costs = [self.tiling_cost(thetas + o) for o in offs]
        k0 = int(np.argmin(costs))
        best_off, best_cost = offs[k0], costs[k0]
        # golden-section around the best sampled offset (keep the sampled
        # point itself in case the refined continuum value is worse)
        inv = (math.sqrt(5.0) - 1.0) / 2.0
        a = best_off - window / samples
        b = best_off + window / samples
        c = b - inv * (b - a)
        d = a + inv * (b - a)
        fc, fd = self.tiling_cost(thetas + c), self.tiling_cost(thetas + d)
        while b - a > 1e-4:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - inv * (b - a)
                fc = self.tiling_cost(thetas + c)
            else:
                a, c, fc = c, d, fd
                d = a + inv * (b - a)
                fd = self.tiling_cost(thetas + d)
        mid = 0.5 * (a + b)
        if self.tiling_cost(thetas + mid) < best_cost:
            best_off = mid
        return np.sort((thetas + best_off) % TWO_PI)

    def tiling_cost(self, thetas: np.ndarray) -> float:
        thetas = np.sort(np.asarray(thetas, dtype=float) % TWO_PI)
        total = 0.0
        for k in range(len(thetas)):
            b = thetas[(k + 1) % len(thetas)]
            total += self.arc_area(thetas[k], b, width=(b - thetas[k]) % TWO_PI)
        return total

    def _polish(self, thetas: np.ndarray, symmetric: bool,
                sweeps: int = 5, xtol: float = 2e-7):
        work = np.sort(thetas % TWO_PI)
        n = len(work)
        half = n // 2 if symmetric else n
        inv = (math.sqrt(5.0) - 1.0) / 2.0
        flats = self.body.flat_normals()
        last_total = None
        for _ in range(sweeps):
            for k in range(half):
                prev = work[k - 1] - (TWO_PI if k == 0 else 0.0)
                nxt = work[(k + 1) % n] + (TWO_PI if k + 1 == n else 0.0)

                def local(t):
                    return (self.arc_area(prev % TWO_PI, t % TWO_PI,
                                          width=t - prev)
                            + self.arc_area(t % TWO_PI, nxt % TWO_PI,
                                            width=nxt - t))

                a, b = prev + 1e-9, nxt - 1e-9
                if b <= a:
                    continue
                cands = [work[k]]
                for f in flats:  # snap candidates: cost can jump off them
                    for shift in (f, f + TWO_PI, f - TWO_PI):
                        if a < shift < b:
                            cands.append(shift)
                c = b - inv * (b - a)
                dd = a + inv * (b - a)
                fc, fd = local(c), local(dd)
                while b - a > xtol:
                    if fc < fd:
                        b, dd, fd = dd, c, fc
                        c = b - inv * (b - a)
                        fc = local(c)
                    else:
                        a, c, fc = c, dd, fd
                        dd = a + inv * (b - a)
                        fd = local(dd)
                cands.append(0.5 * (a + b))
                vals = [local(t) for t in cands]
                t_best = cands[int(np.argmin(vals))]
                work[k] = t_best
                if symmetric:
                    work[(k + half) % n] = t_best + math.pi
            work = np.sort(work % TWO_PI)
            total = self.tiling_cost(work)
            if last_total is not None and last_total - total < 1e-11:
                last_total = total
                break
            last_total = total
        return work, (last_total if last_total is not None else self.tiling_cost(work))


# ---------------------------------------------------------------------- #
# module-level engine cache and the public operations

_ENGINES: dict[tuple, DowkerEngine] = {}


def get_engine(body: ConvexBody, lam: float, n_contact: int = 720,
               n_phi: int = 16384) -> DowkerEngine:
    key = (id(body), round(float(lam), 14), n_contact, n_phi)
    eng = _ENGINES.get(key)
    if eng is None or eng.body is not body:
        eng = DowkerEngine(body, lam, n_contact, n_phi)
        _ENGINES[key] = eng
    return eng


def arc_functional(body: ConvexBody, lam: float, arc: Arc) -> float:
    """Truncated area of the region between the body boundary and the
    bisector caps of an arc of outer normals; zero for degenerate arcs."""
    if arc.width == 0.0:
        return 0.0
    eng = get_engine(body, lam)
    return eng.arc_area(arc.start, arc.start + arc.width, width=arc.width)


def check_quadrangle(body: ConvexBody, lam: float,
                     x1: float, x2: float, x3: float, x4: float) -> float:
    """Quadrangle defect f(x1 x4) + f(x2 x3) - f(x1 x3) - f(x2 x4) for
    nested arcs; nonnegative up to quadrature noise."""
    w2 = (x2 - x1) % TWO_PI
    w3 = (x3 - x1) % TWO_PI
    w4 = (x4 - x1) % TWO_PI
    if w4 == 0.0 and x4 != x1:
        w4 = TWO_PI
    if not (w2 <= w3 + 1e-15 and w3 <= w4 + 1e-15):
        raise ConstraintViolationError("arcs are not nested: need x2 x3 inside x1 x4")
    eng = get_engine(body, lam)
    a14 = eng.arc_area(x1, x4, width=w4)
    a23 = eng.arc_area(x2, x3, width=w3 - w2)
    a13 = eng.arc_area(x1, x3, width=w3)
    a24 = eng.arc_area(x2, x4, width=w4 - w2)
    return a14 + a23 - a13 - a24


def minimize_truncated_area(body: ConvexBody, lam: float, n: int,
                            n_contact: int = 720, symmetric: bool | None = None,
                            refine: bool = True):
    """A_n, the least truncated area of a bisector n-gon, plus the optimal
    contact-normal tiling.

    ``symmetric=None`` also tries the o-symmetric restriction for even n and
    keeps the better tiling; True forces the restriction; False skips it.
    Returns (A_n, tiling, symmetric A_n or None).
    """
    if n < 3:
        raise ParameterError("need n >= 3")
    if n_contact < 8 * n:
        raise ParameterError("contact grid too coarse: need n_contact >= 8 n")
    eng = get_engine(body, lam, n_contact=n_contact)
    value, tiling = eng.minimize(n, symmetric=False, refine=refine)
    sym_area = None
    if n % 2 == 0 and symmetric is not False:
        sv, st = eng.minimize(n, symmetric=True, refine=refine)
        sym_area = eng.area_m + sv
        if symmetric is True or sv < value:
            value, tiling = sv, st
    return eng.area_m + value, tiling, sym_area


@dataclass
class DowkerTable:
    """Minimal truncated n-gon areas over a range of n, with convexity data."""

    lam: float
    resolution: int
    entries: dict = field(default_factory=dict)  # n -> (A_n, tiling, sym_A_n)

    def ns(self):
        return sorted(self.entries)

    def values(self) -> np.ndarray:
        return np.asarray([self.entries[n][0] for n in self.ns()])

    def convexity_defects(self) -> dict:
        ns = self.ns()
        out = {}
        for k in range(1, len(ns) - 1):
            if ns[k - 1] + 2 == ns[k + 1]:
                a, b, c = (self.entries[ns[k + d]][0] for d in (-1, 0, 1))
                out[ns[k]] = a + c - 2 * b
        return out

    def monotone_violation(self) -> float:
        v = self.values()
        return float(np.max(np.diff(v))) if len(v) > 1 else 0.0

    def flagged(self, tol: float = TOL_DOWKER):
        return {n: d for n, d in self.convexity_defects().items() if d < -tol}

    def rows(self):
        """(n, A_n, convexity defect or nan, symmetric-optimum flag) rows."""
        defects = self.convexity_defects()
        out = []
        for n in self.ns():
            a_n, _, sym = self.entries[n]
            sym_flag = (sym is not None) and abs(sym - a_n) <= 1e-6
            out.append((n, a_n, defects.get(n, float("nan")), sym_flag))
        return out


def dowker_table(body: ConvexBody, lam: float, n_lo: int = 3, n_hi: int = 10,
                 n_contact: int = 720, refine: bool = True) -> DowkerTable:
    """Tabulate A_n for n in [n_lo, n_hi] (range limited to [3, 64])."""
    if not (3 <= n_lo <= n_hi <= 64):
        raise ParameterError("n range must sit inside [3, 64]")
    table = DowkerTable(lam=lam, resolution=n_contact)
    for n in range(n_lo, n_hi + 1):
        a_n, tiling, sym = minimize_truncated_area(
            body, lam, n, n_contact=n_contact, symmetric=None, refine=refine)
        table.entries[n] = (a_n, tiling, sym)
    return table
