"""Command-line interface: density tables, lattice reports and figures.

Exit codes: 0 success, 2 input error, 3 numerical non-convergence.  Output
files are byte-identical for identical configuration and seed; every CSV
carries the package version and a hash of the configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bodies import ConvexBody
from .errors import SoftpackError
from . import ball3d, curved, dowker, lattice


def _config_hash(args: argparse.Namespace) -> str:
    skip = {"func", "out_dir", "out"}  # outputs are not configuration
    blob = json.dumps({k: v for k, v in sorted(vars(args).items())
                       if k not in skip}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _csv_header(args) -> str:
    return f"# softpack {__version__} config {_config_hash(args)}\n"


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _fmt(x, nd: int = 12) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.{nd}g}"


def _parse_grid(spec: str) -> list:
    """Grid syntax: 'a' | 'a,b,c' | 'a:b:n' (n points inclusive)."""
    if ":" in spec:
        a, b, n = spec.split(":")
        vals = np.linspace(float(a), float(b), int(n))
        return [float(v) for v in vals]
    return [float(v) for v in spec.split(",")]


def _load_body(path: str) -> ConvexBody:
    p = Path(path)
    if not p.exists():
        raise SoftpackError(f"body file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SoftpackError(f"malformed body JSON at line {exc.lineno}: {exc.msg}")
    return ConvexBody.from_json(data)


# ---------------------------------------------------------------------- #
# SVG helpers (hand-rolled so output is byte-stable)

def _svg_path(pts: np.ndarray, style: str) -> str:
    d = "M " + " L ".join(f"{x:.6f},{y:.6f}" for x, y in pts) + " Z"
    return f'<path d="{d}" {style}/>'


def _svg_document(elements: list, extent: float) -> str:
    e = extent
    return (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'viewBox="{-e:.3f} {-e:.3f} {2 * e:.3f} {2 * e:.3f}" '
            f'width="640" height="640">\n'
            f'<g transform="scale(1,-1)">\n' + "\n".join(elements) + "\n</g>\n</svg>\n")


_STYLE_BODY = 'fill="none" stroke="#1f77b4" stroke-width="0.012"'
_STYLE_SOFT = 'fill="none" stroke="#aec7e8" stroke-width="0.008" stroke-dasharray="0.05,0.03"'
_STYLE_GON = 'fill="none" stroke="#d62728" stroke-width="0.010"'
_STYLE_CELL = 'fill="none" stroke="#2ca02c" stroke-width="0.010"'
_STYLE_PAR = 'fill="none" stroke="#7f7f7f" stroke-width="0.008"'


# ---------------------------------------------------------------------- #
# commands

def cmd_dowker(args) -> int:
    body = _load_body(args.body)
    lam = args.lam
    if lam is None or lam <= 0:
        raise SoftpackError("dowker needs --lambda > 0")
    out = Path(args.out_dir)
    table = dowker.dowker_table(body, lam, args.n_min, args.n_max,
                                n_contact=args.resolution)
    lines = [_csv_header(args), "n,A_n,convexity_defect,symmetric_optimum\n"]
    for n, a_n, defect, sym in table.rows():
        d = "" if math.isnan(defect) else _fmt(defect)
        lines.append(f"{n},{_fmt(a_n)},{d},{_fmt(sym)}\n")
    _write(out / "dowker.csv", "".join(lines))

    tilings = {str(n): list(map(float, table.entries[n][1])) for n in table.ns()}
    _write(out / "dowker_tilings.json",
           json.dumps({"lambda": lam, "resolution": table.resolution,
                       "tilings": tilings}, indent=2, sort_keys=True) + "\n")

    elements = [_svg_path(body.boundary_polyline(512), _STYLE_BODY),
                _svg_path((1 + lam) * body.boundary_polyline(512), _STYLE_SOFT)]
    eng = dowker.get_engine(body, lam, n_contact=args.resolution)
    for n in (args.n_min, args.n_max):
        tiling = table.entries[n][1]
        gens = [2.0 * body.boundary_point_for_normal(
            np.array([math.cos(t), math.sin(t)])) for t in tiling]
        from .bisectors import build_bngon
        gon = build_bngon(body, np.asarray(gens), n_phi=1024)
        pts = gon.r[:, None] * np.stack([np.cos(gon.phi), np.sin(gon.phi)], axis=1)
        elements.append(_svg_path(pts, _STYLE_GON))
    _write(out / "dowker.svg",
           _svg_document(elements, extent=1.3 * (1 + lam) * body.r_max()))
    print(f"dowker: wrote {out}/dowker.csv, dowker_tilings.json, dowker.svg")
    return 0


def cmd_lattice(args) -> int:
    body = _load_body(args.body)
    lams = _parse_grid(args.lambda_grid) if args.lambda_grid else [args.lam]
    if not lams or any(l is None or not 0 < l <= 1 for l in lams):
        raise SoftpackError("lattice needs --lambda / --lambda-grid inside (0, 1]")
    out = Path(args.out_dir)
    rows = [_csv_header(args),
            "lambda,delta_truncated,delta_soft,delta_packing,u_x,u_y,v_x,v_y,"
            "route_agreement,converged\n"]
    reports = []
    prev_basis = None
    all_converged = True
    for lam in lams:
        seeds = [prev_basis] if prev_basis is not None else None
        res = lattice.optimize_lattice(body, lam, n_starts=args.starts,
                                       seed=args.seed, initial_bases=seeds)
        rep = res.report
        prev_basis = np.concatenate([res.packing.u, res.packing.v])
        all_converged &= res.converged
        rows.append(",".join([
            _fmt(lam), _fmt(rep.delta_truncated), _fmt(rep.delta_soft),
            _fmt(rep.delta_packing), _fmt(res.packing.u[0]), _fmt(res.packing.u[1]),
            _fmt(res.packing.v[0]), _fmt(res.packing.v[1]),
            _fmt(res.agreement), _fmt(res.converged)]) + "\n")
        reports.append({
            "lambda": lam, "report": rep.to_json(),
            "route_bngon": res.route_bngon, "route_direct": res.route_direct,
            "dowker_bound": res.dowker_bound, "agreement": res.agreement,
            "converged": res.converged, "best_found_only": not res.converged,
            "notes": res.notes,
        })
    _write(out / "lattice_sweep.csv", "".join(rows))
    _write(out / "lattice.json", json.dumps(
        {"body": body.to_json(), "seed": args.seed, "results": reports},
        indent=2, sort_keys=True, default=float) + "\n")

    res_last = reports[-1]
    u = np.asarray(res_last["report"]["basis"][0])
    v = np.asarray(res_last["report"]["basis"][1])
    elements = []
    for k in (-1, 0, 1):
        for m in (-1, 0, 1):
            c = k * u + m * v
            elements.append(_svg_path(c + body.boundary_polyline(256), _STYLE_BODY))
            elements.append(_svg_path(c + (1 + lams[-1]) * body.boundary_polyline(256),
                                      _STYLE_SOFT))
    par = np.array([[0.0, 0.0], u, u + v, v, [0.0, 0.0]])
    elements.append(_svg_path(par, _STYLE_PAR))
    cellpts = lattice.voronoi_cell(lattice.LatticePacking(body, u, v), 512)
    elements.append(_svg_path(cellpts.boundary(), _STYLE_CELL))
    _write(out / "lattice.svg", _svg_document(
        elements, extent=float(np.abs([u, v]).sum(axis=0).max()) + 2.5))
    print(f"lattice: wrote {out}/lattice_sweep.csv, lattice.json, lattice.svg")
    return 0 if all_converged else 3


def cmd_curved(args) -> int:
    kappa = {"+1": 1, "1": 1, "0": 0, "-1": -1}.get(args.kappa)
    if kappa is None:
        raise SoftpackError("kappa must be +1, 0 or -1")
    r = args.r
    lam = args.lam
    if r is None or r <= 0 or (kappa == 1 and r >= math.pi / 3):
        raise SoftpackError("need r > 0 (and r < pi/3 on the sphere)")
    if lam is None or lam <= 0:
        raise SoftpackError("curved needs --lambda > 0")
    out = Path(args.out_dir)
    sigma, sigma_bar = curved.regular_triangle_bounds(kappa, r, lam)
    s_hi = min(2.5 * r, 1.4) if kappa == 1 else 2.0 * r
    wedge = curved.lemma_monotone_wedge(kappa, r, lam, r,
                                        np.linspace(0.1 * r, s_hi, args.grid))
    R = curved.circumradius_regular_triangle(kappa, r)
    hypo = curved.lemma_monotone_hypotenuse(
        kappa, r, lam, np.linspace(r, R - 1e-6 * max(r, 1.0), args.grid))
    check = curved.theorem_bound_check(kappa, r, lam, n=args.samples,
                                       seed=args.seed)
    lines = [_csv_header(args),
             "kappa,r,lambda,sigma,sigma_bar,wedge_max_increase,"
             "hypotenuse_max_increase,sample_violations,worst_core_excess,"
             "worst_soft_excess\n",
             ",".join([
                 str(kappa), _fmt(r), _fmt(lam), _fmt(sigma), _fmt(sigma_bar),
                 _fmt(max(wedge.max_increase_core, wedge.max_increase_soft)),
                 _fmt(max(hypo.max_increase_core, hypo.max_increase_soft)),
                 str(check["violations"]), _fmt(check["worst_core_excess"]),
                 _fmt(check["worst_soft_excess"])]) + "\n"]
    _write(out / "curved.csv", "".join(lines))
    print(f"curved: wrote {out}/curved.csv")
    return 0


def cmd_ball3d(args) -> int:
    lams = _parse_grid(args.lambda_grid) if args.lambda_grid else [args.lam]
    lim = ball3d.DODEC_MIDRADIUS - 1.0
    if not lams or any(l is None or not 0 < l <= lim + 1e-12 for l in lams):
        raise SoftpackError(f"ball3d needs lambda inside (0, {lim:.6f}]")
    out = Path(args.out_dir)
    fcc = ball3d.Polytope3Cell.fcc()
    lines = [_csv_header(args),
             "lambda,density_bound,density_bound_coarse,bound_lt_coarse,"
             "fcc_density,fcc_stderr,fcc_exact,fcc_below_bound\n"]
    for lam in lams:
        tau = ball3d.ball_density_bound(lam)
        coarse = (ball3d.ball_density_bound_coarse(lam)
                  if lam <= 2 / math.sqrt(3) - 1 else None)
        rep = ball3d.truncated_cell_density(fcc, lam, samples=args.samples,
                                            seed=args.seed)
        below = rep.density <= tau + 4.0 * rep.density_stderr
        lines.append(",".join([
            _fmt(lam), _fmt(tau), _fmt(coarse),
            _fmt(None if coarse is None else tau < coarse),
            _fmt(rep.density), _fmt(rep.density_stderr),
            _fmt(rep.exact_density), _fmt(below)]) + "\n")
    _write(out / "ball3d.csv", "".join(lines))
    print(f"ball3d: wrote {out}/ball3d.csv")
    return 0


def cmd_make_body(args) -> int:
    if args.shape == "disk":
        body = ConvexBody.disk(args.size)
    elif args.shape == "square":
        body = ConvexBody.square(args.size, args.smoothing)
    elif args.shape == "hexagon":
        body = ConvexBody.regular_polygon(6, args.size, args.smoothing)
    else:
        raise SoftpackError(f"unknown shape {args.shape!r}")
    _write(Path(args.out), json.dumps(body.to_json(), indent=2, sort_keys=True) + "\n")
    print(f"make-body: wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="softpack",
        description="Truncated and soft packing densities for convex bodies")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, body=False):
        p.add_argument("--out-dir", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        if body:
            p.add_argument("--body", required=True, help="body JSON file")

    p = sub.add_parser("dowker", help="minimal truncated n-gon areas")
    common(p, body=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--resolution", type=int, default=720,
                   help="contact-normal grid size")
    p.set_defaults(func=cmd_dowker)

    p = sub.add_parser("lattice", help="optimal lattice packing densities")
    common(p, body=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--lambda-grid", dest="lambda_grid",
                   help="'a,b,c' or 'a:b:n'")
    p.add_argument("--starts", type=int, default=16,
                   help="multistart count for the direct search")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("curved", help="constant-curvature disk bounds")
    common(p)
    p.add_argument("--kappa", required=True, choices=["+1", "1", "0", "-1"])
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--grid", type=int, default=8, help="harness grid size")
    p.add_argument("--samples", type=int, default=200,
                   help="random admissible triangles")
    p.set_defaults(func=cmd_curved)

    p = sub.add_parser("ball3d", help="3-space truncated density bounds")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--lambda-grid", dest="lambda_grid")
    p.add_argument("--samples", type=int, default=10_000_000,
                   help="Monte Carlo samples per cell")
    p.set_defaults(func=cmd_ball3d)

    p = sub.add_parser("make-body", help="write a body JSON file")
    p.add_argument("--shape", required=True, choices=["disk", "square", "hexagon"])
    p.add_argument("--size", type=float, default=1.0,
                   help="radius / half side / circumradius")
    p.add_argument("--smoothing", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_body)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SoftpackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
