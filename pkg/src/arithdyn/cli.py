"""Command-line entry point: ``arithdyn <subcommand> ...``.

Every JSON artifact carries a ``config`` block with the effective flag
values, defaults included.  Domain errors exit with status 1 and a JSON
object ``{"error": ..., "message": ...}`` on stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ArithDynError
from .family import (
    canonical_height_estimate,
    detect_preperiodic,
    orbit_degrees,
    parse_map,
    resultant_locus,
    specialize,
    verdict_to_json,
)
from .lattes import (
    bundled_map_text,
    default_candidates,
    degree_growth_check,
    legendre_lattes,
    torsion_census,
    two_torsion_check,
)
from .parafind import equidist_discrepancy, intersection_probe, pcf_centers, preperiodic_params
from .plane import (
    Window,
    discrete_laplacian,
    escape_time_grid,
    grid_to_csv,
    julia_measure_grid,
    potential_grid,
    PotentialGrid,
    render_pgm,
)
from .ratfield import ProjPoint, format_rational, parse_point, parse_rational

BUNDLED = ("lattes.json", "quadratic.json")
DEFAULT_WINDOW = "-2.5,1.5,-1.5,1.5"


# -- argument types ----------------------------------------------------------


def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _positive_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _window(s: str) -> str:
    try:
        Window.parse(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return s


def _int_list(s: str) -> list[int]:
    return [_positive_int(x) for x in s.split(",")]


def _parameter(s: str):
    """Exact rational when possible, else a complex double such as ``0.3+0.5i``."""
    try:
        return parse_rational(s)
    except ValueError:
        pass
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValueError(f"expected a rational or complex parameter, got {s!r}") from None


# -- helpers -----------------------------------------------------------------


def load_map(spec: str):
    """A map file path, or the name of a bundled map when no such file exists."""
    path = Path(spec)
    if path.exists():
        return parse_map(path.read_text(), name=path.stem)
    name = spec if spec.endswith(".json") else spec + ".json"
    if name in BUNDLED:
        return parse_map(bundled_map_text(name), name=Path(name).stem)
    raise FileNotFoundError(f"no map file {spec!r} (bundled: {', '.join(BUNDLED)})")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj: dict, out: str | None) -> None:
    _emit(json.dumps(obj, indent=1) + "\n", out)


def _config(args, *names) -> dict:
    cfg = {"command": args.command}
    for n in names:
        v = getattr(args, n)
        cfg[n] = str(v) if isinstance(v, (ProjPoint, complex)) else v
    return cfg


# -- subcommands ---------------------------------------------------------------


def cmd_height(args) -> int:
    F = load_map(args.map)
    P = parse_point(args.point)
    rec = orbit_degrees(F, P, args.n)
    estimates = {str(k): format_rational(canonical_height_estimate(F, P, k)) for k in range(1, args.n + 1)}
    verdict = detect_preperiodic(F, P, args.max_iter, args.degree_bound)
    _emit_json(
        {
            "config": _config(args, "map", "point", "n", "max_iter", "degree_bound"),
            "degrees": list(rec.degrees),
            "estimates": estimates,
            "verdict": verdict_to_json(verdict),
        },
        args.out,
    )
    return 0


def cmd_orbit(args) -> int:
    F = load_map(args.map)
    rec = orbit_degrees(F, parse_point(args.point), args.n)
    _emit_json({"config": _config(args, "map", "point", "n"), **rec.to_json()}, args.out)
    return 0


def cmd_preperiodic(args) -> int:
    F = load_map(args.map)
    v = detect_preperiodic(F, parse_point(args.point), args.max_iter, args.degree_bound)
    _emit_json({"config": _config(args, "map", "point", "max_iter", "degree_bound"), **verdict_to_json(v)}, args.out)
    return 0


def cmd_resultant(args) -> int:
    F = load_map(args.map)
    res = resultant_locus(F)
    _emit_json({"config": _config(args, "map"), "resultant": res.to_json(), "text": str(res)}, args.out)
    return 0


def cmd_lattes_check(args) -> int:
    ctx = legendre_lattes()
    from_file = parse_map(bundled_map_text("lattes.json"))
    P = parse_point(args.point)
    census = torsion_census(ctx, default_candidates(), args.max_iter)
    growth = degree_growth_check(ctx, P, args.n)
    census_ok = set(census.preperiodic) == set(ctx.torsion_x) and not census.other
    ok = two_torsion_check(ctx) and growth and from_file == ctx.map and census_ok
    _emit_json(
        {
            "config": _config(args, "point", "n", "max_iter"),
            "bundled_file_matches": from_file == ctx.map,
            "two_torsion": two_torsion_check(ctx),
            "degree_growth": growth,
            "census": census.to_json(),
            "ok": ok,
        },
        args.out,
    )
    return 0


def cmd_render(args) -> int:
    win = Window.parse(args.window, args.res)
    if args.kind == "mandelbrot":
        grid = PotentialGrid(win, escape_time_grid(win, args.depth).astype(float), {"depth": args.depth})
    elif args.kind == "bif":
        F = load_map(args.map)
        P = parse_point(args.point)
        grid = discrete_laplacian(potential_grid(F, P, win, args.depth, args.tol, args.jobs))
    else:
        F = load_map(args.map)
        grid = julia_measure_grid(specialize(F, _parameter(args.param), args.tol), win, args.depth)
    args.mapping = args.mapping or ("linear" if args.kind == "mandelbrot" else "log")
    render_pgm(grid, args.mapping, args.out)
    if args.csv:
        grid_to_csv(grid, args.csv)
    names = ["kind", "window", "res", "depth", "mapping", "out", "csv"]
    names += {"mandelbrot": [], "bif": ["map", "point", "tol", "jobs"], "julia": ["map", "param", "tol"]}[args.kind]
    info = {"config": _config(args, *names)}
    if hasattr(grid, "total_mass"):
        info["total_mass"] = grid.total_mass
    _emit_json(info, None)
    return 0


def _emit_roots(rs, args) -> None:
    text = rs.to_csv()
    config = json.dumps(_config(args, *args.echo))
    _emit("# " + config + "\n" + text, args.out)


def cmd_pcf_roots(args) -> int:
    rs = pcf_centers(args.n, args.tol)
    args.echo = ("n", "tol")
    _emit_roots(rs, args)
    return 0


def cmd_preper_params(args) -> int:
    F = load_map(args.map)
    rs = preperiodic_params(F, parse_point(args.point), args.n, args.m, args.tol)
    args.echo = ("map", "point", "n", "m", "tol")
    _emit_roots(rs, args)
    return 0


def cmd_equidist(args) -> int:
    F = load_map("quadratic.json")
    win = Window.parse(args.window, args.res)
    mg = discrete_laplacian(potential_grid(F, ProjPoint.of(0), win, args.depth, jobs=args.jobs))
    values = {str(n): equidist_discrepancy(pcf_centers(n), mg, args.cells) for n in args.n}
    seq = [values[str(n)] for n in args.n]
    _emit_json(
        {
            "config": _config(args, "n", "cells", "window", "res", "depth", "jobs"),
            "discrepancy": values,
            "non_increasing": all(b <= a for a, b in zip(seq, seq[1:])),
        },
        args.out,
    )
    return 0


def cmd_intersect(args) -> int:
    F = load_map(args.map)
    rep = intersection_probe(F, parse_point(args.p), parse_point(args.q), args.max_depth, args.tol)
    _emit_json({"config": _config(args, "map", "p", "q", "max_depth", "tol"), **rep.to_json()}, args.out)
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="arithdyn",
        description="Exact heights and preperiodicity over Q(t), parameter-plane potentials, special parameters.",
        epilog="Point specs: '2', '1/3', 't+1:1', 't^2:t-1', 'inf'.  --map takes a file path "
        "or a bundled name (lattes.json, quadratic.json).",
    )
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.set_defaults(func=func)
        p.add_argument("--out", default=None, help="output path (stdout when omitted)")
        return p

    def map_point(p, point="2"):
        p.add_argument("--map", default="lattes.json", help="map file or bundled name")
        p.add_argument("--point", default=point, help="marked point spec")

    p = add("height", cmd_height, "degree growth, canonical height estimates and verdict")
    map_point(p)
    p.add_argument("--n", type=_positive_int, default=4)
    p.add_argument("--max-iter", type=_positive_int, default=20)
    p.add_argument("--degree-bound", type=_positive_int, default=None, help="default: heuristic from map and point")

    p = add("orbit", cmd_orbit, "exact orbit and degrees")
    map_point(p)
    p.add_argument("--n", type=_nonneg_int, default=4)

    p = add("preperiodic", cmd_preperiodic, "preperiodicity verdict")
    map_point(p)
    p.add_argument("--max-iter", type=_positive_int, default=20)
    p.add_argument("--degree-bound", type=_positive_int, default=None, help="default: heuristic from map and point")

    p = add("resultant", cmd_resultant, "resultant of the two forms as a polynomial in t")
    p.add_argument("--map", default="lattes.json", help="map file or bundled name")

    p = add("lattes-check", cmd_lattes_check, "2-torsion, degree growth and torsion census for the Lattes family")
    p.add_argument("--point", default="2", help="point for the degree-growth check")
    p.add_argument("--n", type=_positive_int, default=4)
    p.add_argument("--max-iter", type=_positive_int, default=8)

    p = add("render", cmd_render, "PGM images: mandelbrot (escape time), bif (bifurcation measure), julia")
    p.add_argument("kind", choices=("mandelbrot", "bif", "julia"))
    p.set_defaults(out_required=True)
    p.add_argument("--window", type=_window, default=None, help=f"re_min,re_max,im_min,im_max (default {DEFAULT_WINDOW}; julia -2,2,-2,2)")
    p.add_argument("--res", type=_positive_int, default=512, help="pixels per side")
    p.add_argument("--depth", type=_positive_int, default=200)
    p.add_argument("--tol", type=_positive_float, default=1e-12, help="degenerate-parameter tolerance")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--mapping", choices=("linear", "log"), default=None, help="default: linear for mandelbrot, log otherwise")
    p.add_argument("--csv", default=None, help="also dump the grid as CSV")
    p.add_argument("--map", default="quadratic.json", help="bif/julia: map file or bundled name")
    p.add_argument("--point", default="0", help="bif: marked point spec")
    p.add_argument("--param", default="-1", help="julia: parameter t, rational or complex like 0.3+0.5i")

    p = add("pcf-roots", cmd_pcf_roots, "centers of z^2 + t with 0 periodic of period dividing n (CSV)")
    p.add_argument("--n", type=_positive_int, default=3)
    p.add_argument("--tol", type=_positive_float, default=1e-12)

    p = add("preper-params", cmd_preper_params, "parameters with f^n(P) = f^m(P) (CSV)")
    map_point(p)
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--m", type=_nonneg_int, default=0)
    p.add_argument("--tol", type=_positive_float, default=1e-12)

    p = add("equidist", cmd_equidist, "discrepancy of pcf centers against the bifurcation measure of z^2 + t")
    p.add_argument("--n", type=_int_list, default=[4, 6, 8], help="comma-separated depths")
    p.add_argument("--cells", type=_positive_int, default=16)
    p.add_argument("--window", type=_window, default=DEFAULT_WINDOW)
    p.add_argument("--res", type=_positive_int, default=512)
    p.add_argument("--depth", type=_positive_int, default=200)
    p.add_argument("--jobs", type=_positive_int, default=1)

    p = add("intersect", cmd_intersect, "common parameters of S_{f,P} and S_{f,Q} up to a depth")
    p.add_argument("--map", default="lattes.json", help="map file or bundled name")
    p.add_argument("--p", default="2", help="first point spec")
    p.add_argument("--q", default="3", help="second point spec")
    p.add_argument("--max-depth", type=_positive_int, default=2)
    p.add_argument("--tol", type=_positive_float, default=1e-8)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kind", None) is not None and args.window is None:
        args.window = "-2,2,-2,2" if args.kind == "julia" else DEFAULT_WINDOW
    if getattr(args, "out_required", False) and not args.out:
        parser.error("render needs --out for the PGM image")
    if getattr(args, "m", None) is not None and not args.n > args.m:
        parser.error("--n must exceed --m")
    try:
        return args.func(args)
    except (ArithDynError, ValueError, ArithmeticError, FileNotFoundError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
