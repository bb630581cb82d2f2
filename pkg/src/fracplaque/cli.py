"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.  Output goes to
``$FRACPLAQUE_OUT`` (default ``./fracplaque-out``) unless ``--out`` is given.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import PRESETS, dump_config, get_preset, parse_config
from .drivers import compare_runs, run_direct, run_multiscale
from .errors import ConfigError, DomainError, FracPlaqueError, GeometryError, UnsupportedDomainError
from .frac_core import mittag_leffler
from .geometry import ChannelShape, build_channel_mesh, dump_mesh
from .study import alpha_sweep, convergence_study, execute_preset

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
OUT_ENV = "FRACPLAQUE_OUT"


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV, "fracplaque-out"))


def _config(args, default_preset=None):
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    source = args.preset or args.config or default_preset
    return parse_config(source, args.set or ())


def _print(lines):
    for line in lines:
        print(line)


def cmd_run(args):
    out = _out_dir(args)
    if args.preset and not args.config and not args.set:
        res = execute_preset(args.preset, out, full_horizon=args.full_horizon, jobs=args.jobs)
        print(f"[{res.preset.name}] {res.preset.description}")
        _print(res.lines)
        _print(f"wrote {f}" for f in res.files)
        return EXIT_OK
    cfg = _config(args)
    if args.preset and get_preset(args.preset).kind != "run" and cfg.method != "compare":
        res = execute_preset(args.preset, out, overrides=cfg, full_horizon=args.full_horizon, jobs=args.jobs)
        _print(res.lines)
        _print(f"wrote {f}" for f in res.files)
        return EXIT_OK
    dest = out / cfg.name
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "config.txt").write_text(dump_config(cfg))
    reports = {}
    if cfg.method in ("direct", "compare"):
        reports["direct"] = run_direct(cfg)
    if cfg.method in ("multiscale", "compare"):
        reports["multiscale"] = run_multiscale(cfg, residual_dir=dest / "residuals" if args.verbose else None)
    for name, r in reports.items():
        path = r.write_csv(dest / f"{name}.csv")
        print(f"{name}: terminal u = {r.terminal:.10g} at t = {r.final_time:g} ({r.total_wall:.2f} s)  -> {path}")
    if len(reports) == 2:
        c = compare_runs(reports["direct"], reports["multiscale"])
        path = c.write_csv(dest / "comparison.csv")
        print(f"terminal |u_direct - U| = {c.terminal_error:.4e}, speedup {c.speedup:.1f}x  -> {path}")
    return EXIT_OK


def cmd_convergence(args):
    cfg = _config(args, default_preset="ode-table1")
    table = convergence_study(cfg, args.axis, args.levels, args.oracle, args.start, args.jobs)
    print(table.format())
    print(f"least-squares slope {table.slope():.3f}")
    path = table.write_csv(_out_dir(args) / cfg.name / f"convergence_{args.axis}.csv")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config(args, default_preset="ns-53-sweep")
    if args.full_horizon:
        cfg = cfg.replace(T=PRESETS["ns-53-sweep"].options["full_T"])
    alphas = args.alphas or PRESETS["ns-53-sweep"].options["alphas"]
    result = alpha_sweep(cfg, alphas, args.jobs)
    dest = _out_dir(args) / cfg.name
    for a, u, h, w in result.summary():
        print(f"alpha={a:g}  U(T)={u:.8g}  apex height={h:.8g}  ({w:.1f} s)")
        result.reports[a].write_csv(dest / f"alpha{a:g}.csv")
    for a, exc in result.failures.items():
        print(f"alpha={a:g}  FAILED: {exc}", file=sys.stderr)
    print(f"wrote {result.write_csv(dest / 'summary.csv')}")
    return EXIT_NUMERICAL if result.failures else EXIT_OK


def cmd_mlf(args):
    print(repr(mittag_leffler(args.mu, args.nu, args.z)))
    return EXIT_OK


def cmd_mesh(args):
    shape = ChannelShape(a=args.a, b=args.b)
    mesh = build_channel_mesh(shape, args.u, args.elements, args.level)
    path = Path(args.output) if args.output else _out_dir(args) / f"mesh_u{args.u:g}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    dump_mesh(mesh, path)
    print(f"{mesh.num_triangles} triangles, {mesh.num_nodes} nodes, grid {mesh.grid}  -> {path}")
    return EXIT_OK


def cmd_presets(args):
    for name, p in PRESETS.items():
        print(f"{name:20s} {p.kind:12s} {p.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracplaque", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress; write periodic residual CSVs")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./fracplaque-out)")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--config", help="key=value configuration file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one configuration key")
        sp.add_argument("--jobs", type=int, default=1, help="concurrent runs for studies and sweeps")

    sp = sub.add_parser("run", help="run a preset or a configuration file")
    with_config(sp)
    sp.add_argument("--full-horizon", action="store_true", help="use the unreduced horizon for sweep presets")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("convergence", help="halve dT or dt and tabulate errors")
    with_config(sp)
    sp.add_argument("--axis", choices=("dT", "dt"), default="dT")
    sp.add_argument("--levels", type=int, default=4)
    sp.add_argument("--oracle", choices=("exact", "direct-run"), default="exact")
    sp.add_argument("--start", type=float, help="coarsest step (default: the configured one)")
    sp.set_defaults(func=cmd_convergence)

    sp = sub.add_parser("sweep", help="multiscale runs over fractional orders")
    with_config(sp)
    sp.add_argument("--alphas", type=float, nargs="+")
    sp.add_argument("--full-horizon", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("mlf", help="evaluate the Mittag-Leffler function E_{mu,nu}(z)")
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--z", type=float, required=True)
    sp.set_defaults(func=cmd_mlf)

    sp = sub.add_parser("mesh", help="triangulate the channel and dump the mesh")
    sp.add_argument("--u", type=float, default=0.0)
    sp.add_argument("--elements", type=int, default=210)
    sp.add_argument("--level", type=int, default=2)
    sp.add_argument("--a", type=float, default=5.0)
    sp.add_argument("--b", type=float, default=2.0)
    sp.add_argument("-o", "--output", help="mesh file path")
    sp.set_defaults(func=cmd_mesh)

    sp = sub.add_parser("presets", help="list experiment presets")
    sp.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UnsupportedDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, DomainError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FracPlaqueError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
