"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--csv out.csv] [--end-to-end]

Each kernel is fed the inputs it sees in a real run: the L1 memory sum at
the end of a long direct run, convection matrices on the default plaque
mesh, and point location for a mesh-to-mesh transfer.
"""

import argparse
import csv
import os
import subprocess
import sys
import timeit

import numpy as np

from fracplaque.fem import _N, space_for
from fracplaque.frac_core import l1_weights
from fracplaque.geometry import ChannelShape, build_channel_mesh
from fracplaque.kernels import backends


def cases():
    rng = np.random.default_rng(0)
    out = {}
    for n in (2_000, 16_000):
        a = l1_weights(0.6, n + 1).coeffs
        u = np.cumsum(rng.uniform(0, 1e-4, n + 1))
        out[f"l1_memory n={n}"] = ("l1_memory", (a, u, n))
    for target in (210, 800):
        space = space_for(build_channel_mesh(ChannelShape(), 0.2, target))
        vel = rng.normal(size=(2, space.n2))
        args = (_N, space.grads, space.qweights, vel[0][space.dofs], vel[1][space.dofs])
        out[f"convection_local ne={space.mesh.num_triangles}"] = ("convection_local", args)
        old = build_channel_mesh(ChannelShape(), 0.19, target)
        pts = space.coords
        for label, hint in (("cold", np.full(len(pts), -1, dtype=np.int64)), ("hinted", None)):
            if hint is None:
                hint = np.full(len(pts), -1, dtype=np.int64)
                hint[space.dofs.ravel()] = np.repeat(np.arange(len(space.dofs)), 6)
            out[f"locate_points {label} m={len(pts)}"] = ("locate_points", (old.nodes, old.triangles, pts, hint, 1e-12))
    return out


END_TO_END = """
import time
from fracplaque import kernels
from fracplaque.config import get_preset
from fracplaque.drivers import build_model
from fracplaque.periodic import find_periodic_orbit
cfg = get_preset("ns-52-multiscale").config
model = build_model(cfg)
trial = model.initial_trial(cfg.u0)
t0 = time.perf_counter()
rep = find_periodic_orbit(model, trial, cfg.u0, cfg.dt, cfg.tau, 50)
print(kernels.BACKEND, rep.cycles, time.perf_counter() - t0)
"""


def end_to_end():
    """One periodic-orbit solve of the plaque preset under each backend, in fresh interpreters."""
    for forced in ("1", "0"):
        env = dict(os.environ, FRACPLAQUE_PURE_PYTHON=forced)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, cycles, secs = out.stdout.split()
        print(f"periodic solve ({cycles} cycles) with {backend:7s} kernels: {float(secs):.2f} s")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--csv", help="write results to this file")
    p.add_argument("--end-to-end", action="store_true", help="also time a full periodic solve per backend")
    args = p.parse_args(argv)

    impls = backends()
    if "cython" not in impls:
        print("compiled extension not built; only the numpy fallback is available", file=sys.stderr)
    rows = []
    print(f"{'kernel':40s}" + "".join(f"{name:>14s}" for name in impls) + f"{'ratio':>10s}")
    for label, (fn, fargs) in cases().items():
        times = {}
        for name, mod in impls.items():
            f = getattr(mod, fn)
            number = max(1, int(0.2 / max(timeit.timeit(lambda: f(*fargs), number=1), 1e-6)))
            best = min(timeit.repeat(lambda: f(*fargs), number=number, repeat=args.repeat)) / number
            times[name] = best
        ratio = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:40s}" + "".join(f"{1e3 * t:12.3f}ms" for t in times.values()) + f"{ratio:9.1f}x")
        rows.append([label] + [times.get(k, float("nan")) for k in ("python", "cython")] + [ratio])
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kernel", "python_s", "cython_s", "speedup"])
            w.writerows(rows)
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
