"""Command line entry point.

    threewell fig2 --N 60 --out runs/fig2
    threewell --config run.ini --eps 0 1.5
    threewell spectrum --N 1 --eps 0

Exit status: 0 success, 2 configuration error, 3 compute error, 4 cache error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from . import classical as cl
from . import critical as cr
from . import eig
from .config import ALIASES, CACHE_ENV, KINDS, ConfigError, RunConfig, load_ini, preset, with_overrides
from .pipelines import run

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_CACHE = 0, 2, 3, 4

# flag -> RunConfig field
_FLAGS = {
    "U": "U", "J": "J", "N": "N", "eps": "eps", "window": "window", "smoothing": "smoothing_width",
    "energies": "energies", "t_max_single": "t_max_single", "t_max_multi": "t_max_multi",
    "rel_tol": "rel_tol", "dt_sample": "dt_sample", "ic_count": "ic_count", "seed": "seed",
    "bins": "bins", "grid_density": "grid_density", "workers": "workers", "out": "out_dir",
    "cache_dir": "cache_dir",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="threewell", description="Tilted three-well Bose-Hubbard lab.")
    ap.add_argument("kind", nargs="?", help=f"experiment: {', '.join(KINDS)} (aliases: {', '.join(ALIASES)})")
    ap.add_argument("--preset", help="start from a figure preset instead of plain defaults")
    ap.add_argument("--config", help="INI file; flags given here override it")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    g = ap.add_argument_group("model")
    g.add_argument("--U", type=str)
    g.add_argument("--J", type=str)
    g.add_argument("--N", type=str)
    g.add_argument("--eps", nargs="+", help="one or more tilts")
    g = ap.add_argument_group("quantum")
    g.add_argument("--window", help="eigenstates per Husimi window, or 'auto'")
    g.add_argument("--smoothing", help="moving-average width for the PR peak")
    g.add_argument("--energies", nargs="+", help="target energies per particle")
    g = ap.add_argument_group("trajectories")
    g.add_argument("--t-max-single", dest="t_max_single")
    g.add_argument("--t-max-multi", dest="t_max_multi")
    g.add_argument("--rel-tol", dest="rel_tol")
    g.add_argument("--dt-sample", dest="dt_sample")
    g.add_argument("--ic-count", dest="ic_count")
    g.add_argument("--seed")
    g.add_argument("--bins")
    g.add_argument("--grid-density", dest="grid_density")
    g = ap.add_argument_group("run")
    g.add_argument("--workers", help="process pool size for trajectory batches")
    g.add_argument("--out", help="output directory")
    g.add_argument("--cache-dir", dest="cache_dir", help=f"spectrum cache (default ${CACHE_ENV} or <out>/cache)")
    return ap


def resolve(args: argparse.Namespace) -> RunConfig:
    kind = args.kind or args.preset
    cfg = preset(args.preset or args.kind) if kind else RunConfig()
    if args.config:
        cfg = load_ini(args.config, cfg)
    over = {}
    for flag, name in _FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            over[name] = " ".join(v) if isinstance(v, list) else v
    if args.kind:
        over["kind"] = args.kind
    return with_overrides(cfg, **over).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
    except ConfigError as exc:
        print(f"threewell: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = run(cfg)
    except eig.CacheError as exc:
        print(f"threewell: cache error: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (eig.DiagonalizationError, cl.StiffnessError, cl.EnergyOutOfRangeError, cl.DomainError,
            cr.CriticalPointNotFound, np.linalg.LinAlgError, FloatingPointError, OSError) as exc:
        print(f"threewell: compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    summary = {"out_dir": cfg.out_dir, "artifacts": len(manifest["artifacts"]),
               "failures": len(manifest["failures"]), "results": manifest["results"]}
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
