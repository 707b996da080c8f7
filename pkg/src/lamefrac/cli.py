"""Command-line entry point: ``lamefrac verify <suite>``, ``run-all``, ``export-profiles``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .checks import SUITES, run_suite
from .config import RunConfig, default_config, parse_config, validate_config
from .errors import ParseError, ValidationError
from .extension import PROFILE_COLUMNS, profile_rows
from .grid import band_limited_random


def _fmt(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps17(obj, indent: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return "true" if obj is True else "false" if obj is False else "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps17(str(k))}: {dumps17(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps17(v, indent + 1) for v in obj) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return dumps17(obj.item(), indent)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return default_config()
    return parse_config(Path(path).read_text())


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.seed is not None:
        changes["rng_seed"] = int(args.seed)
    if args.output_dir is not None:
        changes["output_dir"] = args.output_dir
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
        validate_config(cfg)
    return cfg


def write_profiles(cfg: RunConfig, out: Path) -> list[Path]:
    p = cfg.params()
    grid = cfg.space_time_grid()
    u = band_limited_random(grid, grid.n, np.random.default_rng(cfg.rng_seed), kmax=1, mmax=1)
    ladder = cfg.y_ladder.values()
    folder = out / "profiles"
    folder.mkdir(parents=True, exist_ok=True)
    written = []
    idx_names = [f"k{i + 1}" for i in range(grid.n)] + ["m"]
    for s in cfg.s_values:
        path = folder / f"extension_s{s:g}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(idx_names + list(PROFILE_COLUMNS[1:]))
            for row in profile_rows(p, u, s, ladder):
                ints = row[:grid.n + 1]
                w.writerow(list(ints) + [format(v, ".17g") for v in row[grid.n + 1:]])
        written.append(path)
    return written


def _run(cfg: RunConfig, suite: str, scale: float, out: Path) -> int:
    ctx = run_suite(cfg, suite, scale)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps17([r.to_dict() for r in ctx.reports]) + "\n")
    (out / "timings.json").write_text(dumps17(ctx.timings) + "\n")
    write_profiles(cfg, out)
    failed = [r for r in ctx.reports if r.status == "fail"]
    skipped = [r for r in ctx.reports if r.status == "skip"]
    for r in ctx.reports:
        crit = f"[{r.criterion}]" if r.criterion is not None else "[-]"
        tag = {"pass": "PASS", "fail": "FAIL", "skip": "SKIP"}[r.status]
        s = f" s={r.s:g}" if r.s is not None else ""
        print(f"{tag} {crit:5s} {r.check}{s}: value={r.value:.6g}"
              + (f" ({r.reason})" if r.reason else ""))
    print(f"{len(ctx.reports)} checks, {len(failed)} failed, {len(skipped)} skipped; "
          f"report in {out / 'report.json'}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lamefrac", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--output-dir", help="directory for report.json and profiles/")
    common.add_argument("--seed", type=int, help="override rng_seed")
    common.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply check tolerances by this factor")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run one verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    sub.add_parser("run-all", parents=[common], help="run every suite")
    sub.add_parser("export-profiles", parents=[common], help="write profile CSV files only")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.tolerance_scale > 0:
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return 2
    out = Path(cfg.output_dir)
    if args.command == "export-profiles":
        for path in write_profiles(cfg, out):
            print(path)
        return 0
    suite = "all" if args.command == "run-all" else args.suite
    return _run(cfg, suite, args.tolerance_scale, out)


if __name__ == "__main__":
    sys.exit(main())
