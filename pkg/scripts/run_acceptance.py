"""Run every verification suite and print one verdict line per criterion."""
import argparse
import sys
from collections import defaultdict

from lamefrac.checks import run_suite
from lamefrac.cli import load_config


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="JSON run configuration (defaults built in)")
    args = ap.parse_args()
    ctx = run_suite(load_config(args.config), "all")
    by_crit = defaultdict(list)
    for r in ctx.reports:
        if r.criterion is not None:
            by_crit[r.criterion].append(r)
    bad = 0
    for crit in sorted(by_crit):
        rs = by_crit[crit]
        failed = [r for r in rs if r.status == "fail"]
        bad += bool(failed)
        print(f"{'FAIL' if failed else 'PASS'} criterion {crit:2d} "
              f"({len(rs)} reports, {len(failed)} failed)")
        for r in failed:
            s = f" s={r.s:g}" if r.s is not None else ""
            print(f"      {r.check}{s}: value={r.value:.6g}")
    print(f"total wall time {sum(ctx.timings.values()):.1f} s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
