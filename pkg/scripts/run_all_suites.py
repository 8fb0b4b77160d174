#!/usr/bin/env python3
"""Run every suite on its default scenes and summarize.

Thin wrapper over the `verify` driver: same checks, same exactness, one
process.  Useful as a smoke run after touching the geometry layer.

    python3 scripts/run_all_suites.py [--seed N] [--points N] [--json DIR]
"""

import argparse
import os
import sys
import time

from tractorcheck.cli import SUITES, main as run_cli
from tractorcheck.scenes import release_geometries


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--points", type=int, default=2)
    ap.add_argument("--json", metavar="DIR", default=None,
                    help="write one report file per suite into DIR")
    ap.add_argument("--skip", action="append", default=[],
                    help="suite name to leave out; repeatable")
    args = ap.parse_args()

    if args.json:
        os.makedirs(args.json, exist_ok=True)
    failures = []
    t0 = time.time()
    for suite in SUITES:
        if suite in args.skip:
            print("== %s: skipped" % suite)
            continue
        argv = ["--suite", suite, "--seed", str(args.seed),
                "--points", str(args.points), "--quiet"]
        if args.json:
            argv += ["--json", os.path.join(args.json, suite + ".json")]
        print("== %s" % suite)
        rc = run_cli(argv)
        if rc != 0:
            failures.append(suite)
        release_geometries()
    print("total %.1fs; %s" % (time.time() - t0,
                               ("FAILED: " + ", ".join(failures))
                               if failures else "all suites passed"))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
