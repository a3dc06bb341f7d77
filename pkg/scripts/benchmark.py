"""Time scanning and serialization of synthetic snapshots.

    python scripts/benchmark.py --resources 10000 --workers 1 4
"""

from __future__ import annotations

import argparse
import random
import time

from gdprscan.engine import ScanConfig, scan
from gdprscan.report import serialize_report
from gdprscan.synth import FIXED_TIME, random_snapshot


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resources", type=int, nargs="+", default=[1000, 10000])
    ap.add_argument("--workers", type=int, nargs="+", default=[1])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'resources':>10} {'workers':>8} {'scan_s':>8} {'serialize_s':>12} {'exposures':>10}")
    for n in args.resources:
        snap = random_snapshot(random.Random(args.seed), n_resources=n)
        for w in args.workers:
            t0 = time.perf_counter()
            report = scan(snap, ScanConfig(), scanned_at=FIXED_TIME, workers=w)
            t1 = time.perf_counter()
            serialize_report(report)
            t2 = time.perf_counter()
            print(f"{n:>10} {w:>8} {t1 - t0:>8.3f} {t2 - t1:>12.3f} {len(report.exposures):>10}")


if __name__ == "__main__":
    main()
