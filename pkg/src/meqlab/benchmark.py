"""Micro-benchmark of condition-number scan throughput.

Run as ``python -m meqlab.benchmark``; prints grid points per second for
the first- and second-moment blocks of each generator.
"""

from __future__ import annotations

import argparse
import time

from .bath import BathSpec
from .epscan import exceptional_line, scan
from .generators import GME, LME, REDFIELD


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=120,
                        help="grid points per axis (default 120)")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    hot = BathSpec(1e-8, 10.0, 1e3)
    cold = BathSpec(1e-4, 5.0, 1e3)
    k_hi = 1.5 * exceptional_line(1.5, hot, cold)
    n = args.points
    for block in ("first", "second"):
        t0 = time.perf_counter()
        scan([LME, GME, REDFIELD], [block], (0.5, 1.5), (0.0, k_hi), (n, n),
             hot, cold, threads=args.threads)
        dt = time.perf_counter() - t0
        rate = 3 * n * n / dt
        print(f"{block} block: {3 * n * n} points in {dt:.2f} s "
              f"({rate:,.0f} points/second)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
