"""Print the block schedule of a weight stream until it runs out of budget.

    python scripts/stream_schedule.py ratio --blocks 10 --cap 1000000
"""
import argparse
import itertools
import time

from rankone.cli import parse_stream_spec
from rankone.errors import Stalled
from rankone.streaming import block_plan


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("spec", help="const:<c>, ratio, or a weight file")
    ap.add_argument("--blocks", type=int, default=10)
    ap.add_argument("--cap", type=int, default=10**6)
    args = ap.parse_args()

    w = parse_stream_spec(args.spec, args.cap)
    t0 = time.perf_counter()
    prev = None
    print(f"{'i':>3} {'n_i':>10} {'s(n_i)':>10} {'g(n_i)':>8} {'r(n_i)':>10} {'growth':>8}")
    try:
        for p in itertools.islice(block_plan(w), args.blocks):
            growth = f"{p.n / prev.n:8.2f}" if prev else " " * 8
            print(f"{p.index:>3} {p.n:>10} {p.s:>10} {p.g:>8} {p.r:>10.6f} {growth}")
            prev = p
    except Stalled as exc:
        print(f"stalled after {exc.prefix_length} stream values: {exc}")
    print(f"{time.perf_counter() - t0:.3f} s, {len(w)} values pulled")


if __name__ == "__main__":
    main()
