"""Random feasible instances: error and timing statistics by problem size.

    python scripts/random_sweep.py --count 500 --seed 0
"""
import argparse
import time

import numpy as np

from rankone.decomposer import decompose_matrix
from rankone.spectral import assemble


def instance(rng, n, k):
    b = 10.0 * (1.0 - rng.random(n))
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q *= np.sign(np.diag(r))
    padded = np.r_[b, np.zeros(k - n)]
    c = 0.7 * padded[rng.permutation(k)] + 0.3 * padded.mean()
    return (q * b) @ q.T, c * (b.sum() / c.sum())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-n", type=int, default=20)
    ap.add_argument("--max-k", type=int, default=100)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = {}
    for _ in range(args.count):
        n = int(rng.integers(1, args.max_n + 1))
        k = int(rng.integers(n, max(n, args.max_k) + 1))
        b, c = instance(rng, n, k)
        t0 = time.perf_counter()
        d = decompose_matrix(b, c)
        dt = time.perf_counter() - t0
        err = np.linalg.norm(assemble(d) - b) / np.linalg.norm(b)
        case2 = sum(s.case == 2 for s in d.steps)
        rows.setdefault((n - 1) // 5, []).append((err, dt, case2 / len(d)))

    print(f"{'n':>7} {'count':>6} {'max rel err':>12} {'mean ms':>8} {'case-2 share':>13}")
    for key in sorted(rows):
        err, dt, share = map(np.array, zip(*rows[key]))
        print(f"{5 * key + 1:>3}-{5 * key + 5:<3} {len(err):>6} {err.max():>12.2e} {1e3 * dt.mean():>8.2f} {share.mean():>13.2f}")


if __name__ == "__main__":
    main()
