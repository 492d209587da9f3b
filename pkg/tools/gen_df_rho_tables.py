"""Regenerate the normalized-bias (rho) quantile tables in littrend/dftables.py.

Simulates the Dickey-Fuller regression coefficient statistic T*(rho_hat - 1)
on driftless Gaussian random walks for the three deterministic cases and a
grid of sample sizes, then prints the quantile arrays that are frozen into
the package. Spot-check against the classic published asymptotic values:
5%: -8.1 (none), -14.1 (drift), -21.8 (trend); 1%: -13.8, -20.7, -29.5.

Usage: python tools/gen_df_rho_tables.py [reps]
"""
import sys

import numpy as np

PROBS = (0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99)
SAMPLE_SIZES = (25, 50, 100, 250, 500, 2500)


def simulate_rho_stats(T, reps, case, rng, chunk=20000):
    out = np.empty(reps)
    done = 0
    while done < reps:
        b = min(chunk, reps - done)
        e = rng.standard_normal((b, T))
        y = np.cumsum(e, axis=1)
        ylag = y[:, :-1]
        dy = y[:, 1:] - y[:, :-1]
        n = T - 1
        if case == "trend":
            t = np.arange(n, dtype=float)
            z = np.column_stack([np.ones(n), t])
            q, _ = np.linalg.qr(z)
            ylag = ylag - (ylag @ q) @ q.T
            dy = dy - (dy @ q) @ q.T
        elif case == "drift":
            ylag = ylag - ylag.mean(axis=1, keepdims=True)
            dy = dy - dy.mean(axis=1, keepdims=True)
        pi = np.sum(ylag * dy, axis=1) / np.sum(ylag * ylag, axis=1)
        out[done:done + b] = n * pi
        done += b
    return out


def main():
    reps = int(sys.argv[1]) if len(sys.argv) > 1 else 500000
    rng = np.random.default_rng(20260810)
    print(f"# reps={reps}")
    print(f"RHO_PROBS = {PROBS}")
    print(f"RHO_SAMPLE_SIZES = {SAMPLE_SIZES}")
    for case in ("none", "drift", "trend"):
        rows = []
        for T in SAMPLE_SIZES:
            stats = simulate_rho_stats(T, reps, case, rng)
            rows.append(np.quantile(stats, PROBS))
        name = f"RHO_QUANTILES_{case.upper()}"
        print(f"{name} = np.array([")
        for T, row in zip(SAMPLE_SIZES, rows):
            vals = ", ".join(f"{v:9.4f}" for v in row)
            print(f"    [{vals}],  # T={T}")
        print("])")


if __name__ == "__main__":
    main()
