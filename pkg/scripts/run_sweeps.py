#!/usr/bin/env python3
"""Convergence experiments: build nets over a depth range, measure sup
errors against their targets, and write one CSV table per target.

Usage:
    python scripts/run_sweeps.py [--out-dir sweeps] [--threads N]

Deterministic: same inputs produce byte-identical CSV files.
"""

import argparse
import pathlib
import sys
import time

import numpy as np

from relu_forge import (
    Box,
    DyadicMidpoints,
    PolySpec,
    Uniform,
    build_monomial,
    build_multiply,
    build_polynomial,
    build_square,
    convergence_sweep,
    sweep_csv,
)

ACCEPTANCE_POLY = PolySpec(2, {(0, 0): 1.0, (2, 0): -1.0, (1, 1): 0.5})

SWEEPS = {
    "square": dict(
        build=build_square,
        target=lambda X: X[:, 0] ** 2,
        box=Box.symmetric(1),
        strategy_for=lambda L: DyadicMidpoints(L),
        depths=range(1, 13),
    ),
    "multiply": dict(
        build=build_multiply,
        target=lambda X: X[:, 0] * X[:, 1],
        box=Box.symmetric(2),
        strategy_for=lambda L: Uniform(513),
        depths=range(2, 9),
    ),
    "monomial_x1x2x3": dict(
        build=lambda L: build_monomial([1, 2, 3], L, 3),
        target=lambda X: X[:, 0] * X[:, 1] * X[:, 2],
        box=Box.symmetric(3),
        strategy_for=lambda L: Uniform(65),
        depths=range(2, 7),
    ),
    "poly_acceptance": dict(
        build=lambda L: build_polynomial(ACCEPTANCE_POLY, L),
        target=ACCEPTANCE_POLY,
        box=Box.symmetric(2),
        strategy_for=lambda L: Uniform(513),
        depths=range(2, 7),
    ),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="sweeps")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    all_ok = True
    for name, cfg in SWEEPS.items():
        t0 = time.perf_counter()
        rows = convergence_sweep(
            cfg["build"],
            cfg["target"],
            list(cfg["depths"]),
            cfg["box"],
            cfg["strategy_for"],
            threads=args.threads,
        )
        path = out_dir / f"{name}.csv"
        path.write_text(sweep_csv(rows), encoding="utf-8")
        worst = max(r.ratio for r in rows)
        rates = [b.measured / a.measured for a, b in zip(rows, rows[1:])]
        ok = worst <= 1.0
        all_ok &= ok
        print(
            f"{name:18s} rows={len(rows)} worst measured/bound={worst:.3f} "
            f"mean rate={np.mean(rates):.3f} wrote {path} "
            f"({time.perf_counter() - t0:.2f}s) {'ok' if ok else 'BOUND VIOLATED'}"
        )
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
