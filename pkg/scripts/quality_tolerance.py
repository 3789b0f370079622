"""Vulnerability tolerance per strategy as implementation quality degrades.

Sweeps the vulnerable fraction Q with an attacker whose exploit budget
scales along with it, then reports each strategy's worst damage curve and
the largest Q it tolerates while keeping peak compromise under tau.
"""
import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from diversim import (AttackerSpec, DefenderSpec, ImplementationPool, Scenario,
                      Strategy, SyntheticNetwork, sweeps)
from diversim.metrics import awd


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results/tolerance"))
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--t-max", type=int, default=500)
    ap.add_argument("--x", type=int, default=20)
    ap.add_argument("--attachment", type=int, default=3)
    ap.add_argument("--net-seed", type=int, default=7)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--jobs", type=int, default=4)
    ap.add_argument("--tau", type=float, default=1 / 3)
    ap.add_argument("--qs", default="0:1:0.1")
    args = ap.parse_args(argv)

    net = SyntheticNetwork(n_layer1=545, n_layer2=530, overlap_fraction=0.887,
                           attachment_degree=args.attachment, seed=args.net_seed)
    pool = ImplementationPool(hbar=3, x=args.x)
    attacker = AttackerSpec(m3=args.x // 2, m4=args.x,
                            initial_compromise_size=10)
    base = Scenario(network=net, pool=pool, q=1.0, attacker=attacker,
                    defender=DefenderSpec(Strategy.STATIC, tau=args.tau),
                    t_max=args.t_max, runs=args.runs, seed=args.seed)
    qgrid = sweeps.parse_grid(args.qs)
    specs = [
        DefenderSpec(Strategy.STATIC, tau=args.tau),
        DefenderSpec(Strategy.PROACTIVE, tau=args.tau, eta1=0.5, eta2=0.2),
        DefenderSpec(Strategy.REACTIVE_ADAPTIVE, tau=args.tau, fpr=0.1, fnr=0.1),
        DefenderSpec(Strategy.HYBRID, tau=args.tau, eta2=0.2, fpr=0.1, fnr=0.1),
    ]

    t0 = time.time()
    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for spec in specs:
        cells = sweeps.q_cells(sweeps.variant(base, spec), qgrid)
        curve = np.array([awd(sweeps.run_cell(c, jobs=args.jobs)) for c in cells])
        vt = 0.0
        for q, peak in zip(qgrid, curve):
            if peak <= args.tau:
                vt = max(vt, float(q))
        rows.extend((spec.strategy.value, float(q), float(a))
                    for q, a in zip(qgrid, curve))
        print(f"{spec.strategy.value:10s} vt={vt:.1f} "
              f"awd: {' '.join(f'{a:.3f}' for a in curve)}", flush=True)

    with open(args.out / "tolerance.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy", "q", "awd"])
        for strat, q, peak in rows:
            w.writerow([strat, f"{q:.6g}", f"{peak:.6f}"])
    print(f"wrote {args.out / 'tolerance.csv'} in {time.time() - t0:.0f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
