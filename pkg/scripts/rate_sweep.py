"""Monte Carlo sup-over-k error rate against the bin count N1 = N2."""

from __future__ import annotations

import argparse
import os

from streamsw.simulator import SimConfig, rate_sweep


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--source", default="dsbs:p=0.05")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--psi", type=int, default=5)
    p.add_argument("--omega", type=int, default=2)
    p.add_argument("--delay", type=int, default=2)
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--bins", default="2,4,8,16,1024")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    a = p.parse_args(argv)
    cfg = SimConfig(source=a.source, n=a.n, psi=a.psi, omega=a.omega, T=a.delay, blocks=a.blocks,
                    trials=a.trials, seed=a.seed, jobs=a.jobs)
    print("N1,N2,sup_eps,ci_lo,ci_hi")
    for row in rate_sweep(cfg, [(int(b), int(b)) for b in a.bins.split(",")]):
        print(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))


if __name__ == "__main__":
    main()
