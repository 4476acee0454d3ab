"""Union-bound slope -log(total)/(n xi^2) against T*L as n grows.

Uses psi = n^0.6, omega = 2T and xi = n^-0.3, with block k at the end of
phase q = 2 so that the delay-limited family applies.
"""

from __future__ import annotations

import argparse
import math

from streamsw.error_bounds import BoundInputs, total_bound
from streamsw.info_measures import profile
from streamsw.md_analysis import L_constant, boundary_target
from streamsw.schedule import Schedule
from streamsw.source_model import parse_source


def slope_ratio(source: str, case: str, theta1: float, theta2: float, T: int, n: int) -> tuple[float, float]:
    """(slope / (T L), slope) for one target."""
    pmf = parse_source(source)
    prof = profile(pmf)
    target = boundary_target(prof, case, theta1, theta2)
    xi = n ** -0.3
    sch = Schedule(round(n**0.6), 2 * T, T)
    rx, ry = target.rates(xi)
    br = total_bound(BoundInputs(pmf, n, sch, rx, ry, sch.beta(2)))
    slope = -br.log_total / (n * xi**2)
    return slope / (T * L_constant(prof, target)), slope


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--source", default="dsbs:p=0.11")
    p.add_argument("--case", default="ii")
    p.add_argument("--theta1", type=float, default=3.0)
    p.add_argument("--theta2", type=float, default=0.0)
    p.add_argument("--delay", type=int, default=2)
    p.add_argument("--exps", default="3,4,5,6,7")
    a = p.parse_args(argv)
    print("n,slope,ratio_to_TL")
    for e in a.exps.split(","):
        n = 10 ** int(e)
        ratio, slope = slope_ratio(a.source, a.case, a.theta1, a.theta2, a.delay, n)
        print(f"{n},{slope!r},{ratio!r}")


if __name__ == "__main__":
    main()
