"""Smallest inf-over-gamma exponent divided by xi^2 as xi shrinks, against L."""

from __future__ import annotations

import argparse

from streamsw.info_measures import profile
from streamsw.md_analysis import boundary_target, md_limit_check
from streamsw.source_model import parse_source


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sources", default="dsbs:p=0.11,asym:p=0.1")
    p.add_argument("--xis", default="1e-2,1e-3,1e-4")
    a = p.parse_args(argv)
    xis = tuple(float(v) for v in a.xis.split(","))
    targets = [("i", 1.0, 0.0), ("ii", 1.0, 0.5), ("iii", 1.0, 1.0)]
    print("source,case,xi,ratio,L,rel_error")
    for desc in a.sources.split(","):
        pmf = parse_source(desc)
        prof = profile(pmf)
        for case, t1, t2 in targets:
            rep = md_limit_check(pmf, boundary_target(prof, case, t1, t2), xis)
            for xi, r, e in zip(rep.xis, rep.ratios, rep.rel_errors):
                print(f"{desc},{case},{xi!r},{r!r},{rep.L!r},{e!r}")


if __name__ == "__main__":
    main()
