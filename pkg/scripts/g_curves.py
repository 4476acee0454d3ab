"""g1 and g2 against the source parameter for one family, as CSV."""

from __future__ import annotations

import argparse

from streamsw.cli import parse_grid
from streamsw.md_analysis import FAMILIES, g_curves


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--family", choices=sorted(FAMILIES), default="zchannel")
    p.add_argument("--grid", default="0.05:0.95:0.05")
    a = p.parse_args(argv)
    print("param,g1,g2")
    for param, g1, g2 in g_curves(a.family, parse_grid(a.grid)):
        print(f"{param!r},{g1!r},{g2!r}")


if __name__ == "__main__":
    main()
