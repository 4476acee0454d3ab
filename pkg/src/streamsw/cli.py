"""Command line entry point: one binary, subcommands, CSV output."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from contextlib import contextmanager

import numpy as np

from streamsw.codec import DEFAULT_CAP
from streamsw.error_bounds import BoundInputs, family_bound, family_terms, total_bound
from streamsw.errors import DomainError, RefusalError
from streamsw.exponents import exponent_x, exponent_y, min_exponent_over_gamma
from streamsw.info_measures import profile
from streamsw.md_analysis import (CASES, FAMILIES, L_constant, boundary_target, g_curves, gain_region,
                                  gain_thresholds, nu_nonstreaming, nu_streaming_lower, nu_two_delays,
                                  validate_target)
from streamsw.schedule import Schedule
from streamsw.simulator import CSV_COLUMNS, SimConfig, run
from streamsw.source_model import parse_source

EXIT_OK, EXIT_INVALID, EXIT_REFUSED = 0, 2, 3
LN2 = math.log(2)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(message)


def read_config(path: str) -> dict:
    """Flat `key = value` lines; `#` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc.strerror}") from None
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise DomainError(f"grid must be lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise DomainError("grid needs step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_csv(args, header, rows):
    with _sink(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError("missing " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _scale(args, power: int = 1) -> float:
    return LN2**power if args.bits else 1.0


# subcommands --------------------------------------------------------------

def cmd_analyze(args):
    _need(args, "source")
    prof = profile(parse_source(args.source))
    rows = [(name, value / _scale(args, 2 if name.startswith("V") else 1)) for name, value in prof.as_rows()]
    _write_csv(args, ("measure", "value"), rows)


def cmd_exponent(args):
    _need(args, "source", "rx", "ry")
    pmf = parse_source(args.source)
    if args.rx < 0 or args.ry < 0:
        raise DomainError("rates must be non-negative")
    s = _scale(args)
    if args.gamma is not None:
        if not 0 <= args.gamma <= 1:
            raise DomainError("gamma must lie in [0, 1]")
        rows = [("x", args.gamma, exponent_x(pmf, args.rx, args.ry, args.gamma) / s),
                ("y", args.gamma, exponent_y(pmf, args.rx, args.ry, args.gamma) / s)]
    else:
        g = min_exponent_over_gamma(pmf, args.rx, args.ry)
        rows = [("x", g.x_gamma, g.x_value / s), ("y", g.y_gamma, g.y_value / s), ("min", "", g.value / s)]
    _write_csv(args, ("side", "gamma", "value"), rows)


def cmd_md_constant(args):
    _need(args, "source", "case", "theta1", "theta2", "delay")
    prof = profile(parse_source(args.source))
    target = boundary_target(prof, args.case, args.theta1, args.theta2, args.rx, args.ry)
    validate_target(prof, target)
    s = _scale(args)
    rows = [("R_X", target.R_X / s), ("R_Y", target.R_Y / s),
            ("nu_nonstreaming", nu_nonstreaming(prof, target) / s),
            ("L", L_constant(prof, target) / s),
            ("nu_streaming_lower", nu_streaming_lower(prof, target, args.delay) / s)]
    if args.delay2 is not None:
        rows.append(("nu_two_delays", nu_two_delays(prof, target, args.delay, args.delay2) / s))
    if args.case == "ii":
        v = gain_region(prof, target.theta)
        rows += [("g1", v.g1), ("g2", v.g2), ("gain_T", int(v.holds_gain_T))]
    _write_csv(args, ("measure", "value"), rows)


def cmd_gain_region(args):
    if args.grid is not None:
        family = args.family or (args.source.split(":", 1)[0] if args.source else None)
        if family not in FAMILIES:
            raise DomainError(f"--grid needs --family in {sorted(FAMILIES)}")
        rows = g_curves(family, parse_grid(args.grid))
        _write_csv(args, ("param", "g1", "g2"), rows)
        return
    _need(args, "source")
    prof = profile(parse_source(args.source))
    if args.theta1 is not None and args.theta2 is not None:
        v = gain_region(prof, (args.theta1, args.theta2))
        _write_csv(args, ("param", "g1", "g2", "ratio", "gain_T", "binding"),
                   [(args.source, v.g1, v.g2, v.ratio, int(v.holds_gain_T), v.binding)])
        return
    g1, g2 = gain_thresholds(prof)
    _write_csv(args, ("param", "g1", "g2"), [(args.source, g1, g2)])


def _schedule_text(sch: Schedule, k: int, detail: bool) -> str:
    plan = sch.decode_plan(k)
    buf = io.StringIO()
    lo, hi = sch.encode_window(k)
    q = sch.phase(k)
    buf.write(f"psi={sch.psi} omega={sch.omega} T={sch.T} period={sch.period}\n")
    buf.write(f"block k={k} phase q={q if q is not None else '-'} decoded at time {plan.decode_time}\n")
    buf.write(f"encode window at time {k}: blocks {lo}..{hi}\n")
    buf.write("buffer timeline:\n")
    for tau in range(max(1, k - sch.period), plan.decode_time + 1):
        a, b = sch.buffer_contents(tau)
        buf.write(f"  t={tau:<4d} [{a:>4d}, {b:>4d}]  {'#' * (b - a + 1)}\n")
    buf.write("decode plan:\n")
    buf.write(f"  {'stage':>5} {'blocks':>11} {'codewords':>11} {'prereq':>11}  family\n")
    stages = plan.stages if detail else plan.coarse()
    for i, s in enumerate(stages, 1):
        blocks = s.targets if detail else s.blocks
        pre = s.prerequisites
        pre_s = f"{pre[0]}..{pre[1]}" if pre else "-"
        buf.write(f"  {i:>5} {f'{blocks[0]}..{blocks[1]}':>11} "
                  f"{f'{s.codewords[0]}..{s.codewords[1]}':>11} {pre_s:>11}  {s.family}\n")
    return buf.getvalue()


def cmd_schedule(args):
    _need(args, "psi", "omega", "delay", "k")
    sch = Schedule(args.psi, args.omega, args.delay)
    if args.k < 1:
        raise DomainError("--k must be >= 1")
    plan = sch.decode_plan(args.k)
    if args.detail:
        rows = [(i, s.targets[0], s.targets[1], s.codewords[0], s.codewords[1], s.family)
                for i, s in enumerate(plan.stages, 1)]
    else:
        rows = [(i, s.blocks[0], s.blocks[1], s.codewords[0], s.codewords[1], s.family)
                for i, s in enumerate(plan.coarse(), 1)]
    if args.out is None:
        sys.stdout.write(_schedule_text(sch, args.k, args.detail) + "\n")
    _write_csv(args, ("stage", "block_lo", "block_hi", "cw_lo", "cw_hi", "bin_family"), rows)


def _bins_from_rate(n: int, rate: float) -> int:
    if rate < 0:
        raise DomainError("rates must be non-negative")
    return max(1, round(math.exp(n * rate)))


def cmd_simulate(args):
    _need(args, "source", "n", "psi", "omega", "delay", "blocks", "trials", "seed")
    direct = args.rate_x is not None or args.rate_y is not None
    if direct and args.case is not None:
        raise DomainError("give either --rate-x/--rate-y or --case, not both")
    N1 = N2 = None
    if direct:
        _need(args, "rate_x", "rate_y")
        N1, N2 = _bins_from_rate(args.n, args.rate_x), _bins_from_rate(args.n, args.rate_y)
    elif args.case is not None:
        _need(args, "theta1", "theta2")
    else:
        raise DomainError("give --rate-x/--rate-y or --case with --theta1/--theta2")
    if args.n < 1 or args.seed < 0:
        raise DomainError("n must be positive and seed non-negative")
    cfg = SimConfig(source=args.source, n=args.n, psi=args.psi, omega=args.omega, T=args.delay,
                    blocks=args.blocks, trials=args.trials, seed=args.seed, N1=N1, N2=N2,
                    case=args.case, theta1=args.theta1 if args.theta1 is not None else 1.0,
                    theta2=args.theta2 if args.theta2 is not None else 0.0, xi_t=args.xi_t,
                    rx_star=args.rx, ry_star=args.ry, cap=args.cap, jobs=args.jobs)
    cfg.schedule  # validates psi, omega, T before any work
    rep = run(cfg)
    for line in rep.header():
        print("# " + line, file=sys.stderr)
    _write_csv(args, CSV_COLUMNS, rep.rows())


def cmd_bound(args):
    _need(args, "source", "n", "psi", "omega", "delay", "rx", "ry", "k")
    inp = BoundInputs(parse_source(args.source), args.n, Schedule(args.psi, args.omega, args.delay),
                      args.rx, args.ry, args.k)
    br = total_bound(inp)
    fams = sorted({t.family for t in br.terms})
    rows = []
    for fam in fams:
        terms = family_terms(fam, inp)
        rows.append((fam, family_bound(fam, inp), max(t.span for t in terms), min(t.exponent for t in terms)))
    rows.append(("total", br.log_total, "", ""))
    _write_csv(args, ("family", "log_bound", "span", "exponent"), rows)


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--bits", action="store_true", help="display log quantities in bits")

    p = _Parser(prog="streamsw", description="Streaming Slepian-Wolf analysis and simulation.",
                parents=[common])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=fn)
        return sp

    sp = add("analyze", cmd_analyze, "entropies and varentropies of a source")
    sp.add_argument("--source")

    sp = add("exponent", cmd_exponent, "streaming error exponents")
    sp.add_argument("--source")
    sp.add_argument("--rx", type=float)
    sp.add_argument("--ry", type=float)
    sp.add_argument("--gamma", type=float)

    sp = add("md-constant", cmd_md_constant, "moderate deviations constants")
    sp.add_argument("--source")
    sp.add_argument("--case", choices=CASES)
    sp.add_argument("--rx", type=float)
    sp.add_argument("--ry", type=float)
    sp.add_argument("--theta1", type=float)
    sp.add_argument("--theta2", type=float)
    sp.add_argument("--delay", type=int)
    sp.add_argument("--delay2", type=int)

    sp = add("gain-region", cmd_gain_region, "g1, g2 thresholds and gain verdict")
    sp.add_argument("--source")
    sp.add_argument("--family", choices=sorted(FAMILIES))
    sp.add_argument("--grid")
    sp.add_argument("--theta1", type=float)
    sp.add_argument("--theta2", type=float)

    sp = add("schedule", cmd_schedule, "encode windows and decode plan")
    sp.add_argument("--psi", type=int)
    sp.add_argument("--omega", type=int)
    sp.add_argument("--delay", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--detail", action="store_true", help="list every decoding stage")

    sp = add("simulate", cmd_simulate, "Monte Carlo block error rates")
    sp.add_argument("--source")
    sp.add_argument("--n", type=int)
    sp.add_argument("--psi", type=int)
    sp.add_argument("--omega", type=int)
    sp.add_argument("--delay", type=int)
    sp.add_argument("--blocks", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--rate-x", type=float)
    sp.add_argument("--rate-y", type=float)
    sp.add_argument("--case", choices=CASES)
    sp.add_argument("--theta1", type=float)
    sp.add_argument("--theta2", type=float)
    sp.add_argument("--xi-t", type=float, default=0.3)
    sp.add_argument("--rx", type=float, help="boundary R_X* override")
    sp.add_argument("--ry", type=float, help="boundary R_Y* override")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)

    sp = add("bound", cmd_bound, "union bound on block error probability")
    sp.add_argument("--source")
    sp.add_argument("--n", type=int)
    sp.add_argument("--psi", type=int)
    sp.add_argument("--omega", type=int)
    sp.add_argument("--delay", type=int)
    sp.add_argument("--rx", type=float)
    sp.add_argument("--ry", type=float)
    sp.add_argument("--k", type=int)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    cfg = read_config(known.config)
    command = cfg.pop("command", None)
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if not any(a in subs.choices for a in argv):
        if command is None:
            raise DomainError("no subcommand on the command line or in the config")
        argv = [command] + argv
    name = next(a for a in argv if a in subs.choices)
    sp = subs.choices[name]
    dests = {a.dest: a for a in sp._actions}
    for key, value in cfg.items():
        if key not in dests or key in ("help", "func", "config"):
            raise DomainError(f"unknown config key {key!r} for {name}")
        action = dests[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = value.lower() in ("1", "true", "yes", "on")
        sp.set_defaults(**{key: value})
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.command is None:
            raise DomainError("missing subcommand")
        if args.jobs < 1:
            raise DomainError("--jobs must be >= 1")
        args.func(args)
    except RefusalError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (DomainError, ValueError) as exc:
        print(f"error: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
