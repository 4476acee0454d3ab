"""Monte Carlo estimate of per-block error rates of the streaming code.

Empirical nu-hat is a diagnostic only: the moderate deviations constants are
n -> infinity limits and are not reproducible at desk-scale block lengths.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from streamsw.codec import DEFAULT_CAP, BinningCode, decode_block, encode_stream
from streamsw.errors import DomainError
from streamsw.info_measures import profile
from streamsw.md_analysis import boundary_target
from streamsw.schedule import Schedule
from streamsw.source_model import parse_source, sample_blocks

Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    source: str = "dsbs:p=0.05"
    n: int = 3
    psi: int = 5
    omega: int = 2
    T: int = 2
    blocks: int = 6
    trials: int = 200
    seed: int = 1
    N1: int | None = None
    N2: int | None = None
    case: str | None = None
    theta1: float = 1.0
    theta2: float = 0.0
    xi_t: float = 0.3
    rx_star: float | None = None
    ry_star: float | None = None
    cap: int = DEFAULT_CAP
    jobs: int = 1

    @property
    def schedule(self) -> Schedule:
        return Schedule(self.psi, self.omega, self.T)

    @property
    def md(self) -> bool:
        return self.case is not None

    @property
    def xi(self) -> float:
        return self.n ** (-self.xi_t)

    def bins(self) -> tuple[int, int]:
        """(N1, N2), either given directly or round(exp(n R)) at R = R* + theta xi."""
        if self.md:
            pmf = parse_source(self.source)
            t = boundary_target(profile(pmf), self.case, self.theta1, self.theta2, self.rx_star, self.ry_star)
            rx, ry = t.rates(self.xi)
            return max(1, round(math.exp(self.n * rx))), max(1, round(math.exp(self.n * ry)))
        if self.N1 is None or self.N2 is None:
            raise DomainError("give N1 and N2, or an MD case with theta")
        if self.N1 < 1 or self.N2 < 1:
            raise DomainError("bin counts must be >= 1")
        return self.N1, self.N2


@dataclass
class SimReport:
    config: SimConfig
    N1: int
    N2: int
    errors: np.ndarray
    trials: int
    wall_seconds: float = 0.0
    max_survivors: int = 0
    notes: list = field(default_factory=list)

    @property
    def eps_hat(self) -> np.ndarray:
        return self.errors / self.trials

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return [wilson(int(e), self.trials) for e in self.errors]

    @property
    def sup_eps(self) -> float:
        return float(self.eps_hat.max())

    @property
    def sup_k(self) -> int:
        return int(np.argmax(self.eps_hat)) + 1

    @property
    def nu_hat(self) -> float | None:
        cfg = self.config
        if not cfg.md or self.sup_eps == 0:
            return None
        return -math.log(self.sup_eps) / (cfg.n * cfg.xi**2)

    def rows(self) -> list[tuple]:
        return [(k + 1, int(e), self.trials, float(e) / self.trials, lo, hi)
                for k, (e, (lo, hi)) in enumerate(zip(self.errors, self.intervals))]

    def header(self) -> list[str]:
        lines = [f"N1={self.N1} N2={self.N2} trials={self.trials} sup_eps={self.sup_eps:.6g} at k={self.sup_k}"]
        if self.config.md:
            nh = self.nu_hat
            lines.append(f"nu_hat={'inf' if nh is None else f'{nh:.6g}'} (diagnostic only; "
                         "moderate deviations constants are asymptotic and not reproducible at this n)")
        return lines


CSV_COLUMNS = ("k", "errors", "trials", "eps_hat", "ci_lo", "ci_hi")


def wilson(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


def _trial_seeds(seed: int, i: int) -> tuple[int, int]:
    ss = np.random.SeedSequence(seed ^ i)
    src, code = ss.generate_state(2, dtype=np.uint64)
    return int(src), int(code)


def _run_trials(cfg: SimConfig, N1: int, N2: int, idx: range) -> tuple[np.ndarray, int]:
    pmf = parse_source(cfg.source)
    sch = cfg.schedule
    errors = np.zeros(cfg.blocks, dtype=np.int64)
    worst = 0
    for i in idx:
        src_seed, code_seed = _trial_seeds(cfg.seed, i)
        stream = sample_blocks(pmf, cfg.n, sch.decode_time(cfg.blocks), src_seed)
        code = BinningCode(code_seed, N1, N2, sch, cfg.n, pmf.nx, pmf.ny)
        cw = encode_stream(code, stream)
        for k in range(1, cfg.blocks + 1):
            res = decode_block(code, cw, k, cfg.cap)
            worst = max(worst, res.trace.max_survivors)
            if not res.ok or not (np.array_equal(res.x_hat, stream.x[k - 1])
                                  and np.array_equal(res.y_hat, stream.y[k - 1])):
                errors[k - 1] += 1
    return errors, worst


def run(cfg: SimConfig) -> SimReport:
    if cfg.trials < 1 or cfg.blocks < 1:
        raise DomainError("trials and blocks must be positive")
    pmf = parse_source(cfg.source)
    if pmf.nx > 4 or pmf.ny > 4:
        raise DomainError("exhaustive decoding supports alphabets of size <= 4")
    N1, N2 = cfg.bins()
    start = time.perf_counter()
    jobs = max(1, min(cfg.jobs, cfg.trials))
    if jobs == 1:
        errors, worst = _run_trials(cfg, N1, N2, range(cfg.trials))
    else:
        chunks = [range(j, cfg.trials, jobs) for j in range(jobs)]
        with ProcessPoolExecutor(jobs) as pool:
            parts = list(pool.map(_run_trials, [cfg] * jobs, [N1] * jobs, [N2] * jobs, chunks))
        errors = sum(p[0] for p in parts)
        worst = max(p[1] for p in parts)
    return SimReport(cfg, N1, N2, errors, cfg.trials, time.perf_counter() - start, worst)


def rate_sweep(cfg: SimConfig, grid) -> list[tuple]:
    """Rows (N1, N2, sup_eps, ci_lo, ci_hi) over (N1, N2) pairs."""
    rows = []
    for N1, N2 in grid:
        rep = run(replace(cfg, N1=int(N1), N2=int(N2), case=None))
        lo, hi = rep.intervals[rep.sup_k - 1]
        rows.append((int(N1), int(N2), rep.sup_eps, lo, hi))
    return rows


def delay_sweep(cfg: SimConfig, delays) -> list[tuple]:
    """Rows (T, sup_eps, ci_lo, ci_hi); the schedule must stay valid for each T."""
    rows = []
    for T in delays:
        rep = run(replace(cfg, T=int(T)))
        lo, hi = rep.intervals[rep.sup_k - 1]
        rows.append((int(T), rep.sup_eps, lo, hi))
    return rows
