"""Truncated-memory encoder schedule and the backtracking decode plan.

Block and codeword indices are 1-based and ranges are inclusive pairs (lo, hi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from streamsw.errors import DomainError

Range = tuple[int, int]


@dataclass(frozen=True)
class Stage:
    """One decoding step.

    Candidates range over blocks [window_lo, window_hi]. Blocks before
    `free_lo` are fixed to earlier estimates; `targets` are committed from
    the winner. Each constraint (tau, start) says the bin of blocks
    [start, tau] must equal codeword tau.
    """

    family: str
    window_lo: int
    window_hi: int
    free_lo: int
    targets: Range
    constraints: tuple[tuple[int, int], ...]

    @property
    def codewords(self) -> Range:
        taus = [t for t, _ in self.constraints]
        return min(taus), max(taus)

    @property
    def prerequisites(self) -> Range | None:
        if self.free_lo > self.window_lo:
            return self.window_lo, self.free_lo - 1
        return None


@dataclass(frozen=True)
class CoarseStage:
    blocks: Range
    codewords: Range
    prerequisites: Range | None
    family: str


@dataclass(frozen=True)
class DecodePlan:
    k: int
    decode_time: int
    stages: tuple[Stage, ...]
    q: int | None = None

    def coarse(self) -> list[CoarseStage]:
        """Group stages into the three-step picture: blocks before t_q, blocks
        t_q..k-1, then block k itself."""
        if self.stages[0].family == "INIT":
            groups = [list(self.stages)]
        else:
            # B3 is empty when omega = 1, so take t_q from the first post-reset stage
            tq = min(s.targets[0] for s in self.stages if s.family not in ("B1", "B2"))
            groups = [
                [s for s in self.stages if s.targets[1] < tq],
                [s for s in self.stages if tq <= s.targets[0] < self.k],
                [s for s in self.stages if s.targets[0] == self.k],
            ]
            groups = [g for g in groups if g]
        out = []
        for g in groups:
            lo, hi = g[0].targets[0], g[-1].targets[1]
            cw_lo = min(s.codewords[0] for s in g)
            cw_hi = max(s.codewords[1] for s in g)
            pre = [b for s in g if s.prerequisites for b in range(s.prerequisites[0], s.prerequisites[1] + 1)
                   if not lo <= b <= hi]
            fams = []
            for s in g:
                if s.family not in fams:
                    fams.append(s.family)
            out.append(CoarseStage((lo, hi), (cw_lo, cw_hi), (min(pre), max(pre)) if pre else None, "+".join(fams)))
        return out


@dataclass(frozen=True)
class Schedule:
    psi: int
    omega: int
    T: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if min(self.psi, self.omega, self.T) < 1:
            raise DomainError("psi, omega and T must be positive")
        if not self.psi > 2 * self.omega:
            raise DomainError(f"need psi > 2*omega, got psi={self.psi}, omega={self.omega}")
        if not self.omega >= self.T:
            raise DomainError(f"need omega >= T, got omega={self.omega}, T={self.T}")

    @classmethod
    def asymptotic(cls, n: int, T: int, delta: float = 0.1) -> "Schedule":
        """psi = ceil(n^(1/2+delta)), omega = 2T, psi bumped until psi > 2 omega."""
        omega = 2 * T
        psi = max(math.ceil(n ** (0.5 + delta)), 2 * omega + 1)
        return cls(psi, omega, T)

    @property
    def period(self) -> int:
        return self.psi - self.omega + 1

    def alpha(self, q: int) -> int:
        return self.period * q + self.omega

    def beta(self, q: int) -> int:
        return self.period * (q + 1) + self.omega - 1

    def t(self, q: int) -> int:
        return self.period * q + 1

    def s_range(self, q: int) -> Range:
        return self.alpha(q), self.beta(q)

    def phase(self, k: int) -> int | None:
        """q with k in S(q), or None when k < omega."""
        if k < self.omega:
            return None
        return (k - self.omega) // self.period

    def decode_time(self, k: int) -> int:
        return k + self.T - 1

    def encode_window(self, k: int) -> Range:
        if k < 1:
            raise DomainError("block index must be >= 1")
        if k <= self.psi:
            return 1, k
        return self.t(self.phase(k)), k

    buffer_contents = encode_window

    def codewords_per_block(self, k: int) -> int:
        if k < 1:
            raise DomainError("block index must be >= 1")
        count, tau = 0, k
        # windows only grow until the next reset, so stop after the first miss past psi
        while True:
            lo, _ = self.encode_window(tau)
            if lo <= k:
                count += 1
            elif tau > self.psi:
                break
            tau += 1

        return count

    def decode_plan(self, k: int) -> DecodePlan:
        if k < 1:
            raise DomainError("block index must be >= 1")
        if k in self._cache:
            return self._cache[k]
        q = self.phase(k)
        tk = self.decode_time(k)
        if q is None or q < 2:
            stages = tuple(self._init_stage(j, k) for j in range(1, k + 1))
            plan = DecodePlan(k, tk, stages, q)
        else:
            plan = DecodePlan(k, tk, tuple(self._periodic_stages(k, q)), q)
        self._cache[k] = plan
        return plan

    def _cw(self, lo: int, hi: int) -> tuple[tuple[int, int], ...]:
        return tuple((tau, self.encode_window(tau)[0]) for tau in range(lo, hi + 1))

    def _init_stage(self, j: int, k: int) -> Stage:
        tk = self.decode_time(k)
        return Stage("INIT", 1, tk, j, (j, j), self._cw(1, tk))

    def _periodic_stages(self, k: int, q: int) -> list[Stage]:
        tk = self.decode_time(k)
        a1, b1, t1 = self.alpha(q - 1), self.beta(q - 1), self.t(q - 1)
        aq, bq, tq = self.alpha(q), self.beta(q), self.t(q)
        stages = [Stage("B1", t1, b1, t1, (t1, a1), self._cw(a1, b1))]
        for j in range(a1 + 1, tq):
            stages.append(Stage("B2", t1, b1, j, (j, j), self._cw(j, b1)))
        lam = min(tk, bq)
        for j in range(tq, b1 + 1):
            stages.append(Stage("B3", t1, lam, j, (j, j), self._cw(j, b1) + self._cw(aq, lam)))
        tq1 = self.t(q + 1)
        for j in range(aq, k + 1):
            if tk <= bq:
                stages.append(Stage("B4", tq, tk, j, (j, j), self._cw(j, tk)))
            elif j < tq1:
                stages.append(Stage("B5", tq, bq, j, (j, j), self._cw(j, bq)))
            else:
                stages.append(Stage("B6", tq, tk, j, (j, j), self._cw(j, bq) + self._cw(self.alpha(q + 1), tk)))
        return stages
