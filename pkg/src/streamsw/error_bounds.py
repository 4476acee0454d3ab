"""Union bound on the block error probability of the streaming decoder,
evaluated in log space."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from streamsw.errors import DomainError
from streamsw.exponents import min_exponent_over_gamma
from streamsw.schedule import Schedule
from streamsw.source_model import JointPmf


@dataclass(frozen=True)
class BoundInputs:
    pmf: JointPmf
    n: int
    schedule: Schedule
    R_X: float
    R_Y: float
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.R_X < 0 or self.R_Y < 0:
            raise DomainError("rates must be non-negative")
        q = self.schedule.phase(self.k)
        if q is None or q < 2:
            raise DomainError(f"block {self.k} is not in S(q) with q >= 2")

    @property
    def q(self) -> int:
        return self.schedule.phase(self.k)


@dataclass(frozen=True)
class FamilyTerm:
    family: int
    span: int
    exponent: float
    log_value: float
    extrapolated: bool = False

    @property
    def value(self) -> float:
        return min(1.0, math.exp(min(self.log_value, 0.0)))


@dataclass
class BoundBreakdown:
    terms: list = field(default_factory=list)

    @property
    def log_total(self) -> float:
        return float(np.logaddexp.reduce([t.log_value for t in self.terms]))

    @property
    def total(self) -> float:
        """Display value clamped to [0, 1]."""
        return min(1.0, math.exp(min(self.log_total, 0.0)))

    @property
    def dominant(self) -> FamilyTerm:
        return max(self.terms, key=lambda t: t.log_value)


def truncated_rates(n: int, schedule: Schedule, l: int, m: int, q: int, R_X: float, R_Y: float):
    """(R^l_X, R^m_Y, kappa_l, zeta_m) for l, m in [t_{q-1}, alpha_{q-1}]."""
    lo, hi = schedule.t(q - 1), schedule.alpha(q - 1)
    if q < 1 or not (lo <= l <= hi and lo <= m <= hi):
        raise DomainError(f"l, m must lie in [{lo}, {hi}]")
    b = schedule.beta(q - 1)
    fl = schedule.period / (b - l + 1)
    fm = schedule.period / (b - m + 1)
    return fl * R_X, fm * R_Y, (1 - fl) * R_X, (1 - fm) * R_Y


def log_prefactor(inp: BoundInputs) -> float:
    """log of 2 psi^2 (n psi + 1)^(7 |X| |Y|)."""
    psi = inp.schedule.psi
    size = inp.pmf.nx * inp.pmf.ny
    return math.log(2) + 2 * math.log(psi) + 7 * size * math.log(inp.n * psi + 1)


def _full_rate_exponent(inp: BoundInputs) -> float:
    return min_exponent_over_gamma(inp.pmf, inp.R_X, inp.R_Y).value


def family_terms(family: int, inp: BoundInputs) -> list[FamilyTerm]:
    s, n, lp = inp.schedule, inp.n, log_prefactor(inp)

    def term(span, expo, extrapolated=False):
        return FamilyTerm(family, span, expo, lp - n * span * expo, extrapolated)

    if family == 1:
        # exponents grow with the rates, so the smallest truncated rates
        # (l = m = t_{q-1}) give the worst case over the index range
        t1 = s.t(inp.q - 1)
        rl, rm, _, _ = truncated_rates(n, s, t1, t1, inp.q, inp.R_X, inp.R_Y)
        both = min_exponent_over_gamma(inp.pmf, rl, rm).value
        mixed = min(min_exponent_over_gamma(inp.pmf, rl, inp.R_Y).x_value,
                    min_exponent_over_gamma(inp.pmf, inp.R_X, rm).y_value)
        return [term(s.period, both), term(s.period, mixed)]
    tk, bq = s.decode_time(inp.k), s.beta(inp.q)
    if family == 6 and tk <= bq:
        raise DomainError("family 6 needs T_k > beta_q")
    if family == 4 and tk > bq:
        raise DomainError("family 4 needs T_k <= beta_q")
    spans = {2: s.omega, 3: s.period + 1, 4: s.T, 5: s.omega, 6: s.T}
    if family not in spans:
        raise DomainError(f"unknown family {family}")
    return [term(spans[family], _full_rate_exponent(inp), extrapolated=family == 4)]


def family_bound(family: int, inp: BoundInputs) -> float:
    """log of the family's bound."""
    return float(np.logaddexp.reduce([t.log_value for t in family_terms(family, inp)]))


def total_bound(inp: BoundInputs) -> BoundBreakdown:
    s = inp.schedule
    last = 6 if s.decode_time(inp.k) > s.beta(inp.q) else 4
    out = BoundBreakdown()
    for fam in (1, 2, 3, 5, last) if last == 6 else (1, 2, 3, 4):
        out.terms.extend(family_terms(fam, inp))
    return out
