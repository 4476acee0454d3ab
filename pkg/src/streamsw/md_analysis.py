"""Moderate deviations constants near the Slepian-Wolf boundary and the
gain region where streaming multiplies the non-streaming constant by T."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from streamsw.errors import DomainError
from streamsw.exponents import min_exponent_over_gamma
from streamsw.info_measures import SourceProfile, check_positive_dispersions, profile
from streamsw.source_model import JointPmf, make_asymmetric, make_dsbs, make_zchannel

CASES = ("i", "ii", "iii", "iv", "v")
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class BoundaryTarget:
    """A boundary rate pair R* of the given case and an approach direction theta."""

    case: str
    R_X: float
    R_Y: float
    theta1: float
    theta2: float

    @property
    def theta(self) -> tuple[float, float]:
        return self.theta1, self.theta2

    def rates(self, xi: float) -> tuple[float, float]:
        return self.R_X + self.theta1 * xi, self.R_Y + self.theta2 * xi

    def swapped(self) -> "BoundaryTarget":
        mirror = {"i": "v", "ii": "iv", "iii": "iii", "iv": "ii", "v": "i"}
        return BoundaryTarget(mirror[self.case], self.R_Y, self.R_X, self.theta2, self.theta1)


@dataclass(frozen=True)
class GainVerdict:
    holds_gain_T: bool
    g1: float
    g2: float
    ratio: float
    binding: str


def _check_theta(case: str, t1: float, t2: float) -> None:
    ok = {
        "i": t1 > 0,
        "ii": t1 > 0 and t2 > -t1,
        "iii": t1 + t2 > 0,
        "iv": t2 > 0 and t1 > -t2,
        "v": t2 > 0,
    }
    if case not in ok:
        raise DomainError(f"unknown case {case!r}")
    if not ok[case]:
        raise DomainError(f"theta=({t1}, {t2}) is not an admissible direction for case ({case})")


def validate_target(prof: SourceProfile, target: BoundaryTarget, tol: float = BOUNDARY_TOL) -> None:
    """Check that R* sits on the boundary piece named by the case label."""
    _check_theta(target.case, target.theta1, target.theta2)
    rx, ry, p = target.R_X, target.R_Y, prof
    on_sum = abs(rx + ry - p.H_joint) <= tol
    checks = {
        "i": abs(rx - p.H_x_given_y) <= tol and ry > p.H_y + tol,
        "ii": abs(rx - p.H_x_given_y) <= tol and abs(ry - p.H_y) <= tol,
        "iii": on_sum and p.H_x_given_y + tol < rx < p.H_x - tol,
        "iv": abs(rx - p.H_x) <= tol and abs(ry - p.H_y_given_x) <= tol,
        "v": abs(ry - p.H_y_given_x) <= tol and rx > p.H_x + tol,
    }
    if not checks[target.case]:
        raise DomainError(f"R*=({rx}, {ry}) is not a case ({target.case}) boundary point")


def boundary_target(prof: SourceProfile, case: str, theta1: float, theta2: float,
                    R_X: float | None = None, R_Y: float | None = None) -> BoundaryTarget:
    """Build a target, filling in the rate coordinates the case pins down.

    Free coordinates default to: case (i) R_Y* = H_Y + 0.1, case (v)
    R_X* = H_X + 0.1, case (iii) the midpoint of the sum-rate segment.
    """
    p = prof
    if case == "i":
        rx, ry = p.H_x_given_y, p.H_y + 0.1 if R_Y is None else R_Y
    elif case == "ii":
        rx, ry = p.H_x_given_y, p.H_y
    elif case == "iii":
        rx = 0.5 * (p.H_x_given_y + p.H_x) if R_X is None else R_X
        ry = p.H_joint - rx
    elif case == "iv":
        rx, ry = p.H_x, p.H_y_given_x
    elif case == "v":
        rx, ry = p.H_x + 0.1 if R_X is None else R_X, p.H_y_given_x
    else:
        raise DomainError(f"unknown case {case!r}")
    t = BoundaryTarget(case, rx, ry, theta1, theta2)
    validate_target(prof, t)
    return t


def _require_dispersions(prof: SourceProfile) -> None:
    if not check_positive_dispersions(prof):
        raise DomainError("all three source dispersions must be positive")


def f_gamma(prof: SourceProfile, theta, gamma):
    """(theta1 + (1-gamma) theta2)^2 / (2 (gamma V_c + (1-gamma) V_j))."""
    t1, t2 = theta
    g = np.asarray(gamma, dtype=float)
    return (t1 + (1 - g) * t2) ** 2 / (2 * (g * prof.V_x_given_y + (1 - g) * prof.V_joint))


def minimize_f_over_gamma(prof: SourceProfile, theta) -> tuple[float, float]:
    """Minimise f over gamma in [0,1] via the stationary point and endpoints."""
    t1, t2 = theta
    vc, vj = prof.V_x_given_y, prof.V_joint
    cands = [0.0, 1.0]
    if t2 != 0 and vj != vc:
        g_star = -t1 / t2 + (vc + vj) / (vj - vc)
        if 0.0 < g_star < 1.0:
            cands.append(g_star)
    vals = [(float(f_gamma(prof, theta, g)), g) for g in cands]
    value, gamma = min(vals)
    return value, gamma


def _case_ii_parts(prof: SourceProfile, t1: float, t2: float) -> tuple[float, float]:
    inf_f, _ = minimize_f_over_gamma(prof, (t1, t2))
    return inf_f, (t1 + t2) ** 2 / (2 * prof.V_joint)


def _normalise(prof: SourceProfile, target: BoundaryTarget) -> tuple[SourceProfile, BoundaryTarget]:
    # cases (iv) and (v) are cases (ii) and (i) with X and Y exchanged
    _check_theta(target.case, target.theta1, target.theta2)
    if target.case in ("iv", "v"):
        return prof.swapped(), target.swapped()
    return prof, target


def nu_nonstreaming(prof: SourceProfile, target: BoundaryTarget) -> float:
    _require_dispersions(prof)
    p, t = _normalise(prof, target)
    t1, t2 = t.theta
    if t.case == "i":
        return t1**2 / (2 * p.V_x_given_y)
    if t.case == "ii":
        return min(t1**2 / (2 * p.V_x_given_y), (t1 + t2) ** 2 / (2 * p.V_joint))
    return (t1 + t2) ** 2 / (2 * p.V_joint)


def L_constant(prof: SourceProfile, target: BoundaryTarget) -> float:
    _require_dispersions(prof)
    p, t = _normalise(prof, target)
    t1, t2 = t.theta
    if t.case == "i":
        return t1**2 / (2 * p.V_x_given_y)
    if t.case == "ii":
        return min(_case_ii_parts(p, t1, t2))
    return (t1 + t2) ** 2 / (2 * p.V_joint)


def nu_streaming_lower(prof: SourceProfile, target: BoundaryTarget, T: int) -> float:
    if int(T) != T or T < 1:
        raise DomainError("delay T must be a positive integer")
    return T * L_constant(prof, target)


def nu_two_delays(prof: SourceProfile, target: BoundaryTarget, T1: int, T2: int) -> float:
    return nu_streaming_lower(prof, target, min(T1, T2))


def nu_point_to_point(prof: SourceProfile, T: int, with_side_info: bool) -> float:
    v = prof.V_x_given_y if with_side_info else prof.V_x
    if v <= 1e-12:
        raise DomainError("the relevant dispersion is zero")
    return T / (2 * v)


def gain_thresholds(prof: SourceProfile) -> tuple[float, float]:
    """(g1, g2) for the case (ii) corner."""
    vc, vj = prof.V_x_given_y, prof.V_joint
    if vc <= 0:
        raise DomainError("conditional dispersion must be positive")
    g1 = (vj - vc) / (2 * vc)
    g2 = min(math.sqrt(vj / vc) - 1, (vj - vc) / (vj + vc))
    return g1, g2


def gain_region(prof: SourceProfile, theta) -> GainVerdict:
    t1, t2 = theta
    _check_theta("ii", t1, t2)
    g1, g2 = gain_thresholds(prof)
    ratio = t2 / t1
    if ratio >= g1:
        return GainVerdict(True, g1, g2, ratio, "ratio>=g1")
    if -1 < ratio <= g2:
        return GainVerdict(True, g1, g2, ratio, "-1<ratio<=g2")
    return GainVerdict(False, g1, g2, ratio, "g2<ratio<g1")


FAMILIES = {"dsbs": make_dsbs, "zchannel": make_zchannel, "asym": make_asymmetric}


def g_curves(family: str, grid) -> list[tuple[float, float, float]]:
    """Rows (param, g1, g2) over a parameter grid of one source family."""
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}")
    rows = []
    for param in grid:
        g1, g2 = gain_thresholds(profile(FAMILIES[family](float(param))))
        rows.append((float(param), g1, g2))
    return rows


@dataclass
class MdLimitReport:
    L: float
    xis: tuple
    ratios: list = field(default_factory=list)

    @property
    def rel_errors(self) -> list[float]:
        return [abs(r - self.L) / self.L for r in self.ratios]

    @property
    def passed(self) -> bool:
        return self.rel_errors[-1] <= 0.05


def md_limit_check(pmf: JointPmf, target: BoundaryTarget,
                   xis=(1e-2, 1e-3, 1e-4)) -> MdLimitReport:
    """min(inf_gamma E_X, inf_gamma E_Y) / xi^2 at R* + theta xi against L."""
    prof = profile(pmf)
    if target.case not in ("i", "ii", "iii"):
        raise DomainError("md_limit_check covers cases (i)-(iii)")
    validate_target(prof, target)
    rep = MdLimitReport(L=L_constant(prof, target), xis=tuple(xis))
    for xi in xis:
        rx, ry = target.rates(xi)
        rep.ratios.append(min_exponent_over_gamma(pmf, rx, ry).value / xi**2)
    return rep
