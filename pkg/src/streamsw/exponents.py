"""Gallager functions and the streaming error exponents built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from streamsw.info_measures import profile
from streamsw.source_model import JointPmf

OPT_TOL = 1e-10
INV_PHI = (math.sqrt(5) - 1) / 2


def golden_max(f, lo: float, hi: float, tol: float = OPT_TOL) -> tuple[float, float]:
    """Maximise a unimodal f on [lo, hi]; endpoints are always candidates."""
    a, b = lo, hi
    c, d = b - INV_PHI * (b - a), a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    best = max([(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)])
    return best[1], best[0]


def golden_min(f, lo: float, hi: float, tol: float = OPT_TOL) -> tuple[float, float]:
    x, v = golden_max(lambda t: -f(t), lo, hi, tol)
    return x, -v


def _lse(v: np.ndarray, axis=None):
    m = np.max(v, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(v - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis) if axis is not None else float(out.ravel()[0])


class GallagerCurves:
    """E_XY, E_{X|Y}, E_{Y|X} for one pmf, with per-rho caching."""

    def __init__(self, pmf: JointPmf):
        self.pmf = pmf
        p = pmf.probs
        with np.errstate(divide="ignore"):
            self._logp = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), -np.inf)
            py, px = pmf.py, pmf.px
            self._logpy = np.log(py[py > 0])
            self._logpx = np.log(px[px > 0])
            self._log_x_given_y = (self._logp - np.log(np.where(py > 0, py, 1.0)))[:, py > 0]
            self._log_y_given_x = (self._logp - np.log(np.where(px > 0, px, 1.0))[:, None])[px > 0, :]
        self.exy = lru_cache(maxsize=4096)(self._exy)
        self.ex_given_y = lru_cache(maxsize=4096)(self._exgy)
        self.ey_given_x = lru_cache(maxsize=4096)(self._eygx)

    def _exy(self, rho: float) -> float:
        return (1 + rho) * _lse(self._logp.ravel() / (1 + rho))

    def _exgy(self, rho: float) -> float:
        inner = _lse(self._log_x_given_y / (1 + rho), axis=0)
        return _lse(self._logpy + (1 + rho) * inner)

    def _eygx(self, rho: float) -> float:
        inner = _lse(self._log_y_given_x / (1 + rho), axis=1)
        return _lse(self._logpx + (1 + rho) * inner)


@lru_cache(maxsize=64)
def curves(pmf: JointPmf) -> GallagerCurves:
    return GallagerCurves(pmf)


def e_xy(pmf: JointPmf, rho: float) -> float:
    return curves(pmf).exy(float(rho))


def e_x_given_y(pmf: JointPmf, rho: float) -> float:
    return curves(pmf).ex_given_y(float(rho))


def e_y_given_x(pmf: JointPmf, rho: float) -> float:
    return curves(pmf).ey_given_x(float(rho))


def _objective(c: GallagerCurves, r_own: float, r_sum: float, gamma: float, own):
    def obj(rho: float) -> float:
        return gamma * (rho * r_own - own(rho)) + (1 - gamma) * (rho * r_sum - c.exy(rho))
    return obj


def exponent_x(pmf: JointPmf, R_X: float, R_Y: float, gamma: float) -> float:
    """max over rho in [0,1] of gamma(rho R_X - E_{X|Y}) + (1-gamma)(rho(R_X+R_Y) - E_XY)."""
    c = curves(pmf)
    _, v = golden_max(_objective(c, R_X, R_X + R_Y, gamma, c.ex_given_y), 0.0, 1.0)
    return max(v, 0.0)


def exponent_y(pmf: JointPmf, R_X: float, R_Y: float, gamma: float) -> float:
    c = curves(pmf)
    _, v = golden_max(_objective(c, R_Y, R_X + R_Y, gamma, c.ey_given_x), 0.0, 1.0)
    return max(v, 0.0)


@dataclass(frozen=True)
class GammaMin:
    x_value: float
    x_gamma: float
    y_value: float
    y_gamma: float

    @property
    def value(self) -> float:
        return min(self.x_value, self.y_value)


def _min_over_gamma(fn) -> tuple[float, float]:
    # convex in gamma (pointwise max of affine functions); endpoints first
    g, v = golden_min(fn, 0.0, 1.0)
    return v, g


@lru_cache(maxsize=1024)
def min_exponent_over_gamma(pmf: JointPmf, R_X: float, R_Y: float) -> GammaMin:
    xv, xg = _min_over_gamma(lambda g: exponent_x(pmf, R_X, R_Y, g))
    yv, yg = _min_over_gamma(lambda g: exponent_y(pmf, R_X, R_Y, g))
    return GammaMin(xv, xg, yv, yg)


@dataclass(frozen=True)
class DerivativeReport:
    """Absolute errors of finite-difference derivatives at rho = 0."""

    d1_err: dict
    d2_err: dict
    min_second_derivative: dict

    @property
    def worst_d1(self) -> float:
        return max(self.d1_err.values())

    @property
    def worst_d2(self) -> float:
        return max(self.d2_err.values())

    @property
    def worst_convexity(self) -> float:
        return min(self.min_second_derivative.values())


def derivative_checks(pmf: JointPmf, h: float = 1e-5, grid_points: int = 21,
                      grid_h: float = 1e-3) -> DerivativeReport:
    """Central differences at rho=0 against H and V, plus E'' sampled on [0,1].

    The convexity scan uses a wider step so that round-off (about eps/h^2)
    stays far below the 1e-8 floor.
    """
    prof = profile(pmf)
    funcs = {
        "E_XY": (lambda r: e_xy(pmf, r), prof.H_joint, prof.V_joint),
        "E_X|Y": (lambda r: e_x_given_y(pmf, r), prof.H_x_given_y, prof.V_x_given_y),
        "E_Y|X": (lambda r: e_y_given_x(pmf, r), prof.H_y_given_x, prof.V_y_given_x),
    }
    d1, d2, conv = {}, {}, {}
    rhos = np.linspace(0.0, 1.0, grid_points)
    for name, (f, h_true, v_true) in funcs.items():
        fp, f0, fm = f(h), f(0.0), f(-h)
        d1[name] = abs((fp - fm) / (2 * h) - h_true)
        d2[name] = abs((fp - 2 * f0 + fm) / h**2 - v_true)
        conv[name] = min((f(r + grid_h) - 2 * f(r) + f(r - grid_h)) / grid_h**2 for r in rhos)
    return DerivativeReport(d1, d2, conv)
