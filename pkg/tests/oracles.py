"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
from math import log

import mpmath as mp
import numpy as np

from streamsw.codec import TIE_TOL, BinningCode, Codewords, bin_index


def hb(q: float) -> float:
    return 0.0 if q in (0.0, 1.0) else -q * log(q) - (1 - q) * log(1 - q)


def zchannel_closed_form(d: float) -> dict:
    hc = (1 + d) / 2 * hb(1 / (1 + d))
    h = log(2) + hb(d) / 2
    vj = (hb(d) ** 2 / 8 + d / 2 * (log(1 / d) - hb(d) / 2) ** 2
          + (1 - d) / 2 * (log(1 / (1 - d)) - hb(d) / 2) ** 2)
    vc = (0.5 * (log(1 + d) - hc) ** 2 + d / 2 * (log((1 + d) / d) - hc) ** 2
          + (1 + d) * (1 - d * d) / 8 * hb(1 / (1 + d)) ** 2)
    return {"H_joint": h, "H_x_given_y": hc, "V_joint": vj, "V_x_given_y": vc}


def asymmetric_closed_form(p: float) -> dict:
    h = -(1 - 3 * p) * log(1 - 3 * p) - 3 * p * log(p)
    hc = (1 - 2 * p) * hb((1 - 3 * p) / (1 - 2 * p)) + 2 * p * log(2)
    vj = (1 - 3 * p) * (-log(1 - 3 * p) - h) ** 2 + 3 * p * (-log(p) - h) ** 2
    vc = ((1 - 3 * p) * (log((1 - 2 * p) / (1 - 3 * p)) - hc) ** 2
          + p * (log((1 - 2 * p) / p) - hc) ** 2 + 2 * p * (log(2) - hc) ** 2)
    return {"H_joint": h, "H_x_given_y": hc, "V_joint": vj, "V_x_given_y": vc}


def mp_e_xy(probs, rho, dps=40):
    with mp.workdps(dps):
        s = mp.mpf(1) / (1 + mp.mpf(rho))
        return (1 + mp.mpf(rho)) * mp.log(mp.fsum(mp.mpf(p) ** s for p in np.ravel(probs) if p > 0))


def mp_e_x_given_y(probs, rho, dps=40):
    with mp.workdps(dps):
        P = [[mp.mpf(v) for v in row] for row in np.asarray(probs)]
        r = mp.mpf(rho)
        total = mp.mpf(0)
        for y in range(len(P[0])):
            py = mp.fsum(P[x][y] for x in range(len(P)))
            if py == 0:
                continue
            inner = mp.fsum((P[x][y] / py) ** (1 / (1 + r)) for x in range(len(P)) if P[x][y] > 0)
            total += py * inner ** (1 + r)
        return mp.log(total)


def np_e_xy(probs, rho: np.ndarray) -> np.ndarray:
    p = np.ravel(probs)
    p = p[p > 0]
    s = 1 / (1 + rho)
    return (1 + rho) * np.log(np.sum(p[None, :] ** s[:, None], axis=1))


def np_e_x_given_y(probs, rho: np.ndarray) -> np.ndarray:
    P = np.asarray(probs, dtype=float)
    py = P.sum(axis=0)
    s = 1 / (1 + rho)
    total = np.zeros_like(rho)
    for y in np.flatnonzero(py > 0):
        col = P[:, y][P[:, y] > 0] / py[y]
        total += py[y] * np.sum(col[None, :] ** s[:, None], axis=1) ** (1 + rho)
    return np.log(total)


def grid_exponent(probs, r_own, r_sum, gamma, step=1e-6):
    """Exponent of side x by a dense rho grid; pass probs.T for side y."""
    rho = np.arange(0.0, 1.0 + step / 2, step)
    own, joint = np_e_x_given_y(probs, rho), np_e_xy(probs, rho)
    return float(np.max(gamma * (rho * r_own - own) + (1 - gamma) * (rho * r_sum - joint)))
def grid_min_over_gamma(probs, r_own, r_sum, gamma_step=1e-4, rho_step=1e-4, chunk=256):
    """inf over a gamma grid of the rho-grid exponent of side x."""
    rho = np.arange(0.0, 1.0 + rho_step / 2, rho_step)
    a = rho * r_own - np_e_x_given_y(probs, rho)
    b = rho * r_sum - np_e_xy(probs, rho)
    gammas = np.arange(0.0, 1.0 + gamma_step / 2, gamma_step)
    best = np.inf
    for lo in range(0, gammas.size, chunk):
        g = gammas[lo:lo + chunk, None]
        best = min(best, float(np.min(np.max(g * a + (1 - g) * b, axis=1))))
    return max(best, 0.0)


# brute-force decoder -------------------------------------------------------

def _all_vectors(A: int, n: int, F: int) -> np.ndarray:
    return np.array(list(itertools.product(range(A), repeat=n * F)), dtype=np.uint8).reshape(-1, F, n)


def _survivors(code: BinningCode, cw: Codewords, stage, side, prefix_blocks, A):
    F = stage.window_hi - stage.free_lo + 1
    full = _all_vectors(A, code.n, F)
    keep = []
    for cand in full:
        blocks = np.concatenate([prefix_blocks, cand]) if len(prefix_blocks) else cand
        good = True
        for tau, start in stage.constraints:
            window = blocks[start - stage.window_lo:tau - stage.window_lo + 1]
            if bin_index(code, tau, window, side) != cw.get(side, tau):
                good = False
                break
        if good:
            keep.append(cand)
    return np.array(keep, dtype=np.uint8).reshape(-1, F, code.n)


def _counts(labels: np.ndarray, ncells: int) -> np.ndarray:
    S = labels.shape[0]
    flat = (np.arange(S)[:, None] * ncells + labels).ravel()
    return np.bincount(flat, minlength=S * ncells).reshape(S, ncells)


def _plogp_sum(c: np.ndarray, total) -> np.ndarray:
    p = c / np.maximum(total, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0).sum(axis=-1)


def _entropy_rows(labels: np.ndarray, ncells: int) -> np.ndarray:
    return _plogp_sum(_counts(labels, ncells), labels.shape[1])


def _cond_entropy_rows(xs: np.ndarray, ys: np.ndarray, nx: int, ny: int) -> np.ndarray:
    """H(x|y) of the type as sum_y n_y/N H(x | y = b), group by group."""
    c = _counts(ys * nx + xs, nx * ny).reshape(-1, ny, nx).astype(float)
    ny_counts = c.sum(axis=2)
    h_given = _plogp_sum(c, ny_counts[:, :, None])
    return (ny_counts / xs.shape[1] * h_given).sum(axis=1)


def _score_table(X, Y, nx, ny):
    """score[c, l, m] for free positions l, m in [0, F], F = no difference."""
    S, F, n = X.shape
    sc = np.full((S, F + 1, F + 1), np.nan)
    xs, ys = X.reshape(S, F * n).astype(np.int64), Y.reshape(S, F * n).astype(np.int64)
    joint = xs * ny + ys
    hjoint = {s: _entropy_rows(joint[:, s * n:], nx * ny) for s in range(F)}
    for l in range(F + 1):
        for m in range(F + 1):
            if l == m == F:
                continue
            if l == m or m == F:
                sc[:, l, m] = hjoint[l]
            elif l == F:
                sc[:, l, m] = hjoint[m]
            elif l < m:
                hc = _cond_entropy_rows(xs[:, l * n:m * n], ys[:, l * n:m * n], nx, ny)
                sc[:, l, m] = ((m - l) * hc + (F - m) * hjoint[m]) / (F - l)
            else:
                hc = _cond_entropy_rows(ys[:, m * n:l * n], xs[:, m * n:l * n], ny, nx)
                sc[:, l, m] = ((l - m) * hc + (F - l) * hjoint[l]) / (F - m)
    return sc


def _first_diff_table(A: np.ndarray) -> np.ndarray:
    """fd[i, j] = first block where candidates i and j differ (F if equal)."""
    F = A.shape[1]
    d = (A[:, None, :, :] != A[None, :, :, :]).any(axis=3)
    return np.where(d.any(axis=2), d.argmax(axis=2), F)


def brute_force_stage(code, cw, stage, est_x, est_y, chunk=64):
    nx, ny = code.nx, code.ny
    pre = range(stage.window_lo, stage.free_lo)
    px = np.array([est_x[b] for b in pre], dtype=np.uint8).reshape(-1, code.n)
    py = np.array([est_y[b] for b in pre], dtype=np.uint8).reshape(-1, code.n)
    AX = _survivors(code, cw, stage, "x", px, nx)
    AY = _survivors(code, cw, stage, "y", py, ny)
    if len(AX) == 0 or len(AY) == 0:
        return None
    sx, sy = len(AX), len(AY)
    F = AX.shape[1]
    # joint candidates, x-major
    X = np.repeat(AX, sy, axis=0)
    Y = np.tile(AY, (sx, 1, 1))
    sc = _score_table(X, Y, nx, ny)
    S = sx * sy
    fdx, fdy = _first_diff_table(AX), _first_diff_table(AY)
    cx, cy = np.arange(S) // sy, np.arange(S) % sy
    dom = []
    for lo in range(0, S, chunk):
        ws = np.arange(lo, min(S, lo + chunk))
        l = fdx[(ws // sy)[:, None], cx[None, :]]
        m = fdy[(ws % sy)[:, None], cy[None, :]]
        mine = sc[ws[:, None], l, m]
        theirs = sc[np.arange(S)[None, :], l, m]
        ok = (mine <= theirs + TIE_TOL) | ((l == F) & (m == F))
        dom.extend(ws[ok.all(axis=1)].tolist())
    if not dom:
        return None
    nt = stage.targets[1] - stage.targets[0] + 1
    tx = {X[w, :nt].tobytes() for w in dom}
    ty = {Y[w, :nt].tobytes() for w in dom}
    if len(tx) > 1 or len(ty) > 1:
        return None
    return X[dom[0], :nt], Y[dom[0], :nt]


def brute_force_decode(code: BinningCode, cw: Codewords, k: int):
    """Estimate of block k, or None on failure."""
    est_x, est_y = {}, {}
    for stage in code.schedule.decode_plan(k).stages:
        out = brute_force_stage(code, cw, stage, est_x, est_y)
        if out is None:
            return None
        for off, blk in enumerate(range(stage.targets[0], stage.targets[1] + 1)):
            est_x[blk], est_y[blk] = out[0][off], out[1][off]
    return est_x[k], est_y[k]
