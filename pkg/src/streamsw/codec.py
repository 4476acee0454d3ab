"""Random-binning encoder over truncated windows and the staged
minimum-suffix-entropy decoder."""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

import numpy as np

from streamsw.errors import DomainError, RefusalError
from streamsw.info_measures import empirical_entropy
from streamsw.schedule import Schedule, Stage
from streamsw.source_model import SourceStream

DEFAULT_CAP = 2**24
TIE_TOL = 1e-12


@dataclass(frozen=True)
class BinningCode:
    """Shared randomness: keyed hashes f_tau (side x) and g_tau (side y).

    When N is at least the number of possible windows the map is made
    injective (rank of the window plus a keyed offset, mod N).
    """

    seed: int
    N1: int
    N2: int
    schedule: Schedule
    n: int
    nx: int = 2
    ny: int = 2

    def __post_init__(self):
        if self.N1 < 1 or self.N2 < 1:
            raise DomainError("bin counts must be >= 1")
        if self.n < 1:
            raise DomainError("block length must be >= 1")

    def _key(self) -> bytes:
        return (self.seed % 2**128).to_bytes(16, "little")

    def size(self, side: str) -> int:
        return self.N1 if side == "x" else self.N2

    def alphabet(self, side: str) -> int:
        return self.nx if side == "x" else self.ny

    def bin_bytes(self, side: str, tau: int, data: bytes, nblocks: int) -> int:
        N = self.size(side)
        if N == 1:
            return 0
        A = self.alphabet(side)
        if N >= A ** (self.n * nblocks):
            rank = 0
            for d in data:
                rank = rank * A + d
            return (rank + self._hash(side + "off", tau, b"")) % N
        return self._hash(side, tau, data) % N

    def _hash(self, side: str, tau: int, data: bytes) -> int:
        h = hashlib.blake2b(digest_size=16, key=self._key(), person=side.encode())
        h.update(tau.to_bytes(8, "little"))
        h.update(data)
        return int.from_bytes(h.digest(), "little")


def bin_index(code: BinningCode, tau: int, window, side: str = "x") -> int:
    """Bin of a window of blocks (shape (blocks, n)) for encoder tau."""
    w = np.asarray(window, dtype=np.uint8)
    if w.ndim == 1:
        w = w.reshape(-1, code.n)
    lo, hi = code.schedule.encode_window(tau)
    if w.shape != (hi - lo + 1, code.n):
        raise DomainError(f"encoder {tau} expects {hi - lo + 1} blocks of length {code.n}, got shape {w.shape}")
    return code.bin_bytes(side, tau, w.tobytes(), w.shape[0])


@dataclass(frozen=True)
class Codewords:
    m1: np.ndarray
    m2: np.ndarray

    @property
    def count(self) -> int:
        return len(self.m1)

    def get(self, side: str, tau: int) -> int:
        return int((self.m1 if side == "x" else self.m2)[tau - 1])


def encode_stream(code: BinningCode, stream: SourceStream) -> Codewords:
    m1, m2 = [], []
    for k in range(1, stream.count + 1):
        lo, hi = code.schedule.encode_window(k)
        m1.append(bin_index(code, k, stream.x[lo - 1:hi], "x"))
        m2.append(bin_index(code, k, stream.y[lo - 1:hi], "y"))
    return Codewords(np.array(m1, dtype=object), np.array(m2, dtype=object))


@dataclass(frozen=True)
class SuffixScore:
    l: int
    m: int
    value: float


def _blocks_entropy(x, y) -> tuple[float, float, float]:
    """(joint, x|y, y|x) empirical entropies of stacked blocks."""
    hj, hxgy = empirical_entropy(x, y)
    _, hygx = empirical_entropy(y, x)
    return hj, hxgy, hygx


def suffix_entropy(l: int, m: int, x_blocks, y_blocks, a: int = 1,
                   variant: str = "symmetric") -> SuffixScore:
    """Weighted empirical suffix entropy over blocks a..b.

    An index equal to b+1 means that side never differs; the score then
    reduces to the joint entropy of the suffix from the other index.
    The default l > m branch mirrors the l < m branch with X and Y exchanged;
    `variant="printed"` keeps the weights and conditioning as typeset.
    """
    if variant not in ("symmetric", "printed"):
        raise DomainError(f"unknown variant {variant!r}")
    x = np.asarray(x_blocks)
    y = np.asarray(y_blocks)
    if x.shape != y.shape or x.ndim != 2:
        raise DomainError("x and y blocks must share the shape (blocks, n)")
    b = a + x.shape[0] - 1
    if not (a <= l <= b + 1 and a <= m <= b + 1) or (l == m == b + 1):
        raise DomainError(f"indices (l={l}, m={m}) outside [{a}, {b}]")

    def seg(lo, hi):
        return x[lo - a:hi - a + 1], y[lo - a:hi - a + 1]

    if l == m or m == b + 1:
        return SuffixScore(l, m, empirical_entropy(*seg(l, b))[0])
    if l == b + 1:
        return SuffixScore(l, m, empirical_entropy(*seg(m, b))[0])
    if l < m:
        _, hc, _ = _blocks_entropy(*seg(l, m - 1))
        hj = empirical_entropy(*seg(m, b))[0]
        v = ((m - l) * hc + (b - m + 1) * hj) / (b - l + 1)
        return SuffixScore(l, m, v)
    hj = empirical_entropy(*seg(l, b))[0]
    if variant == "printed":
        _, hc, _ = _blocks_entropy(*seg(m, l - 1))
        v = (l - m) / (b - l + 1) * hc + (b - l + 1) / (b - m + 1) * hj
    else:
        _, _, hc = _blocks_entropy(*seg(m, l - 1))
        v = ((l - m) * hc + (b - l + 1) * hj) / (b - m + 1)
    return SuffixScore(l, m, v)


def first_difference(true_blocks, candidate_blocks, a: int = 1) -> tuple[int, int]:
    """First differing block index on each side; b+1 when a side agrees fully."""
    (tx, ty), (cx, cy) = true_blocks, candidate_blocks
    tx, ty, cx, cy = (np.asarray(v) for v in (tx, ty, cx, cy))
    if tx.shape != cx.shape or ty.shape != cy.shape:
        raise DomainError("shapes differ")
    b = a + tx.shape[0] - 1

    def first(u, v):
        diff = np.flatnonzero((u != v).reshape(u.shape[0], -1).any(axis=1))
        return a + int(diff[0]) if diff.size else b + 1

    return first(tx, cx), first(ty, cy)


@dataclass
class StageTrace:
    family: str
    targets: tuple[int, int]
    candidate_space: int
    survivors: int
    winner: tuple | None = None
    winner_score: float | None = None
    error: bool = False
    tie: bool = False


@dataclass
class DecodeTrace:
    k: int
    stages: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(s.error for s in self.stages)

    @property
    def max_survivors(self) -> int:
        return max((s.survivors for s in self.stages), default=0)


@dataclass
class DecodeResult:
    k: int
    x_hat: np.ndarray | None
    y_hat: np.ndarray | None
    trace: DecodeTrace

    @property
    def ok(self) -> bool:
        return self.x_hat is not None


class _Alphabet:
    """Block values v in [0, A^n) and their symbol/byte forms."""

    def __init__(self, A: int, n: int):
        self.A, self.n = A, n
        self.size = A**n
        self.symbols = np.array(list(itertools.product(range(A), repeat=n)), dtype=np.uint8).reshape(self.size, n)
        self.bytes = [row.tobytes() for row in self.symbols]
        self.weights = A ** np.arange(n - 1, -1, -1)

    def value(self, block) -> int:
        return int(np.dot(np.asarray(block, dtype=np.int64), self.weights))


def enumerate_side(code: BinningCode, codewords: Codewords, stage: Stage, side: str,
                   prefix: dict, cap: int = DEFAULT_CAP, cache: dict | None = None) -> np.ndarray:
    """All assignments of the free blocks consistent with the stage's bins.

    Returns an array (survivors, free blocks) of block values in
    lexicographic order. `prefix` maps block index to fixed block value.
    """
    alpha = _Alphabet(code.alphabet(side), code.n)
    cache = {} if cache is None else cache
    j, b = stage.free_lo, stage.window_hi
    by_tau: dict[int, list[tuple[int, int]]] = {}
    for tau, start in stage.constraints:
        by_tau.setdefault(max(tau, j), []).append((tau, start))

    def ok(tau, start, values) -> bool:
        blocks = [prefix[i] for i in range(start, min(tau, j - 1) + 1)]
        if tau >= j:
            blocks += values[max(start, j) - j:tau - j + 1]
        data = b"".join(alpha.bytes[v] for v in blocks)
        key = (side, tau, data)
        got = cache.get(key)
        if got is None:
            got = cache[key] = code.bin_bytes(side, tau, data, len(blocks))
        return got == codewords.get(side, tau)

    partials: list[tuple[int, ...]] = [()]
    for blk in range(j, b + 1):
        if len(partials) * alpha.size > cap:
            raise RefusalError(f"stage {stage.family}@{stage.targets[0]}: side {side} enumeration needs "
                               f"{len(partials) * alpha.size} candidates, cap is {cap}",
                               required=len(partials) * alpha.size, cap=cap)
        cons = by_tau.get(blk, [])
        nxt = []
        for p in partials:
            for v in range(alpha.size):
                cand = p + (v,)
                if all(ok(tau, start, cand) for tau, start in cons):
                    nxt.append(cand)
        partials = nxt
        if not partials:
            break
    return np.array(partials, dtype=np.int64).reshape(len(partials), b - j + 1)


def _xlogx_table(limit: int) -> np.ndarray:
    c = np.arange(limit + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(c > 0, c * np.log(np.where(c > 0, c, 1.0)), 0.0)
    return t


def _entropy_counts(counts: np.ndarray, total: int, xlogx: np.ndarray) -> np.ndarray:
    # sorting makes the sum order depend on the type only, so equal types tie exactly
    terms = np.sort(xlogx[counts], axis=-1)
    return np.log(total) - terms.sum(axis=-1) / total


class _ScoreTables:
    """Segment entropies for all survivor pairs of one stage."""

    def __init__(self, ax: np.ndarray, ay: np.ndarray, alpha_x: _Alphabet, alpha_y: _Alphabet):
        n = alpha_x.n
        F = ax.shape[1]
        self.F = F
        nx, ny = alpha_x.A, alpha_y.A
        # joint cell counts for every (x block value, y block value)
        cells = alpha_x.symbols[:, None, :].astype(np.int64) * ny + alpha_y.symbols[None, :, :]
        jc = np.zeros((alpha_x.size, alpha_y.size, nx * ny), dtype=np.int64)
        for c in range(nx * ny):
            jc[:, :, c] = (cells == c).sum(axis=2)
        xc = np.stack([(alpha_x.symbols == s).sum(axis=1) for s in range(nx)], axis=1)
        yc = np.stack([(alpha_y.symbols == s).sum(axis=1) for s in range(ny)], axis=1)
        xlogx = _xlogx_table(n * F)
        self.hj, self.hx, self.hy = {}, {}, {}
        for s in range(F):
            cj = np.zeros((ax.shape[0], ay.shape[0], nx * ny), dtype=np.int64)
            cx = np.zeros((ax.shape[0], nx), dtype=np.int64)
            cy = np.zeros((ay.shape[0], ny), dtype=np.int64)
            for e in range(s, F):
                cj += jc[ax[:, e][:, None], ay[:, e][None, :]]
                cx += xc[ax[:, e]]
                cy += yc[ay[:, e]]
                total = n * (e - s + 1)
                self.hj[s, e] = _entropy_counts(cj, total, xlogx)
                self.hx[s, e] = _entropy_counts(cx, total, xlogx)
                self.hy[s, e] = _entropy_counts(cy, total, xlogx)

    def score(self, l: int, m: int) -> np.ndarray:
        """Suffix score for free positions l, m (F means no difference)."""
        F, hj = self.F, self.hj
        last = F - 1
        if l == m or m == F:
            return hj[l, last]
        if l == F:
            return hj[m, last]
        if l < m:
            hc = hj[l, m - 1] - self.hy[l, m - 1][None, :]
            return ((m - l) * hc + (F - m) * hj[m, last]) / (F - l)
        hc = hj[m, l - 1] - self.hx[m, l - 1][:, None]
        return ((l - m) * hc + (F - l) * hj[l, last]) / (F - m)


def _runs(a: np.ndarray, depth: int) -> np.ndarray:
    """Run ids of rows sharing columns [0, depth) in a lexicographically sorted array."""
    if depth == 0:
        return np.zeros(a.shape[0], dtype=np.int64)
    change = np.any(a[1:, :depth] != a[:-1, :depth], axis=1)
    return np.concatenate([[0], np.cumsum(change)])


def _excluded_min(values: np.ndarray, rows: np.ndarray, l: int, F: int, axis: int):
    """For each candidate, min of `values` over competitors at first-difference l.

    Competitors share positions [0, l) and differ at l; l == F means the
    competitor equals the candidate on this side. Returns (table, column map).
    """
    if l == F:
        return values, np.arange(rows.shape[0])
    group = _runs(rows, l)
    run = _runs(rows, l + 1)
    starts = np.flatnonzero(np.concatenate([[True], run[1:] != run[:-1]]))
    per_run = np.minimum.reduceat(values, starts, axis=axis)
    run_group = group[starts]
    nrun = len(starts)
    excl = np.full(per_run.shape, np.inf)
    if nrun > 1:
        max_span = int(np.max(np.bincount(run_group)))
        for d in range(1, max_span):
            same = run_group[d:] == run_group[:-d]
            if not same.any():
                continue
            idx = np.flatnonzero(same)
            if axis == 0:
                excl[idx] = np.minimum(excl[idx], per_run[idx + d])
                excl[idx + d] = np.minimum(excl[idx + d], per_run[idx])
            else:
                excl[:, idx] = np.minimum(excl[:, idx], per_run[:, idx + d])
                excl[:, idx + d] = np.minimum(excl[:, idx + d], per_run[:, idx])
    return excl, run


def dominators(tables: _ScoreTables, ax: np.ndarray, ay: np.ndarray) -> np.ndarray:
    """Boolean (Sx, Sy) mask of candidates whose score is <= every competitor's."""
    F = tables.F
    dom = np.ones((ax.shape[0], ay.shape[0]), dtype=bool)
    for l in range(F + 1):
        for m in range(F + 1):
            if l == F and m == F:
                continue
            sc = tables.score(l, m)
            if sc.ndim == 1:
                sc = np.broadcast_to(sc, dom.shape)
            ey, ycol = _excluded_min(sc, ay, m, F, axis=1)
            ex, xcol = _excluded_min(ey, ax, l, F, axis=0)
            best = ex[np.ix_(xcol, ycol)]
            dom &= sc <= best + TIE_TOL
            if not dom.any():
                return dom
    return dom


def decode_stage(code: BinningCode, codewords: Codewords, stage: Stage, est_x: dict, est_y: dict,
                 cap: int = DEFAULT_CAP, cache: dict | None = None) -> tuple[StageTrace, np.ndarray | None, np.ndarray | None]:
    """Run one stage; returns the trace and the committed target block values."""
    cache = {} if cache is None else cache
    F = stage.window_hi - stage.free_lo + 1
    alpha_x, alpha_y = _Alphabet(code.nx, code.n), _Alphabet(code.ny, code.n)
    space = (alpha_x.size * alpha_y.size) ** F
    ax = enumerate_side(code, codewords, stage, "x", est_x, cap, cache)
    ay = enumerate_side(code, codewords, stage, "y", est_y, cap, cache)
    surv = ax.shape[0] * ay.shape[0]
    trace = StageTrace(stage.family, stage.targets, space, surv)
    if surv == 0:
        trace.error = True
        return trace, None, None
    if surv > cap:
        raise RefusalError(f"stage {stage.family}@{stage.targets[0]}: {surv} joint candidates, cap is {cap}",
                           required=surv, cap=cap)
    tables = _ScoreTables(ax, ay, alpha_x, alpha_y)
    ix, iy = np.nonzero(dominators(tables, ax, ay))
    if ix.size == 0:
        trace.error = True
        return trace, None, None
    ntarget = stage.targets[1] - stage.targets[0] + 1
    tx, ty = ax[ix, :ntarget], ay[iy, :ntarget]
    wx, wy = ax[ix[0]], ay[iy[0]]
    trace.winner = (tuple(int(v) for v in wx), tuple(int(v) for v in wy))
    trace.winner_score = float(tables.hj[0, F - 1][ix[0], iy[0]])
    if np.any(tx != tx[0]) or np.any(ty != ty[0]):
        trace.error = trace.tie = True
        return trace, None, None
    return trace, tx[0], ty[0]


def decode_block(code: BinningCode, codewords: Codewords, k: int, cap: int = DEFAULT_CAP) -> DecodeResult:
    """Estimate block k at time T_k by executing its decode plan."""
    sch = code.schedule
    plan = sch.decode_plan(k)
    if codewords.count < plan.decode_time:
        raise DomainError(f"block {k} needs codewords through {plan.decode_time}, have {codewords.count}")
    est_x: dict[int, int] = {}
    est_y: dict[int, int] = {}
    trace = DecodeTrace(k)
    cache: dict = {}
    for stage in plan.stages:
        st, vx, vy = decode_stage(code, codewords, stage, est_x, est_y, cap, cache)
        trace.stages.append(st)
        if vx is None:
            return DecodeResult(k, None, None, trace)
        for off, blk in enumerate(range(stage.targets[0], stage.targets[1] + 1)):
            est_x[blk], est_y[blk] = int(vx[off]), int(vy[off])
    ax, ay = _Alphabet(code.nx, code.n), _Alphabet(code.ny, code.n)
    return DecodeResult(k, ax.symbols[est_x[k]].copy(), ay.symbols[est_y[k]].copy(), trace)


def block_values(blocks, A: int) -> list[int]:
    """Block value indices of an array of blocks (shape (count, n))."""
    arr = np.asarray(blocks, dtype=np.int64)
    w = A ** np.arange(arr.shape[1] - 1, -1, -1)
    return [int(v) for v in arr @ w]
