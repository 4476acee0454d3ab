"""Finite correlated sources and i.i.d. block streams."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from streamsw.errors import DomainError

SUM_TOL = 1e-12


@dataclass(frozen=True)
class JointPmf:
    """Joint pmf P_XY stored as an |X| x |Y| matrix (rows indexed by x)."""

    probs: np.ndarray
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2:
            raise DomainError("pmf must be a 2-D matrix")
        if p.shape[0] < 2 or p.shape[1] < 2:
            raise DomainError("alphabets must have at least two symbols")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise DomainError("pmf entries must be finite and non-negative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise DomainError(f"pmf sums to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def nx(self) -> int:
        return self.probs.shape[0]

    @property
    def ny(self) -> int:
        return self.probs.shape[1]

    @property
    def px(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def swapped(self) -> "JointPmf":
        """The same source with the roles of X and Y exchanged."""
        return JointPmf(self.probs.T.copy(), name=f"{self.name}[swap]")

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __eq__(self, other):
        if not isinstance(other, JointPmf):
            return NotImplemented
        return self.probs.shape == other.probs.shape and np.array_equal(self.probs, other.probs)


@dataclass(frozen=True)
class SourceStream:
    """Blocks (X_k, Y_k), k = 1..count, stored as arrays of shape (count, n)."""

    seed: int
    n: int
    x: np.ndarray
    y: np.ndarray

    @property
    def count(self) -> int:
        return self.x.shape[0]

    def block(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Block k using 1-based indexing."""
        if not 1 <= k <= self.count:
            raise DomainError(f"block index {k} outside [1, {self.count}]")
        return self.x[k - 1], self.y[k - 1]


def make_dsbs(p: float) -> JointPmf:
    if not 0.0 <= p <= 0.5:
        raise DomainError(f"DSBS crossover must lie in [0, 1/2], got {p}")
    d, o = (1 - p) / 2, p / 2
    return JointPmf(np.array([[d, o], [o, d]]), name=f"dsbs:p={p}")


def make_zchannel(delta: float) -> JointPmf:
    if not 0.0 < delta < 1.0:
        raise DomainError(f"Z-channel flip probability must lie in (0, 1), got {delta}")
    return JointPmf(np.array([[0.5, 0.0], [delta / 2, (1 - delta) / 2]]), name=f"zchannel:delta={delta}")


def make_asymmetric(p: float) -> JointPmf:
    # p = 1/4 is the uniform pmf and p = 0 is deterministic; both have a zero dispersion
    if not (0.0 < p < 1 / 3) or p == 0.25:
        raise DomainError(f"asymmetric source needs p in (0, 1/4) U (1/4, 1/3), got {p}")
    return JointPmf(np.array([[1 - 3 * p, p], [p, p]]), name=f"asym:p={p}")


def sample_blocks(pmf: JointPmf, n: int, count: int, seed: int) -> SourceStream:
    """Draw `count` i.i.d. blocks of length n by inverse-CDF sampling.

    Uses the counter-based Philox generator so a (seed, n, count) triple gives
    the same stream on every platform.
    """
    if n < 1 or count < 1:
        raise DomainError("n and count must be positive")
    rng = np.random.Generator(np.random.Philox(seed & (2**64 - 1)))
    cdf = np.cumsum(pmf.probs.ravel())
    u = rng.random(count * n)
    # guard against cdf[-1] falling a hair below 1
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    # never land on a zero-probability cell through the clamp above
    flat = pmf.probs.ravel()
    if flat[idx].min() == 0.0:
        last = np.flatnonzero(flat)[-1]
        idx = np.where(flat[idx] == 0.0, last, idx)
    x, y = np.divmod(idx, pmf.ny)
    return SourceStream(seed=seed, n=n,
                        x=x.reshape(count, n).astype(np.uint8),
                        y=y.reshape(count, n).astype(np.uint8))


def _read_custom(path: str) -> JointPmf:
    try:
        with open(Path(path), newline="") as fh:
            rows = [[float(v) for v in row if v.strip()] for row in csv.reader(
                line for line in fh if line.strip() and not line.lstrip().startswith("#"))]
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None
    except ValueError:
        raise DomainError(f"{path} holds a non-numeric entry") from None
    rows = [r for r in rows if r]
    if len(rows) == 1:
        flat = rows[0]
        side = int(round(len(flat) ** 0.5))
        if side * side != len(flat):
            raise DomainError("single-line custom pmf must have a square number of entries")
        mat = np.array(flat).reshape(side, side)
    else:
        if len({len(r) for r in rows}) != 1:
            raise DomainError("custom pmf rows have unequal lengths")
        mat = np.array(rows)
    return JointPmf(mat, name=f"custom:{path}")


def parse_source(desc: str) -> JointPmf:
    """Parse `dsbs:p=..`, `zchannel:delta=..`, `asym:p=..` or `custom:<csv>`."""
    kind, _, rest = desc.strip().partition(":")
    if kind == "custom":
        if not rest:
            raise DomainError("custom source needs a CSV path")
        return _read_custom(rest)
    makers = {"dsbs": ("p", make_dsbs), "zchannel": ("delta", make_zchannel), "asym": ("p", make_asymmetric)}
    if kind not in makers:
        raise DomainError(f"unknown source family {kind!r}")
    key, maker = makers[kind]
    name, _, value = rest.partition("=")
    if name.strip() != key or not value:
        raise DomainError(f"expected {kind}:{key}=<value>, got {desc!r}")
    try:
        param = float(value)
    except ValueError as exc:
        raise DomainError(f"bad number in {desc!r}") from exc
    return maker(param)
