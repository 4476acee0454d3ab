"""Entropies, conditional entropies and varentropies (natural logs)."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from streamsw.errors import DomainError
from streamsw.source_model import JointPmf

DISPERSION_EPS = 1e-12


@dataclass(frozen=True)
class SourceProfile:
    H_joint: float
    H_x_given_y: float
    H_y_given_x: float
    H_x: float
    H_y: float
    V_joint: float
    V_x_given_y: float
    V_y_given_x: float
    V_x: float = 0.0
    V_y: float = 0.0

    def as_rows(self) -> list[tuple[str, float]]:
        return list(asdict(self).items())

    def swapped(self) -> "SourceProfile":
        return SourceProfile(
            H_joint=self.H_joint, H_x_given_y=self.H_y_given_x, H_y_given_x=self.H_x_given_y,
            H_x=self.H_y, H_y=self.H_x, V_joint=self.V_joint, V_x_given_y=self.V_y_given_x,
            V_y_given_x=self.V_x_given_y, V_x=self.V_y, V_y=self.V_x)

    @property
    def mutual_information(self) -> float:
        return self.H_x - self.H_x_given_y


def _mean_var(weights: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    # weights sum to one; sums run over the support only
    mean = float(np.sum(weights * values))
    var = float(np.sum(weights * (values - mean) ** 2))
    return mean, var


def _self_info(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = p > 0
    return p[mask], -np.log(p[mask])


def profile(pmf: JointPmf) -> SourceProfile:
    p = pmf.probs
    px, py = pmf.px, pmf.py
    w, info = _self_info(p)
    h_joint, v_joint = _mean_var(w, info)

    support = p > 0
    # -log P(x|y) and -log P(y|x) on the support
    cond_xy = -np.log(p[support] / np.broadcast_to(py, p.shape)[support])
    cond_yx = -np.log(p[support] / np.broadcast_to(px[:, None], p.shape)[support])
    h_xgy, v_xgy = _mean_var(w, cond_xy)
    h_ygx, v_ygx = _mean_var(w, cond_yx)

    h_x, v_x = _mean_var(*_self_info(px))
    h_y, v_y = _mean_var(*_self_info(py))
    return SourceProfile(H_joint=h_joint, H_x_given_y=h_xgy, H_y_given_x=h_ygx, H_x=h_x, H_y=h_y,
                         V_joint=v_joint, V_x_given_y=v_xgy, V_y_given_x=v_ygx, V_x=v_x, V_y=v_y)


def check_positive_dispersions(prof: SourceProfile, eps: float = DISPERSION_EPS) -> bool:
    return prof.V_joint > eps and prof.V_x_given_y > eps and prof.V_y_given_x > eps


def entropy_from_counts(counts) -> float:
    """Entropy of the type with the given (integer) cell counts."""
    c = np.asarray(counts, dtype=float).ravel()
    c = np.sort(c[c > 0])
    total = c.sum()
    if total == 0:
        return 0.0
    return max(float(np.log(total) - np.sum(c * np.log(c)) / total), 0.0)


def empirical_entropy(x_block, y_block) -> tuple[float, float]:
    """(joint empirical entropy, conditional empirical entropy of x given y)."""
    x = np.asarray(x_block, dtype=np.int64).ravel()
    y = np.asarray(y_block, dtype=np.int64).ravel()
    if x.size != y.size or x.size == 0:
        raise DomainError("blocks must be non-empty and of equal length")
    ny = int(y.max()) + 1
    joint = np.bincount(x * ny + y)
    h_joint = entropy_from_counts(joint)
    h_y = entropy_from_counts(np.bincount(y))
    return h_joint, max(h_joint - h_y, 0.0)
