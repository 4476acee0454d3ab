import math
from dataclasses import replace

import numpy as np
import pytest

from streamsw.errors import DomainError
from streamsw.simulator import CSV_COLUMNS, SimConfig, delay_sweep, rate_sweep, run, wilson

TINY = SimConfig(source="dsbs:p=0.05", n=2, psi=5, omega=2, T=2, blocks=4, trials=40, seed=3)
INJECTIVE = 2 ** (2 * 5)


def test_wilson_reference_values():
    lo, hi = wilson(5, 20)
    assert lo == pytest.approx(0.11186170140766569, abs=1e-12)
    assert hi == pytest.approx(0.468700877618744, abs=1e-12)
    assert wilson(0, 50)[0] == 0.0 and wilson(50, 50)[1] == 1.0
    lo, hi = wilson(3, 30)
    lo2, hi2 = wilson(27, 30)
    assert lo == pytest.approx(1 - hi2, abs=1e-12) and hi == pytest.approx(1 - lo2, abs=1e-12)


def test_injective_rates_are_error_free():
    rep = run(replace(TINY, N1=INJECTIVE, N2=INJECTIVE))
    assert rep.errors.tolist() == [0] * TINY.blocks
    assert rep.max_survivors == 1


def test_unit_bins_always_fail():
    rep = run(replace(TINY, blocks=2, N1=1, N2=1))
    assert rep.eps_hat.min() >= 0.99


def test_reports_are_reproducible():
    cfg = replace(TINY, N1=6, N2=6)
    a, b = run(cfg), run(cfg)
    assert a.errors.tolist() == b.errors.tolist()
    assert a.rows() == b.rows()


def test_parallel_matches_serial():
    cfg = replace(TINY, N1=6, N2=6, trials=12)
    assert run(cfg).errors.tolist() == run(replace(cfg, jobs=2)).errors.tolist()


def test_rows_layout():
    rep = run(replace(TINY, N1=8, N2=8, trials=10))
    rows = rep.rows()
    assert len(CSV_COLUMNS) == len(rows[0]) and [r[0] for r in rows] == [1, 2, 3, 4]
    for k, e, t, eps, lo, hi in rows:
        assert t == 10 and eps == e / t and lo <= eps <= hi


def test_rate_sweep_is_non_increasing():
    rows = rate_sweep(replace(TINY, trials=60), [(2, 2), (4, 4), (16, 16), (INJECTIVE, INJECTIVE)])
    for (_, _, e1, lo1, hi1), (_, _, e2, lo2, hi2) in zip(rows, rows[1:]):
        assert e2 <= e1 or lo2 <= hi1
    assert rows[-1][2] == 0.0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_rate_below_conditional_entropy_keeps_failing(n):
    # R_X = 0.1 < H(X|Y) = 0.199 gives a single bin on the X side; Y is injective
    N1 = round(math.exp(n * 0.1))
    cfg = SimConfig(source="dsbs:p=0.05", n=n, psi=5, omega=2, T=2, blocks=2, trials=200, seed=n,
                    N1=N1, N2=2 ** (n * 5))
    assert run(cfg).sup_eps >= 0.05


def test_longer_delay_does_not_hurt():
    better = 0
    for seed in range(5):
        cfg = replace(TINY, N1=5, N2=5, trials=60, seed=seed)
        one, two = run(replace(cfg, T=1)), run(cfg)
        if two.sup_eps <= one.intervals[one.sup_k - 1][1]:
            better += 1
    assert better >= 4


def test_delay_sweep_injective_is_zero():
    rows = delay_sweep(replace(TINY, trials=20, N1=INJECTIVE, N2=INJECTIVE), [1, 2])
    assert [r[1] for r in rows] == [0.0, 0.0]


def test_md_mode_bins_and_diagnostic():
    cfg = replace(TINY, n=3, blocks=2, trials=10, case="ii", theta1=1.0, theta2=0.0)
    N1, N2 = cfg.bins()
    assert N1 >= 1 and N2 >= 1
    rep = run(cfg)
    assert any("diagnostic only" in line for line in rep.header())
    if rep.sup_eps > 0:
        assert rep.nu_hat == pytest.approx(-math.log(rep.sup_eps) / (3 * 3 ** -0.6))


@pytest.mark.parametrize("cfg", [replace(TINY), replace(TINY, N1=0, N2=3), replace(TINY, N1=2, N2=2, trials=0),
                                 replace(TINY, N1=2, N2=2, psi=4)])
def test_invalid_configs(cfg):
    with pytest.raises(DomainError):
        run(cfg)


def test_large_alphabet_rejected(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text(",".join(["0.04"] * 25) + "\n")
    with pytest.raises(DomainError):
        run(replace(TINY, source=f"custom:{f}", N1=2, N2=2))


def test_errors_stay_integral():
    rep = run(replace(TINY, N1=3, N2=3, trials=8))
    assert rep.errors.dtype.kind == "i" and np.all(rep.errors <= 8)


def test_regression_constant():
    # rates 0.95 log 2 per side; counts pinned from the first run of this configuration
    N = round(math.exp(3 * 0.95 * math.log(2)))
    cfg = SimConfig(source="dsbs:p=0.05", n=3, psi=5, omega=2, T=2, blocks=6, trials=2000, seed=20261017,
                    N1=N, N2=N, jobs=1)
    rep = run(cfg)
    assert N == 7
    assert rep.errors.tolist() == [590, 741, 810, 842, 808, 873]
    assert 0 < rep.eps_hat.min() and rep.eps_hat.max() < 1
