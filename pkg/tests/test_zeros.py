import mpmath
import numpy as np
import pytest

from natbound.zeros import (
    ZeroTable,
    argument_principle_count,
    backlund_gap_check,
    counting_report,
    locate_zeros,
    riemann_von_mangoldt,
    zero_count,
)


def test_first_zeros(zeros_200):
    g = zeros_200.array()
    assert 14.1347 <= g[0] <= 14.1348
    assert abs(g[1] - 21.022040) < 1e-6 and abs(g[2] - 25.010858) < 1e-6
    for k in (1, 2, 10, 79):
        assert abs(g[k - 1] - float(mpmath.zetazero(k).imag)) < 1e-11


def test_counts(zeros_200):
    assert zero_count(zeros_200, 10) == 0
    assert zero_count(zeros_200, 15) == 1
    assert zero_count(zeros_200, 100) == 29
    assert argument_principle_count(100.0) == 29


def test_table_is_certified(zeros_200):
    assert zeros_200.certified_at
    for T, n in zeros_200.certified_at:
        if T <= zeros_200.t_max:
            assert zero_count(zeros_200, T) == n
    # the last certification height lies past t_max, so no zero near the top is missed
    assert zeros_200.certified_at[-1][0] > zeros_200.t_max


def test_coverage_errors(zeros_200):
    with pytest.raises(ValueError):
        zero_count(zeros_200, 250)
    with pytest.raises(ValueError):
        backlund_gap_check(zeros_200, 196)
    with pytest.raises(ValueError):
        locate_zeros(6000)


def test_table_invariants():
    with pytest.raises(ValueError):
        ZeroTable((14.1, 14.0), 20.0)
    with pytest.raises(ValueError):
        ZeroTable((14.1,), 20.0).first(2)


def test_jobs_do_not_change_results():
    assert locate_zeros(120.0, jobs=1).ordinates == locate_zeros(120.0, jobs=3).ordinates


def test_gaps_and_main_term(zeros_1210):
    rep = counting_report(zeros_1210, 1000, 1200)
    assert rep.gaps_ok and rep.gap_range == (1000, 1200)
    assert max(abs(d) for d in rep.deviations) <= 2
    assert rep.backlund_ratio_max < 0.7


def test_riemann_von_mangoldt_monotone():
    T = np.linspace(20, 1000, 50)
    assert np.all(np.diff(riemann_von_mangoldt(T)) > 0)
