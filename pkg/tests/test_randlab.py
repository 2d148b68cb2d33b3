from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from natbound.randlab import (
    Box,
    ConfigError,
    Formula,
    PerturbationLaw,
    RandomSeriesConfig,
    Realization,
    boundary_scan,
    critical_line_preset,
    divisor_in_box,
    monte_carlo,
    sample_realization,
)

CONFIG = critical_line_preset(50)
SIGNS = PerturbationLaw("discrete", (Fraction(-1), Fraction(1)), (0.5, 0.5))


def test_formula():
    f = Formula("(1 - nu)/2")
    assert f(3) == -1 and f(2) == Fraction(-1, 2)
    assert Formula("nu^2 - 3")(2) == 1 and Formula("nu**2 - 3")(2) == 1
    for bad in ("nu.real", "__import__('os')", "2^(1/2)", "1 +", "x"):
        with pytest.raises(ConfigError):
            Formula(bad)(2)
    with pytest.raises(ConfigError):
        Formula("1/(nu - 2)")(2)


def test_config_validation():
    # sup of (nu - 1)/(2 nu) over (V/2, V] is attained at nu = V
    assert CONFIG.sigma_h == Fraction(49, 100) and CONFIG.sigma == Fraction(1, 2)
    with pytest.raises(ConfigError):
        RandomSeriesConfig(Formula("nu - 3"), Formula("0"), Formula("0"), SIGNS, 5)
    with pytest.raises(ConfigError):
        RandomSeriesConfig(Formula("nu"), Formula("0"), Formula("0"), SIGNS, 10, Fraction(1, 2))
    with pytest.raises(ConfigError):
        PerturbationLaw("discrete", (Fraction(1),), (1.0,))
    with pytest.raises(ConfigError):
        PerturbationLaw("uniform", low=1.0, high=0.0)
    with pytest.raises(ConfigError):
        RandomSeriesConfig.from_json({"V": 3})


def test_config_json_round_trip():
    again = RandomSeriesConfig.from_json(CONFIG.to_json())
    assert again == CONFIG


def test_seed_determinism():
    assert sample_realization(CONFIG, 7) == sample_realization(CONFIG, 7)
    assert sample_realization(CONFIG, 7) != sample_realization(CONFIG, 8)


def test_points_at_predicted_locations(zeros_1210):
    real = sample_realization(CONFIG, 3)
    for t in (5.0, 12.0, 20.0):
        box = Box(0.4, 0.6, t - 0.1, t + 0.1)
        d = divisor_in_box(real, box, zeros_1210)
        assert d.merged_weight_sum == d.raw_weight_sum
        g = zeros_1210.array()
        for p in d.points:
            assert p.kind == "zero-image"
            for nu in p.sources:
                a, b = real.factors[nu - 1]
                # g = a Im s; the predicted location is ((1/2 + i g) - b)/a
                gi = g[abs(g - float(a) * p.location.imag).argmin()]
                pred = (complex(0.5, gi) - float(b)) / float(a)
                assert abs(p.location - pred) < 1e-9


@pytest.fixture(scope="module")
def zeros_900(cache_root):
    from natbound.cache import get_zero_table

    return get_zero_table(900.0, cache_root)


@given(seed=st.integers(0, 10_000), t=st.floats(3.0, 15.0))
def test_conjugate_box_symmetry(zeros_900, seed, t):
    zeros = zeros_900
    real = sample_realization(critical_line_preset(40), seed)
    box = Box(0.4, 0.6, t - 0.1, t + 0.1)
    up = divisor_in_box(real, box, zeros)
    down = divisor_in_box(real, box.reflected(), zeros)
    key = lambda p: (round(p.location.real, 9), round(abs(p.location.imag), 9))
    assert sorted((key(p), p.weight) for p in up.points) == sorted((key(p), p.weight) for p in down.points)


def test_merging_equal_factors(zeros_200):
    # two copies of zeta(s) with weights 1 and -1 cancel exactly at every zero
    law = PerturbationLaw("uniform", low=0.0, high=1.0)
    cfg = RandomSeriesConfig(Formula("1"), Formula("0"), Formula("0"), law, 2)
    real = Realization(cfg, 0, ((Fraction(1), Fraction(0)),) * 2, (Fraction(1), Fraction(-1)))
    d = divisor_in_box(real, Box(0.4, 0.6, 14.0, 14.3), zeros_200)
    assert len(d.points) == 1 and d.points[0].weight == 0 and not d.live_points
    assert d.points[0].sources == (1, 2)


def test_pole_and_trivial_zeros(zeros_200):
    law = PerturbationLaw("uniform", low=0.0, high=1.0)
    cfg = RandomSeriesConfig(Formula("1"), Formula("0"), Formula("0"), law, 1)
    real = Realization(cfg, 0, ((Fraction(1), Fraction(0)),), (Fraction(2),))
    d = divisor_in_box(real, Box(-4.5, 1.5, -1.0, 1.0), zeros_200)
    got = {(p.location.real, p.kind, p.weight) for p in d.points}
    assert got == {(1.0, "pole", -2), (-2.0, "trivial-zero", 2), (-4.0, "trivial-zero", 2)}


def test_insufficient_zero_coverage(zeros_200):
    real = sample_realization(CONFIG, 0)
    with pytest.raises(ValueError):
        divisor_in_box(real, Box(0.4, 0.6, 19.9, 20.1), zeros_200)


def test_scan_and_monte_carlo(zeros_1210):
    scan = boundary_scan(sample_realization(CONFIG, 1), 10, range(5, 21), zeros_1210)
    assert scan.hit_fraction == 1.0 and scan.weights_conserved
    mc = monte_carlo(CONFIG, range(3), 10, [5.0, 10.0], zeros_1210)
    assert mc.to_json()["weights_conserved"]
    assert any("vanishing-atom" in n for n in mc.notes)
    par = monte_carlo(CONFIG, range(3), 10, [5.0, 10.0], zeros_1210, jobs=2)
    assert par.to_json() == mc.to_json() and par.to_csv() == mc.to_csv()
