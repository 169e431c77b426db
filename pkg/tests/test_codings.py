# Python module: test_codings.py
import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

from core.backend.codings.complexity import (
    complexity,
    complexity_bound_check,
    complexity_counts,
    complexity_mass_profile,
    transitivity_profile,
)
from core.backend.codings.diagnostics import (
    FourierPolynomial,
    birkhoff_deviation,
    dense_hitting_time,
    diophantine_margin,
)
from core.backend.codings.systems import (
    CodingSystem,
    Rectangle,
    cylinder_measures,
    grid_rectangles,
    iet_map,
    iet_pushforward_ks,
    orbit_coding,
    sample_codings,
    sample_phases,
    skew_cylinder_polygons,
)
from core.errors import BudgetError, DomainError

GOLDEN = (math.sqrt(5) - 1) / 2


@pytest.fixture(scope="module")
def sturmian():
    return CodingSystem.sturmian(GOLDEN)


@pytest.fixture(scope="module")
def skew():
    return CodingSystem.skew(GOLDEN, grid_rectangles((2, 2)), (0, 1, 2, 3))


def constant_system():
    return CodingSystem.torus((GOLDEN,), [Rectangle((0.0,), (1.0,))], (0.0,), allow_constant=True)


def random_iet(r, seed):
    return CodingSystem.random_iet(tuple(range(r - 1, -1, -1)), np.random.default_rng(seed))


def test_system_validation():
    with pytest.raises(DomainError):
        CodingSystem.torus((GOLDEN,), [Rectangle((0.0,), (1.0,))], (0.0,))
    with pytest.raises(DomainError):
        CodingSystem.torus((GOLDEN,), [Rectangle((0.0,), (0.5,))], (0.0,))
    with pytest.raises(DomainError):
        CodingSystem.torus((GOLDEN,), [Rectangle((0.0,), (0.6,)), Rectangle((0.4,), (1.0,))], (0, 1))
    with pytest.raises(DomainError):
        CodingSystem.iet((0, 1, 2), (0.2, 0.3, 0.5))
    with pytest.raises(DomainError):
        CodingSystem.iet((1, 0), (0.2, 0.3))
    with pytest.raises(DomainError):
        Rectangle((0.5,), (0.5,))


def test_constant_coding():
    coding = orbit_coding(constant_system(), (0.3,), (0, 50))
    assert np.all(coding.symbols == 0)
    assert complexity(coding, 5) == 1


def test_sturmian_coding_matches_fibonacci_word(sturmian):
    getcontext().prec = 50
    alpha = (Decimal(5).sqrt() - 1) / 2
    expected = [int(((n + 1) * alpha).__floor__() - (n * alpha).__floor__()) for n in range(500)]
    coding = orbit_coding(sturmian, 0.0, (0, 500))
    assert coding.values.tolist() == expected


def test_two_interval_exchange_is_a_rotation():
    lengths = (1 - 1 / math.sqrt(2), 1 / math.sqrt(2))
    iet = CodingSystem.iet((1, 0), lengths)
    rotation = CodingSystem.torus((lengths[1],), [Rectangle((0.0,), (lengths[0],)), Rectangle((lengths[0],), (1.0,))], (0, 1))
    x0 = 0.1234
    assert np.array_equal(orbit_coding(iet, x0, (0, 300)).symbols, orbit_coding(rotation, (x0,), (0, 300)).symbols)


def test_iet_translations():
    iet = CodingSystem.iet((2, 1, 0), (0.5, 0.1, 0.4))
    assert np.allclose(iet.translations(), [0.5, -0.1, -0.6])
    x = np.array([0.0, 0.25, 0.55, 0.7])
    assert np.allclose(iet_map(iet, x), [0.5, 0.75, 0.45, 0.1])


def test_iet_permutation_gives_position_after_exchange():
    iet = CodingSystem.iet((1, 2, 0), (0.5, 0.3, 0.2))
    assert np.allclose(iet.range_singularities(), [0.0, 0.2, 0.7, 1.0])
    assert np.allclose(iet.translations(), [0.2, 0.2, -0.8])
    assert np.allclose(iet_map(iet, np.array([0.1, 0.6, 0.9])), [0.3, 0.8, 0.1])


@pytest.mark.parametrize("variant", ["torus", "skew", "iet"])
def test_coding_commutes_with_dynamics(variant, sturmian, skew):
    system = {"torus": sturmian, "skew": skew, "iet": random_iet(3, 5)}[variant]
    x0 = {"torus": (0.123,), "skew": (0.123, 0.456), "iet": 0.123}[variant]
    shifted = orbit_coding(system, system.step(x0), (0, 100)).symbols
    assert np.array_equal(shifted, orbit_coding(system, x0, (1, 101)).symbols)


@pytest.mark.parametrize("variant", ["skew", "iet"])
def test_two_sided_orbit_ranges(variant, skew):
    system = {"skew": skew, "iet": random_iet(4, 6)}[variant]
    x0 = (0.321, 0.654) if variant == "skew" else 0.321
    both = orbit_coding(system, x0, (-20, 20)).symbols
    assert both.size == 40
    assert np.array_equal(both[20:], orbit_coding(system, x0, (0, 20)).symbols)


def test_complexity_cases(sturmian):
    assert complexity(np.zeros(200, dtype=int), 7) == 1
    sample = orbit_coding(sturmian, (0.1,), (0, 2000))
    assert complexity(sample, 10) == 11
    assert complexity_counts(sample, [1, 2, 3]).tolist() == [2, 3, 4]


def test_iet_complexity_small_case():
    codings = sample_codings(random_iet(3, 1), sample_phases(random_iet(3, 1), 2000, np.random.default_rng(0)), 100)
    assert complexity(codings, 5) == 11


def test_sturmian_complexity_profile(sturmian):
    profile = complexity_bound_check(sturmian, range(1, 51), 2 * 10**5)
    assert list(profile.counts) == [n + 1 for n in range(1, 51)]
    assert profile.constant <= 2.0
    assert profile.monotone


@pytest.mark.parametrize("r", [3, 4])
def test_iet_complexity_is_affine(r):
    profile = complexity_bound_check(random_iet(r, 10 + r), range(1, 31), 10**6)
    assert profile.affine == (r - 1, 1)
    assert profile.affine_exact
    assert list(profile.counts) == [(r - 1) * n + 1 for n in range(1, 31)]


def test_skew_complexity_cubic_bound(skew):
    profile = complexity_bound_check(skew, range(5, 41), 2 * 10**5)
    fitted = max(p / n**3 for n, p in zip(profile.ns, profile.counts) if n <= 10)
    assert all(p <= fitted * n**3 + 1e-9 for n, p in zip(profile.ns, profile.counts))
    assert profile.exponent == 3.0
    assert profile.monotone


def test_complexity_growth_and_subadditivity(sturmian, skew):
    for system in (sturmian, skew, random_iet(4, 2)):
        codings = sample_codings(system, sample_phases(system, 200, np.random.default_rng(1)), 200)
        p = {n: complexity(codings, n) for n in range(1, 13)}
        alphabet = len(system.alphabet)
        for m in range(1, 7):
            for n in range(1, 7):
                assert p[m + n] <= p[m] * p[n]
        for n in range(1, 12):
            assert p[n] <= p[n + 1] <= alphabet * p[n]


def test_bernoulli_has_no_polynomial_bound():
    with pytest.raises(DomainError):
        complexity_bound_check(CodingSystem.bernoulli((0.5, 0.5)), range(1, 4), 1000)


def test_transitivity_cases(sturmian):
    coin = CodingSystem.bernoulli((0.5, 0.5))
    assert transitivity_profile(coin, 3, 64, 0).delta == pytest.approx(1.0)
    assert transitivity_profile(constant_system(), 4, 10, 1).delta == pytest.approx(1.0)
    profile = transitivity_profile(sturmian, 10, 1.0, 2)
    assert profile.window == 100
    assert profile.delta > 0.5
    assert profile.method == "geometric"


def test_transitivity_refuses_large_windows(sturmian):
    with pytest.raises(BudgetError) as info:
        transitivity_profile(sturmian, 50, 10.0, 4, max_window=10**5)
    assert info.value.details["required"] == 10 * 50**4


def test_complexity_mass_cases(sturmian):
    assert complexity_mass_profile(constant_system(), 4, 0.1) == 1
    assert complexity_mass_profile(sturmian, 5, 0.1) <= 12
    assert complexity_mass_profile(CodingSystem.bernoulli((0.5, 0.5)), 3, 0.5) >= 2**6


def test_torus_cylinders_match_orbit_frequencies():
    system = CodingSystem.torus((math.sqrt(2) - 1, math.sqrt(3) - 1), grid_rectangles((2, 2)), (0, 1, 1, 0))
    geometric = cylinder_measures(system, 3)
    empirical = cylinder_measures(system, 3, method="birkhoff", samples=2 * 10**5)
    assert geometric.method == "geometric" and empirical.method == "birkhoff"
    assert geometric.total == pytest.approx(1.0)
    assert set(geometric.measures) == set(empirical.measures)
    for word, mass in geometric.measures.items():
        assert empirical.measures[word] == pytest.approx(mass, abs=1e-2)


def test_interval_cylinders(sturmian):
    measures = cylinder_measures(sturmian, 8)
    assert len(measures.measures) == 9
    assert measures.total == pytest.approx(1.0)
    iet = random_iet(4, 3)
    measures = cylinder_measures(iet, 6)
    assert len(measures.measures) == 3 * 6 + 1
    assert measures.total == pytest.approx(1.0)


def _is_convex(poly):
    edges = np.roll(poly, -1, axis=0) - poly
    cross = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(edges[:, 0], -1)
    return np.all(cross >= -1e-12) or np.all(cross <= 1e-12)


def test_skew_cylinders_are_convex_polygons(skew):
    measures = cylinder_measures(skew, 3)
    assert measures.method == "geometric"
    assert measures.total == pytest.approx(1.0, abs=1e-9)
    for word in measures.measures:
        rect = skew.rectangles[word[0]]
        for poly in skew_cylinder_polygons(skew, word):
            assert _is_convex(poly)
            assert np.all(poly >= np.array(rect.lo) - 1e-12)
            assert np.all(poly <= np.array(rect.hi) + 1e-12)


def test_iet_preserves_lebesgue():
    assert iet_pushforward_ks(random_iet(4, 7), 10**6, np.random.default_rng(3)) < 0.01


def test_diophantine_margin():
    assert diophantine_margin(GOLDEN, 1.0, 10**4) > 0.2
    assert diophantine_margin(0.5, 1.0, 10) == pytest.approx(0.0, abs=1e-15)
    margins = [diophantine_margin(math.sqrt(2) - 1, 1.0, K) for K in (10, 100, 1000)]
    assert margins[0] >= margins[1] >= margins[2] > 0
    assert diophantine_margin((math.sqrt(2) - 1, math.sqrt(3) - 1), 2.0, 20) > 0


def test_dense_hitting_times(sturmian):
    assert dense_hitting_time(sturmian, 0.5).max_times[0] <= 4
    report = dense_hitting_time(sturmian, [0.01, 0.02, 0.04, 0.08])
    assert all(b <= a for a, b in zip(report.max_times, report.max_times[1:]))
    fit = dense_hitting_time(sturmian, np.geomspace(1e-3, 1e-1, 5))
    assert fit.exponent == pytest.approx(1.0, abs=0.25)


def test_dense_hitting_budget(sturmian):
    with pytest.raises(BudgetError):
        dense_hitting_time(sturmian, 1e-4, budget=100)


def test_birkhoff_deviations(skew):
    Ns = [1000, 10000, 100000]
    flat = birkhoff_deviation(skew, FourierPolynomial.constant(2.0), Ns)
    assert flat.deviations == (0.0, 0.0, 0.0)

    cos_x = FourierPolynomial.from_terms([{"k": [1, 0], "cos": 1.0}])
    bound = 1.0 / abs(math.sin(math.pi * GOLDEN))
    assert max(birkhoff_deviation(skew, cos_x, Ns).deviations) <= bound + 1e-6

    cos_y = FourierPolynomial.from_terms([{"k": [0, 1], "cos": 1.0}])
    report = birkhoff_deviation(skew, cos_y, Ns)
    assert report.mean_ratios[-1] < report.mean_ratios[0]
    assert report.mean_ratios[-1] < 0.05


def test_fourier_polynomial():
    f = FourierPolynomial.from_terms([{"k": [0, 0], "cos": 0.5}, {"k": [1, 2], "sin": 2.0}])
    assert f.mean == 0.5
    assert f(0.0, 0.0) == pytest.approx(0.5)
    assert f(0.125, 0.0) == pytest.approx(0.5 + 2.0 * math.sin(math.pi / 4))
