# Python module: test_dos.py
import math

import numpy as np
import pytest
from scipy.linalg import eigvalsh_tridiagonal

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

from core.backend.codings.systems import CodingSystem, orbit_coding
from core.backend.dos.dos import (
    IdsSample,
    approximate_spectrum,
    coding_sampler,
    constant_sampler,
    eigenvalue_count,
    eigenvalue_counts,
    ids_curve,
    kotani_diagnostic,
    lyapunov_fraction,
    min_growth,
    poly_bounded_energy_set,
    singularity_indicator,
    thouless_check,
)
from core.backend.spectral.intervalsets import BandSet
from core.backend.spectral.periodic import Word, periodic_ids_curve
from core.backend.spectral.sl2core import EnergyGrid, PotentialWindow
from core.errors import DomainError, PreconditionError

GOLDEN = (math.sqrt(5) - 1) / 2


def test_eigenvalue_count_free_cases():
    zeros = np.zeros(5)
    assert eigenvalue_count(zeros, 2.0) == 5
    assert eigenvalue_count(zeros, 3.0) == 5
    assert eigenvalue_count(zeros, 0.0) == 2
    counts = eigenvalue_counts(zeros, np.linspace(-3, 3, 61))
    assert np.all(np.diff(counts) >= 0)
    with pytest.raises(DomainError):
        eigenvalue_count(np.zeros(0), 0.0)


def test_eigenvalue_counts_match_dense_solver():
    rng = np.random.default_rng(4)
    values = rng.choice([0.0, 3.0], size=300)
    eigs = eigvalsh_tridiagonal(values, np.ones(299))
    energies = np.linspace(-2.7, 5.7, 97)
    expected = np.searchsorted(eigs, energies, side="left")
    assert np.array_equal(eigenvalue_counts(values, energies), expected)


def test_free_ids_matches_closed_form():
    grid = EnergyGrid.from_count(-1.9, 1.9, 39)
    ids = ids_curve(constant_sampler(0.0), 2000, grid, phases=1)
    expected = np.arccos(-ids.energies / 2) / math.pi
    assert np.max(np.abs(ids.k - expected)) < 5e-3
    middle = int(np.argmin(np.abs(ids.energies)))
    assert ids.k[middle] == pytest.approx(0.5, abs=1e-3)


def test_ids_tails_and_monotonicity():
    ids = ids_curve(np.zeros(500), 500)
    assert ids.k[0] == 0.0
    assert ids.k[-1] == 1.0
    assert np.all(np.diff(ids.k) >= 0)


def test_ids_jumps_shrink_with_grid():
    coarse = ids_curve(np.zeros(2000), 2000, EnergyGrid.from_count(-2.5, 2.5, 101))
    fine = ids_curve(np.zeros(2000), 2000, EnergyGrid.from_count(-2.5, 2.5, 401))
    assert fine.max_jump < coarse.max_jump


def test_period_two_gap_plateau():
    N = 2000
    ids = ids_curve(Word((0.0, 1.0)), N, EnergyGrid.from_count(0.05, 0.95, 19))
    assert np.all(np.abs(ids.k - 0.5) <= 2 / N)


def test_counting_ids_matches_periodic_ids():
    N = 2000
    for w in (Word((0.0, 1.0)), Word((0.0, 3.0, 1.0))):
        grid = EnergyGrid.from_count(min(w.symbols) - 2.5, max(w.symbols) + 2.5, 141)
        ids = ids_curve(w, N, grid)
        exact = periodic_ids_curve(w, ids.energies)
        assert np.max(np.abs(ids.k - exact)) <= (len(w) + 2) / N


def test_thouless_cases():
    w = Word((0.0,))
    outside = EnergyGrid(3.0, 3.5, 0.5)
    assert thouless_check(w, outside) < 1e-2
    inside = EnergyGrid(-1.0, 1.0, 0.5)
    assert thouless_check(w, inside) < 1e-2
    errors = [thouless_check(w, EnergyGrid(3.0, 3.5, 0.5), N=N) for N in (250, 500, 1000)]
    assert errors[0] > errors[1] > errors[2]


def test_thouless_rejects_band_edges():
    with pytest.raises(PreconditionError):
        thouless_check(Word((0.0,)), EnergyGrid(1.0, 2.0, 0.5))


def test_lyapunov_fraction_periodic_control():
    grid = EnergyGrid(-3.0, 4.0, 0.01)
    assert lyapunov_fraction(Word((0.0, 1.0)), grid, 4000, 0.02) > 0.9


def test_kotani_rejects_periodic_codings():
    grid = EnergyGrid(-2.5, 5.5, 0.01)
    periodic = [
        Word((0.0, 1.0)),
        CodingSystem.sturmian(0.5, (0.0, 3.0)),
        CodingSystem.iet((1, 0), (0.5, 0.5), (0.0, 3.0)),
        CodingSystem.bernoulli((1.0, 0.0), (0.0, 3.0)),
    ]
    for potential in periodic:
        with pytest.raises(PreconditionError):
            kotani_diagnostic(potential, grid, [500, 1000], 0.02)


def test_kotani_random_potential():
    system = CodingSystem.bernoulli((0.5, 0.5), (0.0, 3.0))
    grid = EnergyGrid(-2.5, 5.5, 0.01)
    report = kotani_diagnostic(system, grid, [10**4], 0.02, seed=8)
    assert report.ns == (10**4,)
    assert report.fractions[0] < 0.1
    values = coding_sampler(system, seed=8)(0, 10**4)
    fractions = [lyapunov_fraction(values, grid, 10**4, delta) for delta in (0.01, 0.05, 0.2)]
    assert fractions[0] <= fractions[1] <= fractions[2]


def test_kotani_reports_trend_for_sturmian_coding():
    system = CodingSystem.sturmian(GOLDEN, (0.0, 3.0))
    report = kotani_diagnostic(system, EnergyGrid(-2.5, 5.5, 0.01), [2000, 500, 8000], 0.02, seed=3)
    assert report.ns == (500, 2000, 8000)
    assert len(report.fractions) == 3
    assert all(0.0 <= f <= 1.0 for f in report.fractions)
    assert report.shrinking == all(b <= a for a, b in zip(report.fractions, report.fractions[1:]))
    assert report.energies > 0
    assert report.rows()[0][0] == 500
    assert report.to_dict()["shrinking"] == report.shrinking


def test_poly_bounded_free_cases():
    window = PotentialWindow.centered(np.zeros(101))
    assert min_growth(window, 0.0, 50) <= 1.0 + 1e-12
    assert min_growth(window, 3.0, 50) > 4.0 * 51 * 10
    result = poly_bounded_energy_set(window, 50, 1.0, BandSet.interval(-0.01, 0.01), resolution=0.005)
    assert result.estimate.contains(0.0)
    with pytest.raises(PreconditionError):
        poly_bounded_energy_set(window, 50, 0.5, BandSet.interval(-0.01, 0.01))


def test_poly_bounded_set_nested():
    window = PotentialWindow.centered(3.0 * (np.random.default_rng(2).random(81) < 0.5))
    Lambda = BandSet.interval(-2.5, 5.5)
    small = poly_bounded_energy_set(window, 40, 2.0, Lambda, resolution=0.02)
    large = poly_bounded_energy_set(window, 40, 8.0, Lambda, resolution=0.02)
    assert np.all(large.members[small.members])
    assert small.measure <= large.measure
    assert (small.estimate - Lambda).is_empty
    shorter = poly_bounded_energy_set(window, 20, 2.0, Lambda, resolution=0.02)
    assert shorter.measure >= small.measure - 2 * 0.02


def test_poly_bounded_measure_decays_for_sturmian_coding():
    system = CodingSystem.sturmian(GOLDEN, (0.0, 3.0))
    values = orbit_coding(system, (0.2,), (-400, 401)).values
    window = PotentialWindow(tuple(values), 400)
    Lambda = approximate_spectrum(values, 5e-3)
    assert Lambda.measure() < 7.0
    sets = [poly_bounded_energy_set(window, N, 4.0, Lambda, resolution=5e-3) for N in (50, 100, 200, 400)]
    assert all((s.estimate - Lambda).is_empty for s in sets)
    measures = [s.measure for s in sets]
    assert all(b < a for a, b in zip(measures, measures[1:]))


def test_singularity_indicator_controls():
    energies = np.linspace(0.0, 1.0, 101)
    uniform = IdsSample(energies, energies.copy(), N=100, phases=1)
    assert singularity_indicator(uniform, 0.5) == pytest.approx(0.5, abs=0.011)
    atomic = IdsSample(energies, (energies >= 0.5).astype(float), N=100, phases=1)
    assert singularity_indicator(atomic, 0.9) == pytest.approx(0.0, abs=0.02)
    with pytest.raises(DomainError):
        singularity_indicator(uniform, 1.0)


def test_singularity_indicator_refines_for_sturmian_coding():
    sampler = coding_sampler(CodingSystem.sturmian(GOLDEN, (0.0, 3.0)), seed=1)
    values = []
    for points in (201, 401, 801, 1601):
        ids = ids_curve(sampler, 1000, EnergyGrid.from_count(-2.5, 5.5, points), phases=8)
        values.append(singularity_indicator(ids, 0.9))
    assert values[-1] < values[0]
