# Python module: test_sl2core.py
import math

import numpy as np
import pytest

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

from core.backend.spectral.sl2core import (
    Conjugacy,
    Direction,
    EnergyGrid,
    Mat2,
    PotentialWindow,
    classify,
    direction_derivative_signs,
    hyperbolicity_certificate,
    lyapunov_estimate,
    lyapunov_scan,
    most_contracted_direction,
    rotation_angle,
    schrodinger_step,
    stable_direction,
    transfer,
    two_sided_transfer,
    uniform_hyperbolicity_fit,
)
from core.backend.spectral.periodic import Word
from core.errors import ClassificationError, DomainError, IndexOutOfWindowError, UndefinedDirectionError

GOLDEN_LOG = math.log((3 + math.sqrt(5)) / 2)


def random_sl2(rng, scale: float) -> Mat2:
    """R_phi diag(scale, 1/scale) R_psi for random angles."""
    phi, psi = rng.uniform(0, 1, size=2)
    return Mat2.rotation(phi) @ Mat2.diag(scale, 1.0 / scale) @ Mat2.rotation(psi)


def test_schrodinger_step_entries():
    assert schrodinger_step(0.0, 0.0) == Mat2(0.0, -1.0, 1.0, 0.0)
    assert schrodinger_step(3.0, 1.0) == Mat2(2.0, -1.0, 1.0, 0.0)


def test_schrodinger_step_unit_determinant():
    rng = np.random.default_rng(1)
    for E, v in rng.normal(size=(1000, 2)) * 10:
        assert schrodinger_step(E, v).det == 1.0


def test_transfer_small_words():
    assert transfer([0.0, 0.0], 0.0).allclose(Mat2(-1.0, 0.0, 0.0, -1.0))
    assert transfer([0.0, 1.0], 0.0).trace == pytest.approx(-2.0)
    rng = np.random.default_rng(2)
    for a, E in rng.normal(size=(50, 2)):
        assert transfer([a], E).trace == pytest.approx(E - a)


def test_transfer_empty_word():
    with pytest.raises(DomainError):
        transfer([], 0.0)


def test_transfer_cocycle_composition():
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = list(rng.choice([0.0, 1.0], size=7))
        w = list(rng.choice([0.0, 1.0], size=5))
        E = float(rng.uniform(-3, 3))
        assert transfer(v + w, E).allclose(transfer(w, E) @ transfer(v, E), atol=1e-8)


def test_long_product_keeps_unit_determinant():
    w = Word((0.0, 1.0)) ** 5000
    assert abs(transfer(w, -1.0).det - 1.0) <= 1e-9


def test_two_sided_transfer_definition():
    rng = np.random.default_rng(4)
    window = PotentialWindow.centered(rng.uniform(-1, 1, size=10))
    E = 0.7
    assert two_sided_transfer(window, E, 0) == Mat2.identity()
    assert two_sided_transfer(window, E, 1).allclose(schrodinger_step(E, window[0]))
    back = two_sided_transfer(window, E, -1) @ schrodinger_step(E, window[-1])
    assert back.allclose(Mat2.identity())
    deep = two_sided_transfer(window, E, -5) @ transfer([window[i] for i in range(-5, 0)], E)
    assert deep.allclose(Mat2.identity(), atol=1e-8)


def test_two_sided_transfer_outside_window():
    window = PotentialWindow.centered([0.0] * 6)
    two_sided_transfer(window, 0.1, 3)
    two_sided_transfer(window, 0.1, -3)
    with pytest.raises(IndexOutOfWindowError):
        two_sided_transfer(window, 0.1, 4)
    with pytest.raises(IndexOutOfWindowError):
        two_sided_transfer(window, 0.1, -4)


def test_classify_cases():
    assert classify(Mat2(0.0, -1.0, 1.0, 0.0)) is Conjugacy.ELLIPTIC
    assert classify(Mat2.identity()) is Conjugacy.PARABOLIC
    assert classify(Mat2.diag(2.0, 0.5)) is Conjugacy.HYPERBOLIC


def test_classify_conjugation_invariant():
    rng = np.random.default_rng(5)
    samples = [Mat2.diag(2.0, 0.5), Mat2.rotation(0.13), Mat2(1.0, 1.0, 0.0, 1.0), Mat2.diag(-3.0, -1 / 3)]
    for A in samples:
        for _ in range(20):
            P = random_sl2(rng, float(rng.uniform(1, 3)))
            assert classify(P @ A @ P.inverse()) is classify(A)


def test_most_contracted_direction_axis_aligned():
    assert most_contracted_direction(Mat2.diag(2.0, 0.5)).angle == pytest.approx(math.pi / 2)
    for phi in (0.1, 0.37, 0.8):
        rotated = Mat2.rotation(phi) @ Mat2.diag(2.0, 0.5)
        assert most_contracted_direction(rotated).angle == pytest.approx(math.pi / 2)


def test_most_contracted_direction_grid_oracle():
    rng = np.random.default_rng(6)
    angles = np.linspace(0, math.pi, 200001)
    for _ in range(10):
        A = random_sl2(rng, float(rng.uniform(1.5, 20)))
        arr = A.as_array()
        lengths = np.linalg.norm(arr @ np.vstack([np.cos(angles), np.sin(angles)]), axis=0)
        best = Direction(float(angles[np.argmin(lengths)]))
        assert most_contracted_direction(A).distance(best) < 1e-4


def test_most_contracted_direction_undefined_for_rotation():
    with pytest.raises(UndefinedDirectionError):
        most_contracted_direction(Mat2.rotation(0.2))


def test_stable_direction_cases():
    assert stable_direction(Mat2.diag(2.0, 0.5)).angle == pytest.approx(math.pi / 2)
    rng = np.random.default_rng(7)
    for _ in range(20):
        P = random_sl2(rng, float(rng.uniform(1, 4)))
        A = P @ Mat2.diag(2.0, 0.5) @ P.inverse()
        x, y = P.apply((0.0, 1.0))
        assert stable_direction(A).distance(Direction(math.atan2(y, x))) < 1e-9


def test_stable_direction_rejects_elliptic():
    with pytest.raises(ClassificationError):
        stable_direction(Mat2.rotation(0.1))


def test_stable_close_to_most_contracted_for_large_norm():
    rng = np.random.default_rng(8)
    checked = 0
    while checked < 30:
        A = random_sl2(rng, float(rng.uniform(200, 5000)))
        if abs(A.trace) < 0.5 * A.norm:
            continue
        checked += 1
        gap = stable_direction(A).distance(most_contracted_direction(A))
        assert gap < 10.0 / A.norm**2
        if A.norm > 1e3:
            assert gap < 1e-4


def test_hyperbolicity_certificate_implies_hyperbolic():
    rng = np.random.default_rng(9)
    certified = 0
    for _ in range(500):
        A = random_sl2(rng, float(rng.uniform(1e3, 1e4)))
        if hyperbolicity_certificate(A, delta=0.5):
            certified += 1
            assert classify(A) is Conjugacy.HYPERBOLIC
    assert certified > 0


def test_rotation_angle_cases():
    assert rotation_angle(Mat2(0.0, -1.0, 1.0, 0.0)) == pytest.approx(0.25)
    trace_point_one = 2 * math.cos(2 * math.pi * 0.1)
    assert rotation_angle(Mat2(trace_point_one, -1.0, 1.0, 0.0)) == pytest.approx(0.1)
    assert rotation_angle(Mat2.rotation(0.1)) == pytest.approx(0.1)
    with pytest.raises(ClassificationError):
        rotation_angle(Mat2.diag(2.0, 0.5))


def test_direction_signs_constant_potential():
    window = PotentialWindow.periodic([0.0], 3)
    report = direction_derivative_signs(window, EnergyGrid(2.5, 4.0, 0.01), 3, 3)
    assert report.passed
    assert len(report.energies) == EnergyGrid(2.5, 4.0, 0.01).size
    assert report.sign_changes == 0


def test_single_step_stable_direction_increases():
    energies = np.linspace(2.2, 6.0, 100)
    angles = [stable_direction(schrodinger_step(E, 0.0)).angle for E in energies]
    assert np.all(np.diff(angles) > 0)


def test_direction_signs_random_words():
    rng = np.random.default_rng(10)
    grid = EnergyGrid.from_count(5.5, 8.0, 2000)
    for _ in range(20):
        length = int(rng.integers(1, 21))
        word = list(rng.choice([0.0, 3.0], size=length))
        window = PotentialWindow.periodic(word, length)
        report = direction_derivative_signs(window, grid, length, length)
        assert not report.forward_violations
        assert not report.backward_violations
        assert report.sign_changes <= report.bound


def test_symmetric_window_mirrors_directions():
    # V(n) = V(-1 - n) gives A_-k = S A_k S with S the coordinate swap.
    window = PotentialWindow.centered([0.0, 3.0, 1.0, 1.0, 3.0, 0.0])
    for E in (5.5, 6.0, 7.25):
        for k in (1, 2, 3):
            forward = stable_direction(two_sided_transfer(window, E, k))
            backward = stable_direction(two_sided_transfer(window, E, -k))
            assert backward.distance(Direction(math.pi / 2 - forward.angle)) < 1e-9


def test_lyapunov_free_cases():
    zeros = np.zeros(10000)
    assert lyapunov_estimate(zeros, 0.0, 10000) < 1e-3
    assert lyapunov_estimate(zeros, 3.0, 10000) == pytest.approx(GOLDEN_LOG, abs=1e-3)


def test_lyapunov_positive_for_random_potential():
    for seed in range(3):
        rng = np.random.default_rng(seed)
        values = rng.choice([0.0, 3.0], size=100000)
        assert lyapunov_estimate(values, 0.0, 100000) > 0.05


def test_lyapunov_accepts_callable_and_scan():
    estimate = lyapunov_estimate(lambda i: 0.0, 3.0, 500)
    scan = lyapunov_scan(np.zeros(500), np.array([0.0, 3.0]), 500)
    assert scan[1] == pytest.approx(estimate)
    assert scan[0] < 1e-2


def test_uniform_hyperbolicity_outside_spectrum():
    fit = uniform_hyperbolicity_fit([0.0], 3.0, j_max=20)
    assert fit.c > 0
    assert fit.lam == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-6)


def test_energy_grid_points():
    grid = EnergyGrid(0.0, 1.0, 0.25)
    assert np.allclose(grid.points(), [0.0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(DomainError):
        EnergyGrid(1.0, 0.0, 0.1)
