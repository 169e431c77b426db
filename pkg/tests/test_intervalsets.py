# Python module: test_intervalsets.py
import itertools

import numpy as np
import pytest

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

from core.backend.spectral.intervalsets import (
    MERGE_TOL,
    BandSet,
    difference,
    hausdorff_distance,
    intersect,
    measure,
    normalize,
    union,
)
from core.errors import DomainError


def random_bandset(rng, count: int = 5) -> BandSet:
    starts = rng.uniform(0, 10, size=count)
    return normalize([(s, s + w) for s, w in zip(starts, rng.uniform(0.01, 1.5, size=count))])


@pytest.fixture(scope="module")
def random_sets():
    rng = np.random.default_rng(11)
    return [random_bandset(rng, int(rng.integers(1, 8))) for _ in range(30)]


def test_normalize_cases():
    assert normalize([(0, 1), (1, 2)]).intervals == ((0.0, 2.0),)
    assert normalize([(0, 1), (3, 4)]).intervals == ((0.0, 1.0), (3.0, 4.0))
    assert normalize([(0, 2), (1, 3)]).intervals == ((0.0, 3.0),)
    assert normalize([(0, 1), (1 + MERGE_TOL / 2, 2)]).count == 1


def test_normalize_rejects_reversed_interval():
    with pytest.raises(DomainError):
        normalize([(2, 1)])


def test_normalize_idempotent(random_sets):
    for s in random_sets:
        assert normalize(s.intervals) == s


def test_measure_cases():
    assert measure(BandSet.interval(-2, 2)) == 4.0
    assert measure(BandSet.empty()) == 0.0
    assert measure(normalize([(5, 5)])) == 0.0


def test_inclusion_exclusion(random_sets):
    for a, b in itertools.combinations(random_sets[:12], 2):
        lhs = measure(union(a, b)) + measure(intersect(a, b))
        assert lhs == pytest.approx(measure(a) + measure(b), abs=1e-9)


def test_set_operation_cases():
    assert difference(BandSet.interval(0, 4), BandSet.interval(1, 2)).intervals == ((0.0, 1.0), (2.0, 4.0))
    assert intersect(BandSet.interval(0, 1), BandSet.interval(2, 3)).is_empty
    assert (BandSet.interval(0, 1) | BandSet.interval(0.5, 3)).intervals == ((0.0, 3.0),)


def test_double_difference_is_intersection(random_sets):
    for a, b in itertools.combinations(random_sets[:12], 2):
        lhs = difference(a, difference(a, b))
        rhs = intersect(a, b)
        assert measure(lhs) == pytest.approx(measure(rhs), abs=MERGE_TOL * (a.count + b.count + 1))
        if not rhs.is_empty:
            assert hausdorff_distance(lhs, rhs) < 1e-8


def test_difference_measure_identity(random_sets):
    for a, b in itertools.combinations(random_sets[:12], 2):
        expected = measure(a) - measure(intersect(a, b))
        assert measure(difference(a, b)) == pytest.approx(expected, abs=MERGE_TOL * (a.count + b.count + 1))


def test_union_commutative_associative(random_sets):
    a, b, c = random_sets[:3]
    assert union(a, b) == union(b, a)
    left = union(union(a, b), c)
    right = union(a, union(b, c))
    assert left.count == right.count
    assert np.allclose(left.to_list(), right.to_list())


def test_grid_oracle_for_difference(random_sets):
    xs = np.linspace(0, 12, 24001)
    a, b = random_sets[3], random_sets[4]
    diff = difference(a, b)
    in_a = a.distance_to(xs) == 0
    in_diff = diff.distance_to(xs) == 0
    assert np.all(in_diff[in_a & (b.distance_to(xs) > 1e-6)])
    assert np.all(in_a[in_diff])


def test_hausdorff_cases():
    assert hausdorff_distance(normalize([(0, 0)]), normalize([(1, 1)])) == 1.0
    s = normalize([(0, 1), (2, 3)])
    assert hausdorff_distance(s, s) == 0.0
    assert hausdorff_distance(BandSet.interval(0, 1), normalize([(0, 1), (5, 5)])) == 4.0


def test_hausdorff_gap_midpoint():
    whole = BandSet.interval(0, 10)
    holed = normalize([(0, 4), (6, 10)])
    assert hausdorff_distance(whole, holed) == pytest.approx(1.0)


def test_hausdorff_rejects_empty():
    with pytest.raises(DomainError):
        hausdorff_distance(BandSet.empty(), BandSet.interval(0, 1))


def test_hausdorff_triangle_inequality(random_sets):
    for a, b, c in itertools.combinations(random_sets[:10], 3):
        assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-12


def test_serialization_shape():
    s = normalize([(0, 1), (3, 4)])
    assert s.to_list() == [[0.0, 1.0], [3.0, 4.0]]
    assert BandSet.from_list(s.to_list()) == s


def test_widen_and_gaps():
    s = normalize([(0, 1), (3, 4)])
    assert s.gaps().intervals == ((1.0, 3.0),)
    assert s.widen(1.0).intervals == ((-1.0, 5.0),)
