# Python module: test_quasiperiodic.py
import math
from fractions import Fraction

import numpy as np
import pytest

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

from core.backend.quasiperiodic.quasiperiodic import (
    PipelineStage,
    QPModel,
    dos_perturbation_bound,
    gap_closing_perturbation,
    gap_closing_pipeline,
    golden_convergents,
    hausdorff_continuity_probe,
    ids_continuity_probe,
    rational_ids_curve,
    rational_spectrum,
    step_approximation,
    step_error_bound,
)
from core.backend.quasiperiodic.sampling import SamplingFunction, as_fraction, hat, sup_distance
from core.backend.spectral.intervalsets import hausdorff_distance
from core.errors import DomainError, PreconditionError

COS = SamplingFunction.cosine(1.0)
SKEWED = SamplingFunction.trig([(1, 1.0, 0.3), (2, 0.0, 0.5)])
TWO_LEVEL = SamplingFunction.step(["0", "1/2"], [0.0, 4.5])


@pytest.fixture(scope="module")
def closed_gap():
    """One small gap of the beta = 0 spectrum of a two-valued step, closed with eps = 0.6."""
    h, report = gap_closing_perturbation("0/1", TWO_LEVEL, (-1.5, 6.0), eps=0.6, r=1e-3)
    return h, report


def test_hat_and_rationals():
    assert np.allclose(hat([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0]), [0.0, 0.0, 0.5, 1.0, 0.5, 0.0])
    assert as_fraction("2/4") == Fraction(1, 2)
    assert QPModel("5/4", COS).alpha == Fraction(1, 4)
    assert QPModel(Fraction(2, 6), COS).q == 3


def test_step_function_values_and_validation():
    s = SamplingFunction.step(["1/4", "3/4"], [1.0, 2.0])
    assert np.allclose(s(np.array([0.1, 0.5, 0.8, 1.5])), [2.0, 1.0, 2.0, 1.0])
    assert s.sup_norm() == 2.0
    assert s.modulus(0.1) == 1.0
    with pytest.raises(DomainError):
        SamplingFunction.step(["1/2", "1/4"], [1.0, 2.0])
    with pytest.raises(DomainError):
        SamplingFunction.step(["0"], [1.0, 2.0])
    with pytest.raises(DomainError):
        SamplingFunction.from_config({"kind": "spline"})


def test_sup_norms_and_moduli():
    assert COS.sup_norm() == pytest.approx(1.0, abs=1e-9)
    assert SKEWED.sup_norm() >= np.max(np.abs(SKEWED(np.linspace(0, 1, 10001)))) - 1e-12
    assert COS.modulus(0.01) == pytest.approx(2 * math.pi * 0.01)
    table = SamplingFunction.tabulated([0.0, 1.0, 0.0, -1.0])
    assert table.sup_norm() == 1.0
    assert table(0.125) == pytest.approx(0.5)
    bumped = SamplingFunction.perturbed(COS, [(0.3, 0.01, 0.2)])
    assert bumped(0.3) == pytest.approx(COS(0.3) + 0.2)
    assert sup_distance(bumped, COS) == 0.2


def test_config_round_trip():
    block = {"kind": "perturbed", "base": TWO_LEVEL.to_dict(), "bumps": [{"center": 0.25, "half_width": 0.01, "height": 0.3}]}
    f = SamplingFunction.from_config(block)
    assert f.base == TWO_LEVEL
    assert f.to_dict()["bumps"][0]["height"] == 0.3


def test_qp_model_potential_and_word():
    model = QPModel("1/3", COS, phase=0.1)
    assert np.allclose(model.potential((0, 6)), np.tile(model.word().symbols, 2))
    with pytest.raises(DomainError):
        QPModel((math.sqrt(5) - 1) / 2, COS).spectrum()


def test_rational_spectrum_cases():
    flat = rational_spectrum("3/7", SamplingFunction.constant(0.7))
    assert flat.inner.count == 1
    assert flat.inner.lo == pytest.approx(-1.3, abs=1e-9)
    assert flat.inner.hi == pytest.approx(2.7, abs=1e-9)
    step = rational_spectrum("0/1", SamplingFunction.step(["0", "1/2"], [0.0, 1.0]))
    assert np.allclose(step.inner.to_list(), [[-2.0, 3.0]])
    assert step.widening == 0.0


def test_rational_spectrum_preconditions():
    with pytest.raises(DomainError):
        rational_spectrum("1/5", COS, P=10)
    with pytest.raises(DomainError):
        rational_spectrum("1/201", COS)


def test_outer_contains_inner():
    spectrum = rational_spectrum("2/5", SKEWED)
    assert (spectrum.inner - spectrum.outer).is_empty
    assert spectrum.widening > 0.0


def test_spectrum_invariant_under_phase_translation():
    base = rational_spectrum("2/5", SKEWED).inner
    moved = rational_spectrum("2/5", SKEWED.shift(0.137)).inner
    assert hausdorff_distance(base, moved) < 2e-3
    step = SamplingFunction.step(["0", "1/3", "5/7"], [0.0, 1.0, 2.5])
    exact = rational_spectrum("1/4", step).inner
    shifted = rational_spectrum("1/4", step.shift(Fraction(1, 7))).inner
    assert hausdorff_distance(exact, shifted) < 1e-9


def test_spectrum_invariant_under_frequency_reflection():
    for p, p_mirror in ((1, 4), (2, 3)):
        a = rational_spectrum(Fraction(p, 5), SKEWED).inner
        b = rational_spectrum(Fraction(p_mirror, 5), SKEWED).inner
        assert hausdorff_distance(a, b) < 1e-8


def test_potential_perturbation_moves_spectrum_by_at_most_its_norm():
    delta = 0.05
    nudged = SamplingFunction.trig([(1, 1.0, 0.0), (2, 0.0, delta)])
    a = rational_spectrum("2/5", COS).inner
    b = rational_spectrum("2/5", nudged).inner
    assert hausdorff_distance(a, b) <= delta + 2e-3


def test_step_approximation():
    flat = step_approximation(SamplingFunction.constant(1.25), 8)
    assert set(flat.values) == {1.25}
    s = step_approximation(COS, 100)
    x = np.linspace(0, 1, 10001)
    assert np.max(np.abs(s(x) - COS(x))) <= 2 * math.pi / 100
    assert step_error_bound(COS, 200) <= step_error_bound(COS, 100)
    with pytest.raises(DomainError):
        step_approximation(TWO_LEVEL, 10)


def test_gap_closing_closes_small_gap(closed_gap):
    h, report = closed_gap
    assert len(report.gaps) == 1
    assert report.gaps[0] == pytest.approx((2.0, 2.5), abs=1e-9)
    assert report.reaches[0] == pytest.approx(2.0, abs=1e-9)
    assert not report.unlocated
    assert report.sup_distance <= report.eps
    assert report.support_total < report.r
    assert report.verified
    assert not report.surviving
    omega = report.omegas[0]
    assert h(omega) - TWO_LEVEL(omega) == pytest.approx(0.6)


def test_gap_closing_without_gaps():
    h, report = gap_closing_perturbation("0/1", TWO_LEVEL, (-1.5, 1.5), eps=0.1)
    assert h == TWO_LEVEL
    assert report.gaps == ()
    assert report.verified


def test_gap_closing_preconditions():
    with pytest.raises(PreconditionError):
        gap_closing_perturbation("0/1", TWO_LEVEL, (-1.5, 6.0), eps=0.3)
    with pytest.raises(PreconditionError):
        gap_closing_perturbation("0/1", TWO_LEVEL, (-1.5, 6.0), eps=1.0)
    with pytest.raises(PreconditionError):
        gap_closing_perturbation("0/1", TWO_LEVEL, (-1.5, 7.0), eps=0.6)


def test_bump_support_invariant_under_frequency():
    g = SamplingFunction.step(["0", "1/2"], [0.0, 0.2])
    h, report = gap_closing_perturbation("1/2", g, (-1.5, 1.8), eps=0.25, r=1e-3)
    assert report.verified
    centers = sorted(c for c, _, _ in h.bumps)
    moved = sorted((c + 0.5) % 1.0 for c in centers)
    assert np.allclose(centers, moved)
    assert report.support_total == pytest.approx(sum(2 * w for _, w, _ in h.bumps))
    assert sup_distance(h, g) <= 0.25


def test_dos_perturbation_bound(closed_gap):
    h, report = closed_gap
    bound = dos_perturbation_bound("0/1", TWO_LEVEL, h, report.r, rng=np.random.default_rng(3))
    assert bound.passed
    assert len(bound.discrepancies) == 10
    assert max(abs(d) for d in bound.discrepancies) <= 2 * report.r
    same = dos_perturbation_bound("0/1", TWO_LEVEL, TWO_LEVEL, report.r)
    assert same.discrepancies == (0.0,) * 10


def test_dos_discrepancy_scales_with_support(closed_gap):
    h, report = closed_gap
    h_half, _ = gap_closing_perturbation("0/1", TWO_LEVEL, (-1.5, 6.0), eps=0.6, r=report.r / 2)
    full = dos_perturbation_bound("0/1", TWO_LEVEL, h, report.r, rng=np.random.default_rng(5))
    half = dos_perturbation_bound("0/1", TWO_LEVEL, h_half, report.r / 2, rng=np.random.default_rng(5))
    big = int(np.argmax(np.abs(full.discrepancies)))
    assert abs(full.discrepancies[big]) > 0.0
    assert half.discrepancies[big] == pytest.approx(full.discrepancies[big] / 2, rel=1e-3)


def test_hausdorff_probe():
    flat = hausdorff_continuity_probe([("1/3", COS)] * 3)
    assert flat.consecutive == (0.0, 0.0)
    sequence = [(alpha, COS) for alpha in golden_convergents(21)[1:]]
    report = hausdorff_continuity_probe(sequence)
    assert report.labels[0] == "1/2"
    assert report.decreasing


def test_ids_probe():
    energies = np.linspace(-3.2, 3.2, 641)
    flat = ids_continuity_probe([("2/5", COS)] * 2, energies)
    assert flat.consecutive == (0.0,)
    sequence = [(alpha, COS) for alpha in golden_convergents(21)[1:]]
    report = ids_continuity_probe(sequence, energies)
    assert report.decreasing
    k = rational_ids_curve("5/8", COS, energies)
    assert k[0] >= 0.0 and k[-1] <= 1.0 + 1e-12
    assert np.all(np.diff(k) >= -1e-12)


def test_golden_convergents():
    assert golden_convergents(8) == [Fraction(1, 1), Fraction(1, 2), Fraction(2, 3), Fraction(3, 5), Fraction(5, 8)]


def test_pipeline_runs_stages():
    g = SamplingFunction.step(["0", "1/2"], [0.0, 4.5])
    stages = [PipelineStage(Fraction(0), (-1.5, 6.0), eps=0.6), PipelineStage(Fraction(0), (-1.5, 6.5), eps=0.6)]
    result = gap_closing_pipeline(g, stages, trust=0.1)
    assert result.verified
    assert len(result.reports[0].gaps) == 1
    assert result.reports[1].gaps == ()
    assert result.drifts == (0.0,)
    assert result.within_trust
