import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liesync.dither import (DitherSchedule, common_period, dither_matrix,
                            dither_vector, generate_frequencies,
                            validate_frequencies)
from liesync.groups import hat


def brute_force_valid(values) -> bool:
    """Independent constraint check written directly from the three rules."""
    n = len(values)
    for p, q in itertools.permutations(range(n), 2):
        if values[p] == values[q]:
            return False
        if 2 * values[p] == values[q]:
            return False
    for p, q, r in itertools.permutations(range(n), 3):
        if values[q] + values[r] == values[p]:
            return False
    return True


def test_single_multiplier_is_valid():
    assert validate_frequencies([1]).ok


def test_double_violation_reported():
    report = validate_frequencies([1, 2])
    assert not report.ok
    assert any(v.kind == "double" for v in report.violations)
    assert "2*1" in report.describe()


def test_three_five_seven_valid():
    assert validate_frequencies([3, 5, 7]).ok


def test_duplicate_and_sum_violations():
    assert any(v.kind == "duplicate" for v in validate_frequencies([4, 4]).violations)
    report = validate_frequencies([3, 5, 8])
    assert any(v.kind == "sum" and v.indices == (2, 0, 1) for v in report.violations)


def test_validator_rejects_nonpositive():
    with pytest.raises(ValueError):
        validate_frequencies([0, 1])
    with pytest.raises(ValueError):
        validate_frequencies([-3])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 15), min_size=1, max_size=5))
def test_validator_agrees_with_brute_force(values):
    assert validate_frequencies(values).ok == brute_force_valid(values)


def test_greedy_generation_frozen_values():
    # regression values confirmed with the brute-force validator
    assert generate_frequencies(1) == [1]
    assert generate_frequencies(3) == [1, 3, 5]
    assert generate_frequencies(9) == [1, 3, 5, 7, 9, 11, 13, 15, 17]


def test_generated_sets_always_validate():
    for count in (1, 4, 9, 18):
        assert validate_frequencies(generate_frequencies(count)).ok


def test_generate_rejects_bad_count():
    with pytest.raises(ValueError):
        generate_frequencies(0)


# --- schedules ----------------------------------------------------------------

def test_schedule_shape_and_positivity_checks():
    good = DitherSchedule.uniform(2, 3, 0.1, 1.0)
    assert good.m == 2 and good.n == 3
    with pytest.raises(ValueError, match="positive"):
        DitherSchedule(np.zeros((2, 3)), 1.0, good.multipliers)
    with pytest.raises(ValueError, match="base_omega"):
        DitherSchedule(np.full((2, 3), 0.1), 0.0, good.multipliers)
    with pytest.raises(ValueError, match="invalid frequency"):
        DitherSchedule(np.full((2, 3), 0.1), 1.0, np.arange(1, 7).reshape(2, 3))


def test_schedule_amplitude_cap_enforced():
    mult = np.array(generate_frequencies(3)).reshape(1, 3)
    with pytest.raises(ValueError, match="amplitude_cap"):
        DitherSchedule(np.full((1, 3), 0.4), 1.0, mult, amplitude_cap=0.5)
    DitherSchedule(np.full((1, 3), 0.28), 1.0, mult, amplitude_cap=0.5)


def test_dither_vector_zero_at_time_zero():
    sched = DitherSchedule.uniform(2, 3, 0.2, 5.0)
    assert np.array_equal(dither_vector(sched, 0, 0.0).coords, np.zeros(3))


def test_dither_vector_peaks_at_quarter_period():
    # single agent; first direction has multiplier 1, so omega*t = pi/2 peaks it
    sched = DitherSchedule(np.array([[0.2, 0.1, 0.1]]), 1.0,
                           np.array([[1, 3, 5]]))
    coords = dither_vector(sched, 0, math.pi / 2).coords
    assert abs(coords[0] - 0.2) < 1e-15


def test_dither_vector_agent_bounds():
    sched = DitherSchedule.uniform(2, 3, 0.1, 1.0)
    with pytest.raises(ValueError):
        dither_vector(sched, 2, 0.0)


def test_dither_norm_bounded_by_amplitude_row():
    sched = DitherSchedule.uniform(3, 3, 0.15, 7.0)
    for t in np.linspace(0.0, 5.0, 200):
        D = dither_matrix(sched, t)
        assert np.all(np.linalg.norm(D, axis=1)
                      <= np.linalg.norm(sched.amplitudes, axis=1) + 1e-15)


def test_hatted_dither_has_displayed_sign_pattern():
    # hat of the dither vector must reproduce the +/- a_i sin(w_i t) layout
    sched = DitherSchedule(np.array([[0.3, 0.2, 0.1]]), 2.0,
                           np.array([[1, 3, 5]]))
    t = 0.37
    s = [0.3 * math.sin(2.0 * 1 * t), 0.2 * math.sin(2.0 * 3 * t),
         0.1 * math.sin(2.0 * 5 * t)]
    X = hat(dither_vector(sched, 0, t))
    expected = np.array([[0.0, s[0], s[2]],
                         [-s[0], 0.0, s[1]],
                         [-s[2], -s[1], 0.0]])
    assert np.array_equal(X, expected)


# --- periods and orthogonality -------------------------------------------------

def test_common_period_examples():
    assert common_period(DitherSchedule(np.array([[0.1]]), 1.0,
                                        np.array([[1]]))) == 2 * math.pi
    sched357 = DitherSchedule(np.full((1, 3), 0.1), 1.0, np.array([[3, 5, 7]]))
    assert common_period(sched357) == 2 * math.pi
    sched_w10 = DitherSchedule(np.full((1, 3), 0.1), 10.0, np.array([[3, 5, 7]]))
    assert abs(common_period(sched_w10) - math.pi / 5) < 1e-15


def test_common_period_uses_gcd():
    sched = DitherSchedule(np.full((1, 2), 0.1), 1.0, np.array([[2, 6]]))
    T = common_period(sched)
    assert abs(T - math.pi) < 1e-15
    for k in (2, 6):
        assert abs(math.sin(k * (0.33 + T)) - math.sin(k * 0.33)) < 1e-12


def _simpson_average(f, T, intervals=1 << 13):
    ts = np.linspace(0.0, T, intervals + 1)
    w = np.ones(intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(w @ f(ts)) * (T / (3 * intervals)) / T


def test_sinusoid_orthogonality_over_common_period():
    sched = DitherSchedule.uniform(2, 3, 0.1, 3.0)
    T = common_period(sched)
    omegas = sched.omegas.reshape(-1)
    for i in range(len(omegas)):
        mean_sq = _simpson_average(lambda t: np.sin(omegas[i] * t) ** 2, T)
        assert abs(mean_sq - 0.5) < 1e-10
        for j in range(i + 1, len(omegas)):
            mixed = _simpson_average(
                lambda t: np.sin(omegas[i] * t) * np.sin(omegas[j] * t), T)
            assert abs(mixed) < 1e-10


def test_triple_products_average_to_zero():
    sched = DitherSchedule.uniform(2, 3, 0.1, 1.0)
    T = common_period(sched)
    omegas = sched.omegas.reshape(-1)
    for i, j, k in itertools.combinations(range(len(omegas)), 3):
        avg = _simpson_average(
            lambda t: np.sin(omegas[i] * t) * np.sin(omegas[j] * t)
            * np.sin(omegas[k] * t), T)
        assert abs(avg) < 1e-10
