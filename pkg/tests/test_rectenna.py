"""Harvested-current model tests.

The quadruple-sum evaluator is cross-checked three independent ways: a plain
Python loop oracle written directly from the DC-mixing condition, the compact
correlation-coefficient form, and a time-domain sampling oracle that never
touches frequency-domain algebra.
"""

import numpy as np
import pytest

from irswpt.channel import ChannelRealization
from irswpt.rectenna import (
    PhaseConfig,
    RectennaParams,
    Waveform,
    composite_channel,
    idc_coefficients,
    idc_compact,
    idc_direct,
    idc_time_oracle,
    weighted_sum_idc,
)

PARAMS = RectennaParams()


def loop_oracle(s, h, params):
    """O(N^4) reference: every index quadruple with n1 + n3 = n2 + n4."""
    c = np.asarray(h, complex) * np.asarray(s, complex)
    n = c.size
    total = 0.0 + 0.0j
    for n1 in range(n):
        for n2 in range(n):
            for n3 in range(n):
                n4 = n1 + n3 - n2
                if 0 <= n4 < n:
                    total += np.conj(c[n1]) * c[n2] * np.conj(c[n3]) * c[n4]
    second = 0.5 * params.k2 * float(np.sum(np.abs(c) ** 2))
    assert abs(total.imag) <= 1e-9 * max(abs(total), 1.0)
    return second + (3.0 / 8.0) * params.k4 * total.real


def random_instance(rng, n):
    s = rng.normal(size=n) + 1j * rng.normal(size=n)
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    return s, h


def test_single_tone_value():
    # w^2 = 2, unit channel: 0.5*k2*2 + (3/8)*k4*4 = 0.17 + 1435.875
    got = idc_direct(np.array([np.sqrt(2.0)]), np.array([1.0]), PARAMS)
    assert got == pytest.approx(1436.045, abs=1e-9)


def test_two_tone_unit_value():
    # c = [1, 1]: b0 = 2, b1 = 1 -> 0.34/2 + (3/8)k4*4 + (3/4)k4*1
    got = idc_direct(np.ones(2), np.ones(2), PARAMS)
    assert got == pytest.approx(2153.9825, abs=1e-9)
    assert got == pytest.approx(loop_oracle(np.ones(2), np.ones(2), PARAMS), rel=1e-12)


def test_zero_waveform_is_zero():
    assert idc_direct(np.zeros(3), np.ones(3), PARAMS) == 0.0
    assert idc_time_oracle(np.zeros(3), np.ones(3), PARAMS) == 0.0


def test_direct_matches_loop_oracle():
    rng = np.random.default_rng(11)
    for n in (1, 2, 3, 5, 8):
        s, h = random_instance(rng, n)
        assert idc_direct(s, h, PARAMS) == pytest.approx(
            loop_oracle(s, h, PARAMS), rel=1e-11)


def test_compact_two_coefficient_value():
    assert idc_compact(np.array([2.0, 1.0]), PARAMS) == pytest.approx(
        2153.9825, abs=1e-9)


def test_compact_zero_and_single():
    assert idc_compact(np.zeros(4), PARAMS) == 0.0
    b0 = 3.7
    expect = 0.5 * PARAMS.k2 * b0 + (3 / 8) * PARAMS.k4 * b0**2
    assert idc_compact(np.array([b0, 0.0, 0.0]), PARAMS) == pytest.approx(expect)


def test_compact_rejects_negative_leading_coefficient():
    with pytest.raises(ValueError):
        idc_compact(np.array([-1.0, 0.0]), PARAMS)


def test_compact_rejects_complex_leading_coefficient():
    with pytest.raises(ArithmeticError):
        idc_compact(np.array([1.0 + 1.0j, 0.0]), PARAMS)


def test_coefficients_definition():
    rng = np.random.default_rng(7)
    s, h = random_instance(rng, 6)
    c = h * s
    b = idc_coefficients(s, h)
    for k in range(6):
        expect = sum(np.conj(c[i]) * c[i + k] for i in range(6 - k))
        assert b[k] == pytest.approx(expect, rel=1e-12)
    assert abs(b[0].imag) < 1e-12


def test_three_way_oracle_equivalence():
    rng = np.random.default_rng(23)
    for _ in range(25):
        n = int(rng.integers(1, 9))
        s, h = random_instance(rng, n)
        direct = idc_direct(s, h, PARAMS)
        compact = idc_compact(idc_coefficients(s, h), PARAMS)
        sampled = idc_time_oracle(s, h, PARAMS, n_samples=10**5)
        assert compact == pytest.approx(direct, rel=1e-9)
        assert sampled == pytest.approx(direct, rel=1e-6)


def test_time_oracle_single_tone_closed_form():
    # E{cos^2} = 1/2 and E{cos^4} = 3/8 over one period
    w, hmag = 1.7, 0.6
    got = idc_time_oracle(np.array([w + 0j]), np.array([hmag + 0j]), PARAMS)
    amp = w * hmag
    expect = 0.5 * PARAMS.k2 * amp**2 + (3 / 8) * PARAMS.k4 * amp**4
    assert got == pytest.approx(expect, rel=1e-9)


def test_time_oracle_rejects_small_sample_count():
    with pytest.raises(ValueError):
        idc_time_oracle(np.ones(2), np.ones(2), PARAMS, n_samples=5000)


def test_direct_gated_above_16_tones():
    with pytest.raises(ValueError):
        idc_direct(np.ones(17), np.ones(17), PARAMS)


def test_common_phase_invariance():
    rng = np.random.default_rng(3)
    s, h = random_instance(rng, 5)
    base = idc_direct(s, h, PARAMS)
    for alpha in (0.3, 1.1, 2.9):
        assert idc_direct(s * np.exp(1j * alpha), h, PARAMS) == pytest.approx(
            base, rel=1e-12)


def test_amplitude_scaling_splits_exactly():
    rng = np.random.default_rng(5)
    s, h = random_instance(rng, 4)
    b = idc_coefficients(s, h)
    second = 0.5 * PARAMS.k2 * b[0].real
    fourth = idc_compact(b, PARAMS) - second
    for c in (0.5, 2.0, 3.0):
        got = idc_direct(c * s, h, PARAMS)
        assert got == pytest.approx(c**2 * second + c**4 * fourth, rel=1e-10)


def test_positivity():
    rng = np.random.default_rng(17)
    for _ in range(50):
        s, h = random_instance(rng, int(rng.integers(1, 9)))
        assert idc_direct(s, h, PARAMS) >= 0.0


def make_realization(rng, k, n, l):
    return ChannelRealization(
        h_d=rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n)),
        h_i=rng.normal(size=(n, l)) + 1j * rng.normal(size=(n, l)),
        h_r=rng.normal(size=(k, n, l)) + 1j * rng.normal(size=(k, n, l)),
    )


def test_composite_channel_hand_sum():
    rng = np.random.default_rng(2)
    real = make_realization(rng, 2, 3, 4)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(3, 4)))
    phases = PhaseConfig.fs(theta)
    for q in range(2):
        got = composite_channel(real, phases, q)
        expect = np.array([
            real.h_d[q, n] + sum(real.h_r[q, n, j] * theta[n, j] * real.h_i[n, j]
                                 for j in range(4))
            for n in range(3)
        ])
        np.testing.assert_allclose(got, expect, rtol=1e-12)


def test_composite_channel_ff_broadcast():
    rng = np.random.default_rng(4)
    real = make_realization(rng, 1, 3, 2)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, size=2))
    ff = composite_channel(real, PhaseConfig.ff(theta), 0)
    fs = composite_channel(real, PhaseConfig.fs(np.tile(theta, (3, 1))), 0)
    np.testing.assert_allclose(ff, fs, rtol=1e-14)


def test_composite_channel_bad_user():
    real = make_realization(np.random.default_rng(0), 1, 2, 2)
    with pytest.raises(ValueError):
        composite_channel(real, PhaseConfig.ff(np.ones(2)), 1)


def test_weighted_sum_matches_per_user():
    rng = np.random.default_rng(9)
    real = make_realization(rng, 2, 4, 3)
    phases = PhaseConfig.ff(np.exp(1j * rng.uniform(0, 2 * np.pi, 3)))
    s, _ = random_instance(rng, 4)
    per_user = [idc_direct(s, composite_channel(real, phases, q), PARAMS)
                for q in range(2)]
    w = np.array([0.3, 1.4])
    got = weighted_sum_idc(s, phases, real, PARAMS, w)
    assert got == pytest.approx(w @ per_user, rel=1e-12)
    # zero weight excludes that user entirely
    assert weighted_sum_idc(s, phases, real, PARAMS, np.array([1.0, 0.0])) == \
        pytest.approx(per_user[0], rel=1e-12)
    # linear in the weight vector
    assert weighted_sum_idc(s, phases, real, PARAMS, 2.5 * w) == \
        pytest.approx(2.5 * got, rel=1e-12)


def test_waveform_power_and_budget():
    wf = Waveform(np.array([1.0 + 1j, 2.0]))
    assert wf.power == pytest.approx(3.0)
    wf.check_budget(3.0)
    with pytest.raises(ValueError):
        wf.check_budget(2.9)
    with pytest.raises(ValueError):
        Waveform(np.array([np.nan + 0j]))


def test_phase_config_validation():
    with pytest.raises(ValueError):
        PhaseConfig.ff(np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        PhaseConfig("diag", np.ones(2))
    with pytest.raises(ValueError):
        PhaseConfig.fs(np.ones(3))
    mat = PhaseConfig.ff(np.array([1j, -1j])).as_matrix(4)
    assert mat.shape == (4, 2)
    np.testing.assert_array_equal(mat[0], mat[3])
    with pytest.raises(ValueError):
        PhaseConfig.fs(np.ones((2, 3))).as_matrix(4)


def test_params_validation_and_diode_derivation():
    with pytest.raises(ValueError):
        RectennaParams(k2=-1.0)
    with pytest.raises(ValueError):
        RectennaParams(truncation_order=2)
    p = RectennaParams.from_diode(i_s=5e-6, n_prime=1.05, v_t=25.86e-3,
                                  r_ant=50.0)
    vd = 1.05 * 25.86e-3
    assert p.k2 == pytest.approx(5e-6 / (2 * vd**2) * 50.0, rel=1e-12)
    assert p.k4 == pytest.approx(5e-6 / (24 * vd**4) * 50.0**2, rel=1e-12)
