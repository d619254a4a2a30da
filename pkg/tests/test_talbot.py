import math

import numpy as np
import pytest

from invlap.algorithms import (FLAG_NONFINITE_SAMPLES, FLAG_TALBOT_TAIL,
                               TalbotParams, talbot_contour, talbot_invert)


def _invert_image(image, t, params):
    samples = np.array([image(p) for p in talbot_contour(params.r, params.n_nodes)])
    return talbot_invert(samples, t, params)


def test_contour_endpoints():
    p = talbot_contour(2.5, 8)
    assert p[0] == 2.5  # theta -> 0 limit of r theta cot(theta) is r
    # theta = pi/2 node: cot vanishes, p = i r pi / 2
    p16 = talbot_contour(2.5, 16)
    assert p16[8] == pytest.approx(2.5 * (np.pi / 2) * 1j)


def test_contour_tail_goes_far_left():
    p = talbot_contour(1.0, 64)
    assert p[-1].real < -10.0
    assert np.all(np.diff(p.real) < 0)  # monotone march toward -infinity
    assert np.all(p[1:].imag > 0)


def test_rule_of_thumb():
    params = TalbotParams.rule_of_thumb(32, t_max=2.0)
    assert params.r == pytest.approx(2.0 * 32 / (5.0 * 2.0))
    assert params.n_nodes == 32


def test_invalid_params():
    with pytest.raises(ValueError):
        TalbotParams(r=-1.0, n_nodes=8)
    with pytest.raises(ValueError):
        TalbotParams(r=1.0, n_nodes=1)
    with pytest.raises(ValueError):
        talbot_contour(0.0, 8)


def test_inverts_one_over_p():
    params = TalbotParams.rule_of_thumb(16, t_max=1.0)
    value, flags = _invert_image(lambda p: 1.0 / p, 1.0, params)
    assert value == pytest.approx(1.0, abs=1e-8)
    assert flags == ()


def test_inverts_sine():
    params = TalbotParams.rule_of_thumb(32, t_max=1.0)
    value, flags = _invert_image(lambda p: 1.0 / (p * p + 1.0), 1.0, params)
    assert value == pytest.approx(math.sin(1.0), abs=1e-8)
    assert flags == ()


def test_delayed_step_flagged_before_delay():
    # exp(-tau p)/p grows along the left contour tail; for t < tau the
    # quadrature terms never decay and the result is meaningless
    params = TalbotParams.rule_of_thumb(51, t_max=10.0)
    image = lambda p: np.exp(-0.08 * p) / p
    value, flags = _invert_image(image, 0.04, params)
    assert FLAG_TALBOT_TAIL in flags
    # and a comfortably post-delay time is clean
    value, flags = _invert_image(image, 1.0, params)
    assert flags == ()
    assert value == pytest.approx(1.0, abs=1e-6)


def test_nonfinite_samples_flagged():
    params = TalbotParams(r=1.0, n_nodes=8)
    samples = np.ones(8, dtype=complex)
    samples[5] = np.inf
    value, flags = talbot_invert(samples, 1.0, params)
    assert FLAG_NONFINITE_SAMPLES in flags
    assert math.isnan(value)


def test_vector_channels():
    params = TalbotParams.rule_of_thumb(24, t_max=2.0)
    p = talbot_contour(params.r, params.n_nodes)
    samples = np.column_stack([1.0 / p, 1.0 / p**2])
    value, flags = talbot_invert(samples, 1.5, params)
    assert value.shape == (2,)
    assert value[0] == pytest.approx(1.0, abs=1e-8)
    assert value[1] == pytest.approx(1.5, abs=1e-7)
