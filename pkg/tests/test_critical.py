import math

import numpy as np
import pytest

from freefall.critical import (
    CriticalPoint,
    amplitude,
    critical_value,
    expand,
    find_critical,
    morse_index_formula,
    tangent,
)
from freefall.errors import DomainError, NonConvergence
from freefall.fourier import FourierLoop, action, gradient, norm_sq


def test_frozen_amplitudes_and_values():
    assert amplitude(1) == pytest.approx(0.6082914467207953, rel=1e-15)
    assert amplitude(2) == pytest.approx(0.4828012412139242, rel=1e-15)
    assert critical_value(1) == pytest.approx(8.107703070190471, rel=1e-15)
    assert critical_value(2) == pytest.approx(12.870176382666154, rel=1e-15)
    assert critical_value(3) == pytest.approx(16.86470199841145, rel=1e-15)


@pytest.mark.parametrize("k", range(1, 9))
def test_closed_forms(k):
    assert amplitude(k) == pytest.approx(2 ** (-1 / 6) * (math.pi * k) ** (-1 / 3), rel=1e-15)
    assert critical_value(k) == pytest.approx(3 * 2 ** (1 / 3) * (math.pi * k) ** (2 / 3), rel=1e-15)
    assert morse_index_formula(k) == 2 * k - 1


@pytest.mark.parametrize("phase", [0.0, 1.0, 2.5, 5.9])
def test_expand_is_critical_and_phase_independent(phase):
    cp = CriticalPoint(3, phase)
    q = expand(cp, 8)
    assert action(q) == pytest.approx(critical_value(3), rel=1e-13)
    assert np.max(np.abs(gradient(q).to_vector())) < 1e-11
    assert q.amplitudes()[2] == pytest.approx(amplitude(3), rel=1e-15)


def test_phase_convention():
    q = expand(CriticalPoint(1, math.pi / 2), 2)
    assert q.cos_coeffs[0] == pytest.approx(0.0, abs=1e-16)
    assert q.sin_coeffs[0] == pytest.approx(-amplitude(1), rel=1e-15)


def test_phase_is_reduced_mod_two_pi():
    assert CriticalPoint(1, 2 * math.pi + 0.5).phase == pytest.approx(0.5)
    assert CriticalPoint.from_dict(CriticalPoint(2, 1.25).to_dict()) == CriticalPoint(2, 1.25)


def test_tangent_is_phase_derivative():
    cp, h = CriticalPoint(2, 0.7), 1e-6
    fd = (expand(CriticalPoint(2, 0.7 + h), 4).to_vector() - expand(CriticalPoint(2, 0.7 - h), 4).to_vector()) / (2 * h)
    assert np.allclose(tangent(cp, 4).to_vector(), fd, atol=1e-9)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        CriticalPoint(0)
    with pytest.raises(ValueError):
        amplitude(0)
    with pytest.raises(ValueError):
        expand(CriticalPoint(3), 2)


def test_find_critical_from_scaled_seed():
    q = find_critical(1.1 * expand(CriticalPoint(1), 6))
    assert q.amplitudes()[0] == pytest.approx(amplitude(1), rel=1e-10)
    assert action(q) == pytest.approx(critical_value(1), rel=1e-12)


def test_find_critical_keeps_mode_content():
    seed = FourierLoop.mode(2, 4, "sin", 0.4)
    q = find_critical(seed)
    assert q.amplitudes()[1] == pytest.approx(amplitude(2), rel=1e-10)
    assert norm_sq(q) == pytest.approx(0.5 * amplitude(2) ** 2, rel=1e-10)


def test_find_critical_constant_seed_has_no_critical_point():
    with pytest.raises(NonConvergence):
        find_critical(FourierLoop.constant(1.0, 3))


def test_find_critical_rejects_zero_seed():
    with pytest.raises(DomainError):
        find_critical(FourierLoop.zeros(3))
