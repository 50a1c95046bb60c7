import math

import numpy as np
import pytest

from freefall.critical import CriticalPoint, expand, tangent
from freefall.fourier import FourierLoop, action, inner_metric
from freefall.hessian import (
    closed_form_eigenvalues,
    eigenprojectors,
    hessian_apply,
    hessian_matrix,
    kernel_vector,
    restricted_morse_index,
    spectral_gap,
    spectrum_closed_form,
    spectrum_numeric,
    verify_distinctness,
)

FOUR_PI_SQ = 4 * math.pi**2


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_numeric_matches_closed_form(k):
    for phase in np.linspace(0, 2 * np.pi, 5, endpoint=False):
        num = spectrum_numeric(CriticalPoint(k, phase), 16)
        ref = spectrum_closed_form(k, 16)
        assert np.allclose(num.eigenvalues, ref.eigenvalues, atol=1e-6, rtol=0)
        assert num.morse_index == 2 * k - 1
        assert num.nullity == 1
        assert [(m, lab) for _, m, lab in num.eigenpairs] == [(m, lab) for _, m, lab in ref.eigenpairs]


def test_closed_form_values_k1():
    pairs = dict((lab, (v, m)) for v, m, lab in closed_form_eigenvalues(1, 4))
    assert pairs["mu_0"] == (pytest.approx(-FOUR_PI_SQ), 1)
    assert pairs["mu_k"] == (0.0, 1)
    assert pairs["mu_hat_k"] == (pytest.approx(48 * math.pi**2), 1)
    assert pairs["mu_2"] == (pytest.approx(3 * FOUR_PI_SQ), 2)


def test_spectrum_k2_frozen():
    rep = spectrum_numeric(CriticalPoint(2), 4)
    values = [round(v, 6) for v, _, _ in rep.eigenpairs]
    assert values == [-157.91367, -118.435253, 0.0, 197.392088, 473.741011, 1894.964045]
    assert rep.spectral_gap == pytest.approx(spectral_gap(2))


def test_truncation_must_exceed_k():
    with pytest.raises(ValueError):
        spectrum_numeric(CriticalPoint(3), 3)
    with pytest.raises(ValueError):
        spectrum_closed_form(3, 2)


def test_kernel_is_tangent():
    cp = CriticalPoint(2, 0.9)
    v = kernel_vector(cp, 6)
    t = tangent(cp, 6).to_vector()
    assert abs(abs(np.dot(v, t)) / np.linalg.norm(t) - 1.0) < 1e-10
    assert np.max(np.abs(hessian_apply(cp, tangent(cp, 6)).to_vector())) < 1e-10


def test_hessian_is_symmetric_in_parseval_pairing():
    h = hessian_matrix(CriticalPoint(3, 0.4), 6)
    w = np.concatenate(([1.0], np.full(12, 0.5)))
    sym = np.diag(w) @ h
    assert np.allclose(sym, sym.T, atol=1e-9)


def test_projectors_are_phase_independent_in_shifted_basis():
    a = eigenprojectors(CriticalPoint(2, 0.0), 5)
    b = eigenprojectors(CriticalPoint(2, 2.2), 5)
    for label in a:
        assert np.allclose(a[label], b[label], atol=1e-9), label


@pytest.mark.parametrize("seed", range(5))
def test_second_variation(seed):
    rng = np.random.default_rng(seed)
    cp = CriticalPoint(int(rng.integers(1, 5)), rng.uniform(0, 2 * np.pi))
    q = expand(cp, 16)
    xi = FourierLoop.from_vector(rng.uniform(-1, 1, 33))
    tau = 1e-4
    fd = (action(q + tau * xi) - 2 * action(q) + action(q - tau * xi)) / tau**2
    assert fd == pytest.approx(inner_metric(hessian_apply(cp, xi), xi, q), rel=1e-4)


def test_distinctness_and_gap():
    assert all(verify_distinctness(k, 64) for k in range(1, 20))
    assert spectral_gap(1) == pytest.approx(FOUR_PI_SQ)
    assert spectral_gap(3) == pytest.approx(5 * FOUR_PI_SQ)
    with pytest.raises(ValueError):
        verify_distinctness(5, 3)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_restricted_indices_on_Vk(k):
    # on V_k the upper circle has index 2 (mode k directions), the lower has 0
    assert restricted_morse_index(CriticalPoint(k + 1), (k, k + 1)) == 2
    assert restricted_morse_index(CriticalPoint(k), (k, k + 1)) == 0
