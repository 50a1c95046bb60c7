import numpy as np
import pytest

from freefall.critical import CriticalPoint, tangent
from freefall.errors import GridMismatch
from freefall.heatflow import SolverConfig, shoot_unstable
from freefall.hessian import kernel_vector, hessian_matrix
from freefall.linearization import (
    CylinderField,
    adjoint_check,
    apply_D,
    apply_D_adjoint,
    bump,
    cascade_index,
    constant_trajectory,
    fd_check,
    fredholm_chain,
    fredholm_index,
    hessian_defect,
    interval_closure_defect,
    random_bump_field,
)

CFG = SolverConfig(n_modes=8)


@pytest.fixture(scope="module")
def connecting():
    return shoot_unstable(1, 1.0, CFG)


def test_bump_support():
    s = np.linspace(0, 1, 101)
    b = bump(s, 0.2, 0.6)
    assert np.all(b[(s <= 0.2) | (s >= 0.6)] == 0.0)
    assert b.max() == pytest.approx(1.0, abs=1e-3)


def test_field_validation():
    s = np.linspace(0, 1, 5)
    with pytest.raises(GridMismatch):
        CylinderField(s, np.zeros((4, 3)))
    with pytest.raises(ValueError):
        CylinderField(s, np.ones((5, 3)), support=(0.4, 0.6))
    with pytest.raises(ValueError):
        CylinderField(s, np.full((5, 3), np.inf))


def test_tangent_field_is_in_kernel():
    cp = CriticalPoint(2, 0.5)
    s = np.linspace(0, 1, 201)
    u = constant_trajectory(cp, 6, s)
    xi = CylinderField(s, np.tile(tangent(cp, 6).to_vector(), (s.size, 1)))
    assert np.max(np.abs(apply_D(u, xi).coeffs)) < 1e-10
    assert np.max(np.abs(apply_D_adjoint(u, xi).coeffs)) < 1e-10


def test_eigen_decay_is_in_kernel():
    cp = CriticalPoint(1)
    n = 4
    h = hessian_matrix(cp, n)
    vals, vecs = np.linalg.eig(h)
    i = int(np.argmax(vals.real))
    lam, v = vals[i].real, vecs[:, i].real
    s = np.linspace(0, 0.02, 401)
    u = constant_trajectory(cp, n, s)
    xi = CylinderField(s, np.exp(-lam * s)[:, None] * v)
    out = apply_D(u, xi).coeffs[1:-1]
    assert np.max(np.abs(out)) < 1e-3 * lam * np.max(np.abs(xi.coeffs))


def test_hessian_defect_on_constant_trajectory():
    cp = CriticalPoint(3, 1.1)
    s = np.linspace(0, 1, 101)
    u = constant_trajectory(cp, 8, s)
    xi = random_bump_field(u, np.random.default_rng(3), 0.2, 0.8)
    assert hessian_defect(cp, 8, xi) < 1e-12


def test_adjoint_on_constant_trajectory():
    s = np.linspace(0, 1, 1001)
    u = constant_trajectory(CriticalPoint(1), 8, s)
    rng = np.random.default_rng(0)
    xi, eta = random_bump_field(u, rng, 0.2, 0.8), random_bump_field(u, rng, 0.3, 0.9)
    assert adjoint_check(u, xi, eta) < 1e-12
    zero = CylinderField.zeros_like(u)
    assert adjoint_check(u, zero, zero) == 0.0


def test_adjoint_second_order_on_connecting_trajectory():
    errs = []
    for r in (1, 2):
        u = shoot_unstable(1, 1.0, CFG.replace(step=CFG.step / r))
        s_end = 0.283
        rng = np.random.default_rng(0)
        xi, eta = random_bump_field(u, rng, 0.1 * s_end, 0.9 * s_end), random_bump_field(u, rng, 0.1 * s_end, 0.9 * s_end)
        errs.append(adjoint_check(u, xi, eta))
    assert errs[0] < 1e-3
    assert errs[1] <= 0.3 * errs[0]


def test_fd_check_second_order(connecting):
    xi = random_bump_field(connecting, np.random.default_rng(1), 0.03, 0.25)
    d3, d4 = fd_check(connecting, xi, 1e-3), fd_check(connecting, xi, 1e-4)
    assert d4 < 1e-5
    assert np.log10(d3 / d4) > 1.8
    assert fd_check(connecting, CylinderField.zeros_like(connecting), 1e-4) == 0.0


def test_interval_closure(connecting):
    xi = random_bump_field(connecting, np.random.default_rng(2), 0.03, 0.25)
    assert interval_closure_defect(connecting, xi, 1) <= 1e-14
    # eta supported in V_1 maps into V_1
    mask = np.zeros(connecting.coeffs.shape[1], bool)
    mask[[1, 2, 9, 10]] = True
    eta = CylinderField(connecting.s_grid, xi.coeffs * mask)
    for out in (apply_D(connecting, eta), apply_D_adjoint(connecting, eta)):
        assert np.all(out.coeffs[:, ~mask] == 0.0)


def test_grid_mismatch(connecting):
    other = CylinderField(connecting.s_grid + 1.0, np.zeros_like(connecting.coeffs))
    with pytest.raises(GridMismatch):
        apply_D(connecting, other)


def test_cascade_indices():
    assert cascade_index("max", 1) == 2
    assert cascade_index("min", 1) == 1
    assert cascade_index("min", 4) == 7
    assert fredholm_index(("min", 2), ("max", 1)) == 1
    assert fredholm_index(("min", 3), ("max", 2)) == 1
    assert fredholm_index(("max", 1), ("min", 1)) == 1
    with pytest.raises(ValueError):
        cascade_index("saddle", 1)
    with pytest.raises(ValueError):
        cascade_index("min", 0)


@pytest.mark.parametrize("k", range(1, 11))
def test_fredholm_chain(k):
    assert set(fredholm_chain(k).values()) == {1}


def test_kernel_vector_at_phase_zero_is_sin_mode():
    v = kernel_vector(CriticalPoint(1), 3)
    assert np.flatnonzero(np.abs(v) > 1e-12).tolist() == [4]
