import math

import numpy as np
import pytest

from freefall.cascade import (
    CascadeComplex,
    CascadeGenerator,
    EvTable,
    build_complex,
    circle_distance,
    count_mod2,
    evaluation_map,
    find_crossings,
    homology,
    restricted_complex,
    restricted_complex_check,
    select_M,
    wrap,
)
from freefall.errors import ConsistencyFailure, NoRegularValue, NotAComplex, SweepFailure
from freefall.heatflow import SolverConfig, shoot_unstable

TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def table1(small_cfg):
    return evaluation_map(1, small_cfg)


def synthetic(ev, k=1):
    n = len(ev)
    return EvTable(k, TWO_PI * np.arange(n) / n, np.asarray(ev, float) % TWO_PI, np.ones(n, bool))


def test_wrap():
    assert wrap(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap(-math.pi) == pytest.approx(math.pi)
    assert circle_distance(0.1, TWO_PI - 0.1) == pytest.approx(0.2)


def test_table_k1(table1, small_cfg):
    assert table1.converged_mask.all()
    assert table1.thetas.size == small_cfg.theta_samples
    assert np.all((table1.ev_phases >= 0) & (table1.ev_phases < TWO_PI))
    # the flow keeps the direction of the mode-k component, so ev(theta) = -theta
    assert np.max(circle_distance(table1.ev_phases, -table1.thetas)) < 1e-9
    lines = table1.to_csv().splitlines()
    assert lines[0] == "theta,ev_phase,converged" and len(lines) == small_cfg.theta_samples + 1


def test_equivariance_under_base_shift(small_cfg):
    k, psi, theta = 1, 0.8, 2.0
    delta = k * psi / (k + 1)
    # time shift by sigma: m_{k+1} phase += 2 pi (k+1) sigma, mode-k phase += 2 pi k sigma,
    # and the direction angle theta (mode-k phase -theta) moves the other way
    shifted = shoot_unstable(k, theta - delta, small_cfg, base_phase=psi).limit_phase
    plain = shoot_unstable(k, theta, small_cfg).limit_phase
    assert circle_distance(shifted, plain + delta) < 1e-9


def test_select_M_properties(table1, small_cfg):
    M = select_M(1, table1, 0.0, small_cfg)
    assert circle_distance(M, 0.0) > 0.1
    assert circle_distance(M, math.pi) < TWO_PI / small_cfg.theta_samples
    M2 = select_M(1, table1, 0.0, small_cfg, avoid=(M,))
    assert circle_distance(M2, M) > 1.0


def test_select_M_constant_table_has_no_regular_value(small_cfg):
    with pytest.raises(NoRegularValue):
        select_M(1, synthetic(np.full(72, 1.0)), 0.0, small_cfg)


def test_select_M_avoids_extremum_values(small_cfg):
    th = TWO_PI * np.arange(360) / 360
    table = synthetic(1.0 + 0.5 * np.sin(th))
    M = select_M(1, table, 0.0, small_cfg)
    assert circle_distance(M, 1.5) > 2 * TWO_PI / 360
    assert circle_distance(M, 0.5) > 2 * TWO_PI / 360


def test_select_M_rejects_wrong_table(table1, small_cfg):
    with pytest.raises(ValueError):
        select_M(2, table1, 0.0, small_cfg)


def test_count_k1_is_one(table1, small_cfg):
    M = select_M(1, table1, 0.0, small_cfg)
    assert count_mod2(table1, M, small_cfg) == (1, "odd")
    (theta,) = find_crossings(table1, M, small_cfg)
    assert circle_distance(theta, -M) < 2 * small_cfg.bisect_tol


def test_sweep_failure_when_shots_do_not_converge(small_cfg):
    with pytest.raises(SweepFailure):
        evaluation_map(1, small_cfg.replace(max_s=0.01))


def gens(K):
    out = []
    for k in range(1, K + 1):
        out += [CascadeGenerator("min", k, 2 * k - 1, 0.0), CascadeGenerator("max", k, 2 * k, math.pi)]
    return out


def chain_complex(K):
    b = np.zeros((2 * K, 2 * K), np.uint8)
    for k in range(1, K):
        b[2 * k - 1, 2 * k] = 1
    return CascadeComplex(K, gens(K), b)


@pytest.mark.parametrize("K", [1, 2, 3, 4, 5, 8])
def test_truncated_homology(K):
    res = homology(chain_complex(K))
    assert res.nonzero() == {1: 1, 2 * K: 1}
    assert res.representatives[1] == [["m_1"]]
    assert res.representatives[2 * K] == [[f"M_{K}"]]
    assert set(res.ranks) == set(range(0, 2 * K + 1))


def test_zero_boundary_gives_every_generator():
    cx = CascadeComplex(3, gens(3), np.zeros((6, 6), np.uint8))
    assert homology(cx).nonzero() == {d: 1 for d in range(1, 7)}


def test_not_a_complex():
    b = np.zeros((4, 4), np.uint8)
    b[0, 1] = b[1, 2] = 1
    with pytest.raises(NotAComplex):
        homology(CascadeComplex(2, gens(2), b))
    b = np.zeros((4, 4), np.uint8)
    b[0, 3] = 1
    with pytest.raises(NotAComplex):
        homology(CascadeComplex(2, gens(2), b))


def test_restricted_complex():
    res = homology(restricted_complex(1, 1))
    assert [res.betti(d) for d in range(4)] == [1, 0, 0, 1]
    with pytest.raises(ConsistencyFailure):
        restricted_complex_check(1, SolverConfig(), parity=0)


def test_build_complex_k1_has_no_sweeps():
    cx = build_complex(1, SolverConfig())
    assert not cx.boundary.any()
    assert homology(cx).nonzero() == {1: 1, 2: 1}
    assert cx.generators[1].phase == pytest.approx(math.pi)


def test_build_complex_k2(small_cfg, table1):
    cx = build_complex(2, small_cfg, tables={1: table1})
    assert cx.counts == {(2, 1): 1}
    assert cx.boundary.tolist() == [[0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
    assert cx.squares_to_zero() and cx.respects_degree()
    d = cx.to_dict()
    assert d["parities"] == {"m_2->M_1": 1}
    with pytest.raises(ValueError):
        build_complex(2, small_cfg, m_phases=[0.0])
    with pytest.raises(ValueError):
        build_complex(0, small_cfg)
