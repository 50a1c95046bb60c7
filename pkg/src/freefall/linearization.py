"""Linearized heat-flow operator along a trajectory, its adjoint, and index bookkeeping.

Fields along a trajectory are sampled on the trajectory's flow-time grid.
Flow-time derivatives are second-order central differences (one-sided
second order at the two ends), via ``numpy.gradient``. The pairing used for
adjoints is ``<xi, eta>_u = int 4 |u_s|^2 <xi_s, eta_s> ds`` with the trapezoid
rule in ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .critical import CriticalPoint, expand, morse_index_formula
from .errors import DomainError, GridMismatch
from .fourier import ZERO_LOOP_TOL, FourierLoop, action, laplace_symbol, parseval_weights
from .heatflow import FlowTrajectory
from .hessian import restricted_morse_index


@dataclass
class CylinderField:
    """Perturbation ``xi_s`` along a trajectory; ``coeffs[i]`` is a flat coefficient vector."""

    s_grid: np.ndarray
    coeffs: np.ndarray
    support: tuple[float, float] | None = None

    def __post_init__(self):
        self.s_grid = np.asarray(self.s_grid, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape[0] != self.s_grid.size:
            raise GridMismatch("field and grid lengths differ")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("field values must be finite")
        if self.support is not None:
            lo, hi = self.support
            outside = (self.s_grid < lo) | (self.s_grid > hi)
            if np.any(self.coeffs[outside] != 0.0):
                raise ValueError("field is nonzero outside its declared support")

    @property
    def values(self) -> list[FourierLoop]:
        return [FourierLoop.from_vector(c) for c in self.coeffs]

    @classmethod
    def zeros_like(cls, traj: FlowTrajectory) -> CylinderField:
        return cls(traj.s_grid.copy(), np.zeros_like(traj.coeffs))

    @classmethod
    def from_function(cls, s_grid, fn, support=None) -> CylinderField:
        """Sample ``fn(s) -> coefficient vector`` on the grid."""
        s_grid = np.asarray(s_grid, dtype=float)
        return cls(s_grid, np.array([fn(s) for s in s_grid]), support)


def bump(s, lo: float, hi: float):
    """Smooth compactly supported bump on ``[lo, hi]`` with peak value 1."""
    s = np.asarray(s, dtype=float)
    x = (2.0 * s - lo - hi) / (hi - lo)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def constant_trajectory(cp: CriticalPoint, n_modes: int, s_grid) -> FlowTrajectory:
    """The stationary flow line sitting at the critical loop ``cp``."""
    s_grid = np.asarray(s_grid, dtype=float)
    q = expand(cp, n_modes)
    return FlowTrajectory(
        s_grid=s_grid,
        coeffs=np.tile(q.to_vector(), (s_grid.size, 1)),
        converged=True,
        action_values=np.full(s_grid.size, action(q)),
        limit_circle=cp.k,
        limit_phase=cp.phase,
    )


def _check_grid(u: FlowTrajectory, f: CylinderField) -> None:
    if f.s_grid.shape != u.s_grid.shape or not np.array_equal(f.s_grid, u.s_grid):
        raise GridMismatch("field is not sampled on the trajectory's flow-time grid")
    if f.coeffs.shape != u.coeffs.shape:
        raise GridMismatch(f"field shape {f.coeffs.shape} != trajectory shape {u.coeffs.shape}")


def _ds(s_grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.gradient(values, s_grid, axis=0, edge_order=2)


class _Coefficients:
    """Per-sample scalars of the base trajectory that enter ``D_u`` and its adjoint."""

    def __init__(self, u: FlowTrajectory):
        n = u.n_modes
        self.lap = laplace_symbol(n)
        self.w = parseval_weights(n)
        U = u.coeffs
        self.U = U
        self.p = U[:, 0] ** 2 + 0.5 * np.sum(U[:, 1:] ** 2, axis=1)
        if np.any(self.p < ZERO_LOOP_TOL):
            raise DomainError("trajectory touches the zero loop")
        self.d = 0.5 * np.sum(self.lap[1:] * U[:, 1:] ** 2, axis=1)
        self.alpha = self.d / self.p - 0.5 / self.p**3
        self.Utt = -self.lap * U
        # coefficient of <u_s, .> u in the derivative of alpha
        self.c = self.d / self.p**2 - 1.5 / self.p**4

    def dot(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        return np.sum(self.w * f * g, axis=1)

    def alpha_derivative(self, X: np.ndarray) -> np.ndarray:
        return -2.0 * self.dot(self.Utt, X) / self.p - 2.0 * self.c * self.dot(self.U, X)


def apply_D(u: FlowTrajectory, xi: CylinderField) -> CylinderField:
    """Linearization ``D_u xi = d/ds xi - xi'' + alpha_s xi + (d alpha_s . xi_s) u``.

    The last coefficient is ``-2/|u|^2 (<u'', xi> + (alpha - 1/|u|^6) <u, xi>)``,
    the form valid for any cylinder ``u`` (not only exact flow lines).
    """
    _check_grid(u, xi)
    co = _Coefficients(u)
    X = xi.coeffs
    out = _ds(u.s_grid, X) + (co.lap + co.alpha[:, None]) * X + co.alpha_derivative(X)[:, None] * co.U
    return CylinderField(u.s_grid, out)


def apply_D_adjoint(u: FlowTrajectory, eta: CylinderField) -> CylinderField:
    """Adjoint of ``apply_D`` with respect to the pairing ``<., .>_u``."""
    _check_grid(u, eta)
    co = _Coefficients(u)
    E = eta.coeffs
    U_s = _ds(u.s_grid, co.U)
    u_eta = co.dot(co.U, E)
    out = (
        -_ds(u.s_grid, E)
        + (co.lap + co.alpha[:, None]) * E
        - (2.0 * co.dot(co.U, U_s) / co.p)[:, None] * E
        - (2.0 * u_eta / co.p)[:, None] * co.Utt
        - (2.0 * co.c * u_eta)[:, None] * co.U
    )
    return CylinderField(u.s_grid, out)


def inner_u(u: FlowTrajectory, f: CylinderField, g: CylinderField) -> float:
    """``int 4 |u_s|^2 <f_s, g_s> ds`` by the trapezoid rule."""
    co = _Coefficients(u)
    return float(np.trapezoid(4.0 * co.p * co.dot(f.coeffs, g.coeffs), u.s_grid))


def adjoint_check(u: FlowTrajectory, xi: CylinderField, eta: CylinderField) -> float:
    """Relative mismatch between ``<D xi, eta>_u`` and ``<xi, D* eta>_u``."""
    lhs = inner_u(u, apply_D(u, xi), eta)
    rhs = inner_u(u, xi, apply_D_adjoint(u, eta))
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-30)


def heat_residual(s_grid: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Discrete ``F(u) = d/ds u - u'' + alpha_s u`` for a sampled cylinder."""
    n = (coeffs.shape[1] - 1) // 2
    lap = laplace_symbol(n)
    p = coeffs[:, 0] ** 2 + 0.5 * np.sum(coeffs[:, 1:] ** 2, axis=1)
    if np.any(p < ZERO_LOOP_TOL):
        raise DomainError("cylinder touches the zero loop")
    d = 0.5 * np.sum(lap[1:] * coeffs[:, 1:] ** 2, axis=1)
    alpha = d / p - 0.5 / p**3
    return _ds(s_grid, coeffs) + (lap + alpha[:, None]) * coeffs


def fd_check(u: FlowTrajectory, xi: CylinderField, tau: float) -> float:
    """Relative deviation of the central difference of ``F`` along ``xi`` from ``D_u xi``.

    Measured in the norm of ``<., .>_u``; the deviation is ``O(tau^2)`` because
    ``apply_D`` uses the same flow-time stencil as ``F``.
    """
    _check_grid(u, xi)
    dF = (heat_residual(u.s_grid, u.coeffs + tau * xi.coeffs)
          - heat_residual(u.s_grid, u.coeffs - tau * xi.coeffs)) / (2.0 * tau)
    d_xi = apply_D(u, xi)
    diff = CylinderField(u.s_grid, dF - d_xi.coeffs)
    num = inner_u(u, diff, diff)
    den = inner_u(u, d_xi, d_xi)
    if den == 0.0:
        return float(np.sqrt(num))
    return float(np.sqrt(num / den))


# --- index bookkeeping ----------------------------------------------------


def _kind_k(g) -> tuple[str, int]:
    if isinstance(g, tuple):
        kind, k = g
    else:
        kind, k = g.kind, g.k
    if kind not in ("min", "max"):
        raise ValueError(f"generator kind must be 'min' or 'max', got {kind!r}")
    if k < 1:
        raise ValueError("generator label k must be positive")
    return kind, int(k)


def cascade_index(kind: str, k: int) -> int:
    """Degree of ``M_k`` (``2k``) or ``m_k`` (``2k - 1``): Morse index plus b-index."""
    kind, k = _kind_k((kind, k))
    return 2 * k if kind == "max" else 2 * k - 1


def fredholm_index(source, target) -> int:
    """Cascade index difference ``ind(source) - ind(target)``; generators are ``(kind, k)``."""
    return cascade_index(*_kind_k(source)) - cascade_index(*_kind_k(target))


def fredholm_chain(k: int) -> dict[str, int]:
    """Every expression in the chain of equalities for the index of ``m_{k+1} -> M_k``.

    The restricted Morse indices on ``V_k`` are computed from the Hessian,
    not assumed; all entries must equal 1.
    """
    ind_upper = restricted_morse_index(CriticalPoint(k + 1), (k, k + 1))
    ind_lower = restricted_morse_index(CriticalPoint(k), (k, k + 1))
    b_min, b_max = 0, 1
    return {
        "restricted_cascade_difference": (ind_upper + b_min) - (ind_lower + b_max),
        "full_morse_plus_b_difference": (morse_index_formula(k + 1) + b_min)
        - (morse_index_formula(k) + b_max),
        "cascade_index_difference": cascade_index("min", k + 1) - cascade_index("max", k),
        "fredholm_index": fredholm_index(("min", k + 1), ("max", k)),
    }


# --- validation reports ---------------------------------------------------


def interval_closure_defect(u: FlowTrajectory, xi: CylinderField, k: int) -> float:
    """Largest deviation, over modes outside ``{k, k+1}``, of ``apply_D`` from its diagonal part.

    For a trajectory inside ``V_k`` the non-local term is a multiple of ``u``
    and contributes nothing outside ``V_k``, so the result should be 0.
    """
    _check_grid(u, xi)
    n = u.n_modes
    co = _Coefficients(u)
    diag = _ds(u.s_grid, xi.coeffs) + (co.lap + co.alpha[:, None]) * xi.coeffs
    modes = np.concatenate(([0], np.arange(1, n + 1), np.arange(1, n + 1)))
    outside = (modes < k) | (modes > k + 1)
    return float(np.max(np.abs(apply_D(u, xi).coeffs[:, outside] - diag[:, outside]), initial=0.0))


def hessian_defect(cp: CriticalPoint, n_modes: int, xi: CylinderField) -> float:
    """Along the stationary trajectory at ``cp``, ``apply_D - d/ds`` against ``hessian_apply`` per sample."""
    from .hessian import hessian_apply

    u = constant_trajectory(cp, n_modes, xi.s_grid)
    rest = apply_D(u, xi).coeffs - _ds(u.s_grid, xi.coeffs)
    ref = np.array([hessian_apply(cp, FourierLoop.from_vector(c)).to_vector() for c in xi.coeffs])
    return float(np.max(np.abs(rest - ref)) / max(1.0, float(np.max(np.abs(ref)))))


def random_bump_field(u: FlowTrajectory, rng: np.random.Generator, lo: float, hi: float) -> CylinderField:
    """``bump(s) * v`` for a random unit direction ``v`` across all modes, supported in ``[lo, hi]``."""
    v = rng.standard_normal(u.coeffs.shape[1])
    v /= np.linalg.norm(v)
    coeffs = bump(u.s_grid, lo, hi)[:, None] * v
    return CylinderField(u.s_grid, coeffs, (lo, hi))


def _order(coarse: float, fine: float, ratio: float) -> float:
    if coarse <= 0.0 or fine <= 0.0:
        return float("nan")
    return float(np.log(coarse / fine) / np.log(ratio))


def lincheck_report(k: int, theta: float, cfg, seed: int = 0) -> dict:
    """fd_check and adjoint_check on the shot ``m_{k+1} -> C_k`` and on the stationary trajectory at ``C_k``.

    The adjoint discrepancy is measured at steps ``h``, ``h/2``, ``h/4`` with
    the same test fields; ``fd_check`` at ``tau`` in ``{1e-3, 1e-4}``.
    """
    from .heatflow import shoot_unstable

    trajs = [shoot_unstable(k, theta, cfg.replace(step=cfg.step / r)) for r in (1, 2, 4)]
    s_end = float(trajs[0].s_grid[-1])
    lo, hi = 0.1 * s_end, 0.9 * s_end

    def fields(u):
        rng = np.random.default_rng(seed)
        return random_bump_field(u, rng, lo, hi), random_bump_field(u, rng, lo, hi)

    adj = [adjoint_check(u, *fields(u)) for u in trajs]
    xi0, _ = fields(trajs[0])
    fd = {tau: fd_check(trajs[0], xi0, tau) for tau in (1e-3, 1e-4)}

    cp = CriticalPoint(k)
    const_adj = []
    for r in (1, 2):
        h = cfg.step / r
        u = constant_trajectory(cp, cfg.n_modes, h * np.arange(int(round(1.0 / h)) + 1))
        rng = np.random.default_rng(seed)
        const_adj.append(adjoint_check(u, random_bump_field(u, rng, 0.2, 0.8), random_bump_field(u, rng, 0.2, 0.8)))

    return {
        "k": k,
        "theta": theta,
        "converged": all(u.converged for u in trajs),
        "steps": [float(u.s_grid[1] - u.s_grid[0]) for u in trajs],
        "adjoint_discrepancy": adj,
        "adjoint_order": _order(adj[0], adj[1], 2.0),
        "adjoint_order_fine": _order(adj[1], adj[2], 2.0),
        "constant_adjoint_discrepancy": const_adj,
        "fd_deviation": {repr(t): v for t, v in fd.items()},
        "fd_order": _order(fd[1e-3], fd[1e-4], 10.0),
        "interval_closure_defect": interval_closure_defect(trajs[0], xi0, k),
        "heat_residual_max": float(np.max(np.abs(heat_residual(trajs[0].s_grid, trajs[0].coeffs)))),
    }
