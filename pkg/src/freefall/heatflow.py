"""Non-local heat flow: the negative gradient flow of the action.

In Fourier coordinates the flow ``d/ds u = u'' - alpha(u) u`` decouples into
scalar equations ``a_n' = -((2 pi n)^2 + alpha) a_n`` coupled only through the
scalar ``alpha``. Given ``alpha`` over a step, every mode can be advanced
exactly, which removes the stiffness of the high modes; only the scalar is
solved for (see ``_exponential_step``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .critical import CriticalPoint, amplitude, critical_value, expand
from .errors import ConfigError, Divergence, DomainError, FreeFallError, NotOnCircle
from .fourier import ZERO_LOOP_TOL, FourierLoop, gradient_vec, laplace_symbol

log = logging.getLogger(__name__)

SCHEMES = ("semi_implicit_exponential", "rk4")
DIVERGENCE_NORM_SQ = 1e6
MONOTONE_SLACK = 1e-10


class MonotonicityViolation(FreeFallError):
    """The discrete flow increased the action by more than the allowed slack."""


@dataclass(frozen=True)
class SolverConfig:
    n_modes: int = 32
    step: float = 1e-3
    scheme: str = "semi_implicit_exponential"
    eps_unstable: float = 1e-4
    grad_tol: float = 1e-9
    max_s: float = 50.0
    theta_samples: int = 720
    mode_leak_tol: float = 1e-10
    slope_tol: float = 1e-3
    bisect_tol: float = 1e-6

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        for f in fields(self):
            if f.name == "scheme":
                continue
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{f.name} must be a positive number, got {value!r}")
        if int(self.n_modes) != self.n_modes or int(self.theta_samples) != self.theta_samples:
            raise ConfigError("n_modes and theta_samples must be integers")
        if self.theta_samples < 8:
            raise ConfigError("theta_samples must be at least 8")

    def replace(self, **changes) -> SolverConfig:
        data = asdict(self)
        data.update(changes)
        return SolverConfig(**data)


@dataclass
class FlowTrajectory:
    """Sampled heat-flow line. ``coeffs[i]`` is the flat coefficient vector at ``s_grid[i]``."""

    s_grid: np.ndarray
    coeffs: np.ndarray
    converged: bool
    action_values: np.ndarray
    limit_circle: int | None = None
    limit_phase: float | None = None

    @property
    def n_modes(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def states(self) -> list[FourierLoop]:
        return [FourierLoop.from_vector(c) for c in self.coeffs]

    @property
    def final(self) -> FourierLoop:
        return FourierLoop.from_vector(self.coeffs[-1])

    def __len__(self) -> int:
        return self.s_grid.size

    def state_at(self, s: float) -> FourierLoop:
        """State at the grid point nearest to flow time ``s``."""
        return FourierLoop.from_vector(self.coeffs[int(np.argmin(np.abs(self.s_grid - s)))])

    def decimated(self, max_samples: int = 2000) -> FlowTrajectory:
        stride = max(1, math.ceil(len(self) / max_samples))
        idx = np.arange(0, len(self), stride)
        if idx[-1] != len(self) - 1:
            idx = np.append(idx, len(self) - 1)
        return FlowTrajectory(
            self.s_grid[idx], self.coeffs[idx], self.converged, self.action_values[idx],
            self.limit_circle, self.limit_phase,
        )


def flow_rhs(q: FourierLoop) -> FourierLoop:
    """Right-hand side ``-grad`` of the heat flow at ``q``."""
    return FourierLoop.from_vector(-gradient_vec(q.to_vector()))


def _norms(x: np.ndarray, lap: np.ndarray) -> tuple[float, float]:
    p = float(x[0] * x[0] + 0.5 * np.dot(x[1:], x[1:]))
    if p < ZERO_LOOP_TOL:
        raise DomainError(f"flow collapsed onto the zero loop (norm^2 = {p:.3e})")
    d = float(0.5 * np.dot(lap[1:], x[1:] * x[1:]))
    return p, d


def _alpha(x: np.ndarray, lap: np.ndarray) -> float:
    p, d = _norms(x, lap)
    return d / p - 0.5 / p**3


def _exponential_step(x: np.ndarray, h: float, lap: np.ndarray) -> np.ndarray:
    # alpha is taken at the end of the step: solve a = alpha(exp(-(lap + a) h) x).
    # With a frozen at the start the radial direction of C_k (Hessian
    # eigenvalue 48 pi^2 k^2) is integrated explicitly and blows up for k >= 2
    # at h = 1e-3. The residual is strictly decreasing in a, with derivative
    # -1 - 3h/|y|^6, so Newton converges in a few iterations.
    a = _alpha(x, lap)
    for _ in range(50):
        y = np.exp(-(lap + a) * h) * x
        p, d = _norms(y, lap)
        resid = d / p - 0.5 / p**3 - a
        delta = resid / (1.0 + 3.0 * h / p**3)
        a += delta
        if abs(delta) <= 1e-15 * max(1.0, abs(a)):
            break
    return np.exp(-(lap + a) * h) * x


def _step_vec(x: np.ndarray, h: float, scheme: str, lap: np.ndarray) -> np.ndarray:
    if scheme == "semi_implicit_exponential":
        return _exponential_step(x, h, lap)

    def rhs(y):
        return -(lap + _alpha(y, lap)) * y

    k1 = rhs(x)
    k2 = rhs(x + 0.5 * h * k1)
    k3 = rhs(x + 0.5 * h * k2)
    k4 = rhs(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(q: FourierLoop, cfg: SolverConfig) -> FourierLoop:
    """Advance ``q`` by one flow-time step ``cfg.step``.

    Both schemes multiply each coefficient by a factor, so a coefficient that
    is exactly zero stays exactly zero.
    """
    x = q.to_vector()
    lap = laplace_symbol(q.n_modes)
    new = _step_vec(x, cfg.step, cfg.scheme, lap)
    _norms(new, lap)
    return FourierLoop.from_vector(new)


def project_to_circle(
    q: FourierLoop, k: int, rel_tol: float = 0.01, leak_tol: float = 1e-4
) -> float:
    """Phase of ``q`` on ``C_k``: ``atan2(-b_k, a_k)`` in ``[0, 2 pi)``.

    Raises NotOnCircle unless the mode-k amplitude is within ``rel_tol`` of
    ``c_k`` and every other mode (including the constant) is below ``leak_tol``.
    """
    if not 1 <= k <= q.n_modes:
        raise NotOnCircle(f"mode {k} not present at truncation {q.n_modes}")
    amps = q.amplitudes()
    c = amplitude(k)
    if abs(amps[k - 1] - c) > rel_tol * c:
        raise NotOnCircle(f"mode-{k} amplitude {amps[k - 1]:.6g} is not close to c_{k} = {c:.6g}")
    others = np.delete(amps, k - 1)
    leak = max(abs(q.a0), float(others.max()) if others.size else 0.0)
    if leak > leak_tol:
        raise NotOnCircle(f"mode leakage {leak:.3e} off circle {k}")
    return math.atan2(-q.sin_coeffs[k - 1], q.cos_coeffs[k - 1]) % (2.0 * math.pi)


def integrate(q0: FourierLoop, cfg: SolverConfig) -> FlowTrajectory:
    """Integrate the heat flow from ``q0`` until it settles on a critical circle.

    Stops with ``converged=True`` once the gradient sup-norm drops below
    ``cfg.grad_tol`` at a point that projects onto a critical circle, and with
    ``converged=False`` when the flow time exceeds ``cfg.max_s``.

    Raises:
        DomainError: the flow collapses onto the zero loop.
        Divergence: the flow escapes to infinity. This is detected either by
            ``|u|^2 > 1e6`` or by the action falling below the lowest critical
            value; since the action decreases along the flow, no critical
            point can be reached after that.
        MonotonicityViolation: a step increased the action beyond the slack.
    """
    n = q0.n_modes
    if n < cfg.n_modes:
        q0 = q0.padded(cfg.n_modes)
        n = cfg.n_modes
    lap = laplace_symbol(n)
    h = cfg.step
    floor = critical_value(1) - 1e-9
    x = q0.to_vector()

    states = [x]
    actions = []
    converged = False
    limit_circle = limit_phase = None
    i = 0
    while True:
        p, d = _norms(x, lap)
        if p > DIVERGENCE_NORM_SQ:
            raise Divergence(f"flow escapes to infinity at s={i * h:.4g} (norm^2 = {p:.3e})")
        act = 2.0 * p * d + 1.0 / p
        if actions and act > actions[-1] + MONOTONE_SLACK:
            raise MonotonicityViolation(
                f"action increased by {act - actions[-1]:.3e} at s={i * h:.6g}; reduce the step"
            )
        actions.append(act)
        if act < floor:
            raise Divergence(
                f"action {act:.6g} fell below the lowest critical value at s={i * h:.4g}; "
                "the flow line escapes to infinity"
            )
        alpha = d / p - 0.5 / p**3
        if np.max(np.abs((lap + alpha) * x)) < cfg.grad_tol:
            k = int(np.argmax(np.hypot(x[1 : n + 1], x[n + 1 :]))) + 1
            try:
                limit_phase = project_to_circle(FourierLoop.from_vector(x), k)
                limit_circle = k
                converged = True
                break
            except NotOnCircle:
                pass
        if i * h >= cfg.max_s:
            log.debug("integration budget max_s=%g exhausted", cfg.max_s)
            break
        x = _step_vec(x, h, cfg.scheme, lap)
        states.append(x)
        i += 1

    coeffs = np.array(states)
    return FlowTrajectory(
        s_grid=h * np.arange(coeffs.shape[0]),
        coeffs=coeffs,
        converged=converged,
        action_values=np.array(actions),
        limit_circle=limit_circle,
        limit_phase=limit_phase,
    )


def unstable_start(k: int, theta: float, cfg: SolverConfig, base_phase: float = 0.0) -> FourierLoop:
    """Initial loop ``m_{k+1} + eps (cos(theta) e_1 + sin(theta) e_2)``.

    ``e_1, e_2`` are the unit cos/sin directions of mode k, which span the
    negative eigenspace at ``C_{k+1}`` of the action restricted to ``V_k``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if cfg.n_modes < k + 1:
        raise ValueError(f"n_modes={cfg.n_modes} must be at least k+1={k + 1}")
    x = expand(CriticalPoint(k + 1, base_phase), cfg.n_modes).to_vector()
    x[k] += cfg.eps_unstable * math.cos(theta)
    x[cfg.n_modes + k] += cfg.eps_unstable * math.sin(theta)
    return FourierLoop.from_vector(x)


def shoot_unstable(k: int, theta: float, cfg: SolverConfig, base_phase: float = 0.0) -> FlowTrajectory:
    """Follow the unstable manifold of ``m_{k+1}`` inside ``V_k`` in direction ``theta``."""
    return integrate(unstable_start(k, theta, cfg, base_phase), cfg)


def mode_interval_check(traj: FlowTrajectory, k_plus: int, k_minus: int, tol: float) -> bool:
    """True iff every coefficient of a mode outside ``[k_plus, k_minus]`` stays within ``tol``.

    ``tol=0`` asks for exact zeros.
    """
    n = traj.n_modes
    modes = np.concatenate(([0], np.arange(1, n + 1), np.arange(1, n + 1)))
    outside = (modes < k_plus) | (modes > k_minus)
    if not outside.any():
        return True
    return bool(np.all(np.abs(traj.coeffs[:, outside]) <= tol))


def fit_decay_rate(traj: FlowTrajectory, lo: float = 1e-9, hi: float = 1e-4) -> float:
    """Least-squares slope of ``-log |u_s - u_final|`` over samples with distance in ``[lo, hi]``."""
    dist = np.linalg.norm(traj.coeffs - traj.coeffs[-1], axis=1)
    sel = (dist > lo) & (dist < hi)
    if sel.sum() < 3:
        raise ValueError("not enough tail samples to fit a decay rate")
    slope, _ = np.polyfit(traj.s_grid[sel], np.log(dist[sel]), 1)
    return float(-slope)
