"""Critical circles of the action and a Newton solver to locate them numerically.

The critical set is a disjoint union of circles ``C_k``: the time shifts of
``c_k cos(2 pi k t)``. A point on ``C_k`` is stored as ``(k, phase)`` where
``phase`` is the angle in the ``(a_k, b_k)`` coefficient plane, so that the
expansion is ``a_k = c_k cos(phase)``, ``b_k = -c_k sin(phase)``. A time shift
by ``sigma`` corresponds to ``phase = 2 pi k sigma``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergence
from .fourier import (
    FourierLoop,
    action_vec,
    alpha_derivative_vec,
    alpha_vec,
    gradient_vec,
    laplace_symbol,
    norm_sq_vec,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def _check_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise ValueError(f"circle label k must be a positive integer, got {k!r}")
    return int(k)


def amplitude(k: int) -> float:
    """Radius ``c_k = 2^(-1/6) (pi k)^(-1/3)`` of the k-th critical circle."""
    k = _check_k(k)
    return 2.0 ** (-1.0 / 6.0) * (math.pi * k) ** (-1.0 / 3.0)


def critical_value(k: int) -> float:
    """Action on ``C_k``: ``3 * 2^(1/3) * (pi k)^(2/3)``."""
    k = _check_k(k)
    return 3.0 * 2.0 ** (1.0 / 3.0) * (math.pi * k) ** (2.0 / 3.0)


def morse_index_formula(k: int) -> int:
    return 2 * _check_k(k) - 1


@dataclass(frozen=True)
class CriticalPoint:
    k: int
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k", _check_k(self.k))
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)

    def to_dict(self) -> dict:
        return {"k": self.k, "phase": self.phase}

    @classmethod
    def from_dict(cls, data: dict) -> CriticalPoint:
        return cls(int(data["k"]), float(data["phase"]))


def expand(cp: CriticalPoint, n_modes: int) -> FourierLoop:
    """Fourier coefficients of the critical loop ``cp`` at truncation ``n_modes``."""
    if n_modes < cp.k:
        raise ValueError(f"truncation {n_modes} cannot hold mode {cp.k}")
    c = amplitude(cp.k)
    a = np.zeros(n_modes)
    b = np.zeros(n_modes)
    a[cp.k - 1] = c * math.cos(cp.phase)
    b[cp.k - 1] = -c * math.sin(cp.phase)
    return FourierLoop(0.0, a, b)


def tangent(cp: CriticalPoint, n_modes: int) -> FourierLoop:
    """Derivative of ``expand(k, phase)`` with respect to the phase."""
    if n_modes < cp.k:
        raise ValueError(f"truncation {n_modes} cannot hold mode {cp.k}")
    c = amplitude(cp.k)
    a = np.zeros(n_modes)
    b = np.zeros(n_modes)
    a[cp.k - 1] = -c * math.sin(cp.phase)
    b[cp.k - 1] = -c * math.cos(cp.phase)
    return FourierLoop(0.0, a, b)


def gradient_jacobian(vec: np.ndarray) -> np.ndarray:
    """Jacobian of the coefficient map ``q -> (lap + alpha_q) q``."""
    lap = laplace_symbol((vec.size - 1) // 2)
    jac = np.outer(vec, alpha_derivative_vec(vec))
    jac[np.diag_indices_from(jac)] += lap + alpha_vec(vec, lap)
    return jac


def find_critical(
    seed: FourierLoop,
    grad_tol: float = 1e-10,
    max_iters: int = 200,
    escape_norm_sq: float = 1e6,
) -> FourierLoop:
    """Damped Newton iteration for a zero of the gradient, starting at ``seed``.

    The Jacobian is singular along the critical circle, so each Newton step
    is the minimum-norm least-squares solution. The step is halved until the
    gradient norm decreases; if that fails a small explicit gradient-descent
    step is taken instead.

    Raises NonConvergence after ``max_iters`` or when the iterates run off to
    infinity, and DomainError if they approach the zero loop.
    """
    x = seed.to_vector().copy()
    lap = laplace_symbol(seed.n_modes)
    if norm_sq_vec(x) < 1e-10:
        raise DomainError("seed is (numerically) the zero loop")
    g = gradient_vec(x, lap)
    for it in range(max_iters):
        if np.max(np.abs(g)) < grad_tol:
            log.debug("find_critical converged after %d iterations", it)
            return FourierLoop.from_vector(x)
        jac = gradient_jacobian(x)
        step, *_ = np.linalg.lstsq(jac, -g, rcond=1e-10)
        gnorm = np.linalg.norm(g)
        t = 1.0
        for _ in range(40):
            trial = x + t * step
            if norm_sq_vec(trial) > 1e-10:
                g_trial = gradient_vec(trial, lap)
                if np.linalg.norm(g_trial) < gnorm:
                    break
            t *= 0.5
        else:
            # descent fallback: a short explicit step of the negative gradient flow
            trial = x - 1e-3 / (1.0 + abs(action_vec(x, lap))) * g
            g_trial = gradient_vec(trial, lap)
        x, g = trial, g_trial
        p = norm_sq_vec(x)
        if p < 1e-10:
            raise DomainError("Newton iterates approach the zero loop")
        if p > escape_norm_sq:
            raise NonConvergence(f"Newton iterates escape to infinity (norm^2 = {p:.3e})")
    raise NonConvergence(f"no critical point within {max_iters} iterations")
