"""Real Fourier loops and the regularized free-fall action on them.

A loop ``q: S^1 -> R`` with ``S^1 = R/Z`` is stored by its truncated real
Fourier coefficients::

    q(t) = a0 + sum_{n=1..N} a_n cos(2 pi n t) + b_n sin(2 pi n t)

Everything the heat flow needs is diagonal in this basis, so operations work
on coefficients directly. Internally the coefficients are often flattened to
a single vector ``[a0, a_1..a_N, b_1..b_N]`` of length ``2N + 1``; the
``*_vec`` helpers operate on that layout and are what the integrators use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

ZERO_LOOP_TOL = 1e-14
QUADRATURE_NODES = 4096


def n_modes_of(vec: np.ndarray) -> int:
    return (vec.shape[-1] - 1) // 2


def wavenumbers(n_modes: int) -> np.ndarray:
    """Mode index of every slot of the flat coefficient vector."""
    n = np.arange(1, n_modes + 1, dtype=float)
    return np.concatenate(([0.0], n, n))


def parseval_weights(n_modes: int) -> np.ndarray:
    """Weights turning coefficient dot products into L^2(S^1) inner products."""
    w = np.full(2 * n_modes + 1, 0.5)
    w[0] = 1.0
    return w


def laplace_symbol(n_modes: int) -> np.ndarray:
    """Eigenvalues ``(2 pi n)^2`` of ``-d^2/dt^2`` on each coefficient slot."""
    return (2.0 * np.pi * wavenumbers(n_modes)) ** 2


@dataclass(frozen=True, eq=False)
class FourierLoop:
    """Truncated real Fourier series of a loop; immutable."""

    a0: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        a = np.array(self.cos_coeffs, dtype=float).reshape(-1)
        b = np.array(self.sin_coeffs, dtype=float).reshape(-1)
        if a.shape != b.shape or a.size < 1:
            raise ValueError("cos and sin coefficient arrays must have equal length >= 1")
        a0 = float(self.a0)
        if not (np.isfinite(a0) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("Fourier coefficients must be finite")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)

    @property
    def n_modes(self) -> int:
        return self.cos_coeffs.size

    # construction helpers

    @classmethod
    def zeros(cls, n_modes: int) -> FourierLoop:
        return cls(0.0, np.zeros(n_modes), np.zeros(n_modes))

    @classmethod
    def constant(cls, value: float, n_modes: int) -> FourierLoop:
        return cls(value, np.zeros(n_modes), np.zeros(n_modes))

    @classmethod
    def mode(cls, n: int, n_modes: int, kind: str = "cos", amplitude: float = 1.0) -> FourierLoop:
        """Single-mode loop ``amplitude * cos(2 pi n t)`` (or sin)."""
        if not 1 <= n <= n_modes:
            raise ValueError(f"mode {n} outside 1..{n_modes}")
        a = np.zeros(n_modes)
        b = np.zeros(n_modes)
        if kind == "cos":
            a[n - 1] = amplitude
        elif kind == "sin":
            b[n - 1] = amplitude
        else:
            raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
        return cls(0.0, a, b)

    @classmethod
    def from_vector(cls, vec) -> FourierLoop:
        v = np.asarray(vec, dtype=float)
        if v.ndim != 1 or v.size < 3 or v.size % 2 == 0:
            raise ValueError("coefficient vector must have odd length 2N+1 >= 3")
        n = n_modes_of(v)
        return cls(v[0], v[1 : n + 1], v[n + 1 :])

    def to_vector(self) -> np.ndarray:
        return np.concatenate(([self.a0], self.cos_coeffs, self.sin_coeffs))

    def padded(self, n_modes: int) -> FourierLoop:
        """Same loop with truncation raised to ``n_modes`` (zeros appended)."""
        if n_modes < self.n_modes:
            raise ValueError("padding cannot shrink the truncation")
        extra = np.zeros(n_modes - self.n_modes)
        return FourierLoop(
            self.a0,
            np.concatenate((self.cos_coeffs, extra)),
            np.concatenate((self.sin_coeffs, extra)),
        )

    def amplitudes(self) -> np.ndarray:
        """``sqrt(a_n^2 + b_n^2)`` for n = 1..N."""
        return np.hypot(self.cos_coeffs, self.sin_coeffs)

    # arithmetic (vector-space structure of the loop space)

    def __add__(self, other: FourierLoop) -> FourierLoop:
        u, v = _common(self, other)
        return FourierLoop.from_vector(u + v)

    def __sub__(self, other: FourierLoop) -> FourierLoop:
        u, v = _common(self, other)
        return FourierLoop.from_vector(u - v)

    def __mul__(self, scalar: float) -> FourierLoop:
        return FourierLoop.from_vector(float(scalar) * self.to_vector())

    __rmul__ = __mul__

    def __neg__(self) -> FourierLoop:
        return FourierLoop.from_vector(-self.to_vector())

    # serialization

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "a0": self.a0,
            "a": self.cos_coeffs.tolist(),
            "b": self.sin_coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> FourierLoop:
        loop = cls(data["a0"], data["a"], data["b"])
        if loop.n_modes != int(data["n_modes"]):
            raise ValueError("n_modes does not match coefficient length")
        return loop

    def to_json(self) -> str:
        # json floats use repr(), the shortest string that round-trips exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> FourierLoop:
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return f"FourierLoop(n_modes={self.n_modes}, a0={self.a0!r}, a={self.cos_coeffs!r}, b={self.sin_coeffs!r})"


def _common(q1: FourierLoop, q2: FourierLoop) -> tuple[np.ndarray, np.ndarray]:
    n = max(q1.n_modes, q2.n_modes)
    return q1.padded(n).to_vector(), q2.padded(n).to_vector()


# --- flat-vector kernels -------------------------------------------------


def norm_sq_vec(v: np.ndarray) -> float:
    return float(v[0] * v[0] + 0.5 * np.dot(v[1:], v[1:]))


def deriv_norm_sq_vec(v: np.ndarray) -> float:
    lap = laplace_symbol(n_modes_of(v))
    return float(0.5 * np.dot(lap[1:], v[1:] * v[1:]))


def alpha_vec(v: np.ndarray, lap: np.ndarray | None = None) -> float:
    if lap is None:
        lap = laplace_symbol(n_modes_of(v))
    p = float(v[0] * v[0] + 0.5 * np.dot(v[1:], v[1:]))
    _check_punctured(p)
    d = float(0.5 * np.dot(lap[1:], v[1:] * v[1:]))
    return d / p - 0.5 / p**3


def action_vec(v: np.ndarray, lap: np.ndarray | None = None) -> float:
    if lap is None:
        lap = laplace_symbol(n_modes_of(v))
    p = float(v[0] * v[0] + 0.5 * np.dot(v[1:], v[1:]))
    _check_punctured(p)
    d = float(0.5 * np.dot(lap[1:], v[1:] * v[1:]))
    return 2.0 * p * d + 1.0 / p


def gradient_vec(v: np.ndarray, lap: np.ndarray | None = None) -> np.ndarray:
    if lap is None:
        lap = laplace_symbol(n_modes_of(v))
    return (lap + alpha_vec(v, lap)) * v


def alpha_derivative_vec(v: np.ndarray) -> np.ndarray:
    """Coefficient-space gradient of ``alpha`` (used by Newton and the linearization)."""
    n = n_modes_of(v)
    lap = laplace_symbol(n)
    w = parseval_weights(n)
    p = norm_sq_vec(v)
    _check_punctured(p)
    d = deriv_norm_sq_vec(v)
    dp = 2.0 * w * v
    dd = 2.0 * w * lap * v
    return dd / p - d * dp / p**2 + 1.5 * dp / p**4


def _check_punctured(p: float) -> None:
    if p < ZERO_LOOP_TOL:
        raise DomainError(f"loop too close to the zero loop (norm^2 = {p:.3e})")


# --- public operations on FourierLoop ------------------------------------


def norm_sq(q: FourierLoop) -> float:
    """L^2 norm squared, ``a0^2 + 1/2 sum(a_n^2 + b_n^2)``."""
    return norm_sq_vec(q.to_vector())


def deriv_norm_sq(q: FourierLoop) -> float:
    """L^2 norm squared of dq/dt, ``1/2 sum (2 pi n)^2 (a_n^2 + b_n^2)``."""
    return deriv_norm_sq_vec(q.to_vector())


def inner(q1: FourierLoop, q2: FourierLoop) -> float:
    """Standard L^2 inner product; the shorter truncation is zero padded."""
    u, v = _common(q1, q2)
    return float(np.dot(parseval_weights(n_modes_of(u)) * u, v))


def inner_metric(xi1: FourierLoop, xi2: FourierLoop, q: FourierLoop) -> float:
    """The loop-dependent metric ``4 |q|^2 <xi1, xi2>`` at the base point q."""
    p = norm_sq(q)
    _check_punctured(p)
    return 4.0 * p * inner(xi1, xi2)


def alpha(q: FourierLoop) -> float:
    """Non-local coefficient ``|q'|^2/|q|^2 - 1/(2 |q|^6)``."""
    return alpha_vec(q.to_vector())


def action(q: FourierLoop) -> float:
    """The functional ``2 |q|^2 |q'|^2 + 1/|q|^2``.

    Raises DomainError on the zero loop.
    """
    return action_vec(q.to_vector())


def gradient(q: FourierLoop) -> FourierLoop:
    """Gradient ``-q'' + alpha_q q`` of the action in the metric ``inner_metric``."""
    return FourierLoop.from_vector(gradient_vec(q.to_vector()))


def synthesize(q: FourierLoop, t):
    """Evaluate the Fourier series at time(s) ``t``; accepts scalars or arrays."""
    t_arr = np.asarray(t, dtype=float)
    n = np.arange(1, q.n_modes + 1)
    phase = 2.0 * np.pi * np.multiply.outer(t_arr, n)
    values = q.a0 + np.cos(phase) @ q.cos_coeffs + np.sin(phase) @ q.sin_coeffs
    return float(values) if values.ndim == 0 else values


def synthesize_derivative(q: FourierLoop, t):
    """Pointwise dq/dt, for quadrature cross-checks."""
    t_arr = np.asarray(t, dtype=float)
    n = np.arange(1, q.n_modes + 1)
    k = 2.0 * np.pi * n
    phase = 2.0 * np.pi * np.multiply.outer(t_arr, n)
    values = np.cos(phase) @ (k * q.sin_coeffs) - np.sin(phase) @ (k * q.cos_coeffs)
    return float(values) if values.ndim == 0 else values


def quadrature_norms(q: FourierLoop, nodes: int = QUADRATURE_NODES) -> tuple[float, float]:
    """``(|q|^2, |q'|^2)`` by the periodic trapezoid rule on the synthesized loop."""
    t = np.arange(nodes) / nodes
    x = synthesize(q, t)
    dx = synthesize_derivative(q, t)
    return float(np.mean(x * x)), float(np.mean(dx * dx))
