"""Hessian of the action at critical loops and its spectrum.

At a critical point the Hessian (taken with respect to ``inner_metric``) is
diagonal in the Fourier basis once the mode-k plane is rotated by the phase
of the critical point. Its eigenvalues are, with ``mu_n = 4 pi^2 (n^2 - k^2)``:

* ``mu_0 = -4 pi^2 k^2`` on the constants (multiplicity 1),
* ``mu_n`` on the cos/sin pair of mode ``n != k`` (multiplicity 2),
* ``0`` on the tangent of the critical circle (multiplicity 1),
* ``48 pi^2 k^2`` on the radial direction of the circle (multiplicity 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .critical import CriticalPoint, expand
from .errors import EigenFailure
from .fourier import FourierLoop, laplace_symbol, norm_sq_vec, parseval_weights

FOUR_PI_SQ = 4.0 * math.pi**2
ZERO_TOL = 1e-8


@dataclass
class HessianSpectrumReport:
    k: int
    eigenpairs: list[tuple[float, int, str]]
    morse_index: int
    nullity: int
    spectral_gap: float
    truncation: int
    eigenvalues: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "truncation": self.truncation,
            "morse_index": self.morse_index,
            "nullity": self.nullity,
            "spectral_gap": self.spectral_gap,
            "eigenpairs": [
                {"eigenvalue": v, "multiplicity": m, "label": lab} for v, m, lab in self.eigenpairs
            ],
        }


def _check_truncation(k: int, n_modes: int) -> None:
    if n_modes <= k:
        raise ValueError(
            f"truncation N={n_modes} must exceed k={k}: the spectrum needs mode k+1"
        )


def hessian_apply(cp: CriticalPoint, xi: FourierLoop) -> FourierLoop:
    """Apply the Hessian operator at the critical loop ``cp`` to ``xi``.

    Uses the general formula ``-xi'' + alpha xi - 2/|q|^2 (2 alpha - 1/|q|^6) <q, xi> q``.
    """
    n = max(xi.n_modes, cp.k)
    v = xi.padded(n).to_vector()
    q = expand(cp, n).to_vector()
    lap = laplace_symbol(n)
    p = norm_sq_vec(q)
    alpha = -((2.0 * math.pi * cp.k) ** 2)
    qv = float(np.dot(parseval_weights(n) * q, v))
    out = (lap + alpha) * v - (2.0 / p) * (2.0 * alpha - 1.0 / p**3) * qv * q
    return FourierLoop.from_vector(out)


def hessian_matrix(cp: CriticalPoint, n_modes: int) -> np.ndarray:
    """Matrix of ``hessian_apply`` on the flat coefficient vector ``[a0, a, b]``."""
    if n_modes < cp.k:
        raise ValueError(f"truncation {n_modes} cannot hold mode {cp.k}")
    dim = 2 * n_modes + 1
    cols = [hessian_apply(cp, FourierLoop.from_vector(e)).to_vector() for e in np.eye(dim)]
    return np.column_stack(cols)


def shift_rotation(cp: CriticalPoint, n_modes: int) -> np.ndarray:
    """Orthogonal map from standard coefficients to the phase-shifted basis.

    Only the mode-k plane changes: the new coordinates are the coefficients of
    ``cos 2 pi k (t + sigma)`` and ``sin 2 pi k (t + sigma)``.
    """
    r = np.eye(2 * n_modes + 1)
    i, j = cp.k, n_modes + cp.k
    c, s = math.cos(cp.phase), math.sin(cp.phase)
    r[i, i], r[i, j] = c, -s
    r[j, i], r[j, j] = s, c
    return r


def closed_form_eigenvalues(k: int, n_modes: int) -> list[tuple[float, int, str]]:
    """Closed-form ``(eigenvalue, multiplicity, label)`` list, sorted ascending."""
    pairs = [(-FOUR_PI_SQ * k * k, 1, "mu_0"), (0.0, 1, "mu_k"), (12.0 * (2.0 * math.pi * k) ** 2, 1, "mu_hat_k")]
    pairs += [(FOUR_PI_SQ * (n * n - k * k), 2, f"mu_{n}") for n in range(1, n_modes + 1) if n != k]
    return sorted(pairs, key=lambda p: p[0])


def _report(k: int, n_modes: int, eigvals: np.ndarray, pairs, zero_tol: float) -> HessianSpectrumReport:
    nonzero = np.abs(eigvals[np.abs(eigvals) >= zero_tol])
    return HessianSpectrumReport(
        k=k,
        eigenpairs=pairs,
        morse_index=int(np.sum(eigvals < -zero_tol)),
        nullity=int(np.sum(np.abs(eigvals) < zero_tol)),
        spectral_gap=float(nonzero.min()),
        truncation=n_modes,
        eigenvalues=eigvals,
    )


def spectrum_closed_form(k: int, n_modes: int) -> HessianSpectrumReport:
    _check_truncation(k, n_modes)
    pairs = closed_form_eigenvalues(k, n_modes)
    eigvals = np.sort(np.repeat([p[0] for p in pairs], [p[1] for p in pairs]))
    return _report(k, n_modes, eigvals, pairs, ZERO_TOL)


def spectrum_numeric(cp: CriticalPoint, n_modes: int, zero_tol: float = ZERO_TOL) -> HessianSpectrumReport:
    """Diagonalize ``hessian_matrix`` and group eigenvalues into labelled clusters."""
    _check_truncation(cp.k, n_modes)
    h = hessian_matrix(cp, n_modes)
    try:
        eigvals = np.linalg.eigvalsh(0.5 * (h + h.T))
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    reference = closed_form_eigenvalues(cp.k, n_modes)
    ref_vals = np.array([p[0] for p in reference])

    pairs = []
    start = 0
    for i in range(1, eigvals.size + 1):
        if i == eigvals.size or eigvals[i] - eigvals[i - 1] > 1e-6 * max(1.0, abs(eigvals[i])):
            cluster = eigvals[start:i]
            value = float(cluster.mean())
            label = reference[int(np.argmin(np.abs(ref_vals - value)))][2]
            pairs.append((value, cluster.size, label))
            start = i
    return _report(cp.k, n_modes, eigvals, pairs, zero_tol)


def eigenprojectors(cp: CriticalPoint, n_modes: int, shifted: bool = True) -> dict[str, np.ndarray]:
    """Orthogonal projector onto each closed-form eigenspace, keyed by label.

    With ``shifted=True`` the projectors are written in the phase-shifted basis,
    where they do not depend on the phase.
    """
    h = hessian_matrix(cp, n_modes)
    eigvals, vecs = np.linalg.eigh(0.5 * (h + h.T))
    if shifted:
        vecs = shift_rotation(cp, n_modes) @ vecs
    out = {}
    for value, _, label in closed_form_eigenvalues(cp.k, n_modes):
        sel = np.abs(eigvals - value) < 1e-6 * max(1.0, abs(value))
        out[label] = vecs[:, sel] @ vecs[:, sel].T
    return out


def kernel_vector(cp: CriticalPoint, n_modes: int) -> np.ndarray:
    """Unit eigenvector of the eigenvalue of smallest magnitude."""
    h = hessian_matrix(cp, n_modes)
    eigvals, vecs = np.linalg.eigh(0.5 * (h + h.T))
    return vecs[:, int(np.argmin(np.abs(eigvals)))]


def verify_distinctness(k: int, n_max: int) -> bool:
    """Check that the radial eigenvalue ``48 pi^2 k^2`` equals no ``mu_n``, n <= n_max.

    In units of ``4 pi^2`` the comparison is the integer identity
    ``12 k^2 == n^2 - k^2``, i.e. ``13 k^2 == n^2``.
    """
    if n_max < k:
        raise ValueError("n_max must be at least k")
    r = math.isqrt(13 * k * k)
    thirteen_k2_is_square = r * r == 13 * k * k
    collision = any(12 * k * k == n * n - k * k for n in range(0, n_max + 1))
    return not thirteen_k2_is_square and not collision


def spectral_gap(k: int) -> float:
    """Smallest nonzero ``|eigenvalue|`` at ``C_k``: ``4 pi^2 (2k - 1)``."""
    if k < 1:
        raise ValueError("k must be positive")
    return FOUR_PI_SQ * (2 * k - 1)


def restricted_morse_index(cp: CriticalPoint, modes: tuple[int, ...], zero_tol: float = ZERO_TOL) -> int:
    """Morse index of the action restricted to the span of the given Fourier modes.

    ``modes=(k, k + 1)`` gives the index on the 4-dimensional subspace ``V_k``.
    """
    n = max(max(modes), cp.k)
    idx = [m for m in modes] + [n + m for m in modes]
    h = hessian_matrix(cp, n)[np.ix_(idx, idx)]
    return int(np.sum(np.linalg.eigvalsh(0.5 * (h + h.T)) < -zero_tol))
