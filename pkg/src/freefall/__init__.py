"""Regularized free-fall functional on the punctured loop space.

Fourier representation of loops, the critical circles ``C_k``, the Hessian
spectrum, the non-local heat flow, its linearization, and the cascade
Morse complex with its Z/2 homology.
"""

from .cascade import (
    CascadeComplex,
    CascadeGenerator,
    EvTable,
    HomologyResult,
    build_complex,
    count_mod2,
    evaluation_map,
    homology,
    restricted_complex_check,
    select_M,
)
from .critical import CriticalPoint, amplitude, critical_value, expand, find_critical, morse_index_formula
from .errors import *  # noqa: F403
from .fourier import FourierLoop, action, alpha, deriv_norm_sq, gradient, inner, inner_metric, norm_sq
from .heatflow import FlowTrajectory, SolverConfig, integrate, project_to_circle, shoot_unstable, step
from .hessian import HessianSpectrumReport, hessian_apply, spectrum_closed_form, spectrum_numeric
from .linearization import (
    CylinderField,
    adjoint_check,
    apply_D,
    apply_D_adjoint,
    cascade_index,
    fd_check,
    fredholm_index,
)

__version__ = "0.1.0"
