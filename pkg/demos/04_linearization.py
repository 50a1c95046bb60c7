"""
The linearized operator along a flow line
=========================================

Finite differences of the discrete heat equation agree with ``D_u`` to
second order in the increment, and ``D_u`` and its adjoint satisfy the
pairing identity up to an error that is second order in the step.
"""

from freefall import SolverConfig
from freefall.linearization import fredholm_chain, lincheck_report

rep = lincheck_report(1, 1.0, SolverConfig())
print("adjoint discrepancy at h, h/2, h/4:", rep["adjoint_discrepancy"])
print("observed order:", round(rep["adjoint_order"], 3))
print("fd deviation:", rep["fd_deviation"], "order", round(rep["fd_order"], 3))
print("non-local term outside V_1:", rep["interval_closure_defect"])

for k in (1, 2, 3):
    print(f"index chain for m_{k + 1} -> M_{k}:", fredholm_chain(k))
