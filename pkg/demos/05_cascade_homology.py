"""
Counting flow lines and the cascade complex
===========================================

The evaluation map sends an unstable direction at ``m_{k+1}`` to the limit
phase on ``C_k``. Solutions of ``ev = M_k`` are the connecting flow lines,
counted mod 2. The resulting complex has homology in degree 1 (plus the top
generator, an artifact of truncating at K circles).

This sweeps 4 evaluation maps and takes about half a minute.
"""

import numpy as np

from freefall import SolverConfig, build_complex, count_mod2, evaluation_map, homology, select_M
from freefall.cascade import circle_distance

cfg = SolverConfig()
table = evaluation_map(1, cfg)
print("ev(theta) + theta mod 2 pi, max:", np.max(circle_distance(table.ev_phases, -table.thetas)))
M = select_M(1, table, 0.0, cfg)
print(f"M_1 = {M:.6f}, crossings: {count_mod2(table, M, cfg)}")

cx = build_complex(5, cfg, tables={1: table})
print("boundary:")
print(cx.boundary)
res = homology(cx)
print("Betti numbers:", res.nonzero())
print("degree-1 class:", res.representatives[1])
