"""
Flow lines from C_{k+1} down to C_k
===================================

Starting next to ``m_{k+1}`` along an unstable direction, the heat flow stays
in the four-dimensional space spanned by modes k and k+1 and settles on
``C_k``. The tail approaches the limit at rate ``4 pi^2 (2k + 1)``.
"""

import math

from freefall import SolverConfig, shoot_unstable
from freefall.heatflow import fit_decay_rate, mode_interval_check

cfg = SolverConfig()
for k in (1, 2, 3):
    traj = shoot_unstable(k, 1.0, cfg)
    print(
        f"k={k}: converged={traj.converged} at s={traj.s_grid[-1]:.3f}, "
        f"action {traj.action_values[0]:.6f} -> {traj.action_values[-1]:.6f}, "
        f"limit phase {traj.limit_phase:.6f}"
    )
    print(f"    other modes exactly zero: {mode_interval_check(traj, k, k + 1, 0.0)}")
    rate = fit_decay_rate(traj)
    print(f"    decay rate {rate:.3f} vs {4 * math.pi**2 * (2 * k + 1):.3f}")
