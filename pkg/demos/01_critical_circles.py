"""
Critical circles of the free-fall action
========================================

Every critical loop is a single Fourier mode ``c_k cos(2 pi k t + phi)``.
The whole circle of phases has the same action, which grows like
``k^(2/3)``.
"""

import math

import numpy as np

from freefall import CriticalPoint, FourierLoop, action, critical_value, expand, find_critical, gradient
from freefall.critical import amplitude

# amplitudes and critical values for the first few circles
for k in range(1, 6):
    q = expand(CriticalPoint(k), 16)
    print(f"k={k}  c_k={amplitude(k):.10f}  B={action(q):.10f}  closed form={critical_value(k):.10f}")

# the action does not see the phase
values = [action(expand(CriticalPoint(3, phi), 16)) for phi in np.linspace(0, 2 * math.pi, 9)]
print("spread of B over C_3:", max(values) - min(values))

# Newton from a perturbed loop finds the circle again
seed = 1.2 * expand(CriticalPoint(2, 0.4), 8) + FourierLoop.mode(2, 8, "sin", 0.05)
q = find_critical(seed)
print("recovered amplitude:", q.amplitudes()[1], "gradient sup-norm:", np.abs(gradient(q).to_vector()).max())
