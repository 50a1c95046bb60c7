"""
Hessian spectrum at C_k
=======================

The Hessian in the loop-dependent metric is diagonal in the Fourier
basis up to a rotation of the mode-k plane. Negative directions come from
the constants and from the modes below k, which gives Morse index 2k - 1.
"""

from freefall import CriticalPoint, spectrum_numeric
from freefall.hessian import spectral_gap

for k in (1, 2, 3):
    rep = spectrum_numeric(CriticalPoint(k, 0.3), 8)
    print(f"k={k}: index {rep.morse_index}, nullity {rep.nullity}, gap {rep.spectral_gap:.4f}"
          f" (closed form {spectral_gap(k):.4f})")
    for value, mult, label in rep.eigenpairs:
        print(f"    {label:>9}  {value:14.6f}  x{mult}")
