"""Quantized cutting-and-stacking skew products on the torus.

Modules, from the classical side to the quantum side:

- ``cutstack``: exact-rational stacks, programs, IETs and other builders
- ``skew``: the skew product and trigonometric observables
- ``discretize``: lattice bijections from stack families, delta_N, schedules
- ``hilbert``: states, exact phases, Gaussian test states
- ``qmap``: the quantized map and its orbit spectrum
- ``weyl``: Weyl quantization, traces, Egorov defects, QE variance
- ``qlimits``: orbit measures, distances, densities, sweeps
- ``cli``: command-line front end
"""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
