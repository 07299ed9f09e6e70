"""Twistor-space bilocal phases and gravitationally induced entanglement.

Modules
-------
spinors     two-component spinors, points and the Hermitian matrix map
twistors    twistors, the infinity twistor, incidence and SL(4,C) actions
bitwistor   lines in twistor space, Plucker coordinates, GL(2,C) actions
kernel      twistor kernels and their reduction to the spacetime interval
phase       bilocal phases over worldlines and the static limit
qgem        the two-mass entanglement protocol
"""
__version__ = "0.1.0"
