"""Numerical laboratory for reaction-diffusion dynamics on thin 2-D domains.

A thin domain squeezed in the y-direction degenerates, as the squeeze
factor goes to zero, to a metric graph carrying a weighted second-order
operator with Kirchhoff balance at the vertices.  This package builds
that graph from rectangle unions, solves the associated eigenproblems
(per edge, direct sum, and coupled), verifies the spectral gap needed
for low-dimensional invariant manifolds, constructs those manifolds by
an exponential-weight fixed point, and measures how spectra, attractors
and reduced flows converge as the squeeze factor shrinks.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = ("geometry", "spectra", "squeeze", "gaps", "nonlin",
               "manifold", "dynamics", "family", "errors", "output", "cli")

__all__ = list(_SUBMODULES) + ["__version__"]


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f"thinlab.{name}")
    raise AttributeError(f"module 'thinlab' has no attribute {name!r}")
