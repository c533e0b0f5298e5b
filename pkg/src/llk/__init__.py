"""Lorentzian length-space toolkit.

Closed-form anti-de Sitter comparison geometry, warped products over
finite metric spaces, timelike curvature-bound checkers, and the rigidity
pipeline that recovers a warped-product splitting from a sampled space
containing a maximal timelike line.
"""

__version__ = "0.1.0"
