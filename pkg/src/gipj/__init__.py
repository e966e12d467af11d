"""Representation formulas, blow-up analysis and verification tools for the
generalized inviscid Proudman-Johnson equation

    u_xt + u u_xx - lam u_x^2 = I(t),   I(t) = -(lam + 1) int_0^1 u_x^2 dx,

with periodic boundary conditions on [0, 1].
"""

__version__ = "0.1.0"
