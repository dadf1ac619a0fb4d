"""Weierstrass parameterization, period condition and meshes of the tG and rGL families.

Submodules
----------
elliptic      theta constants, modular lambda, complete K and Jacobi functions
weierstrass   Gauss map on the branched torus, path integrals, theta_h, immersion
period        residual theta_h - theta_v, vertical solver, family tracing
asymptotics   real-line edge integrals and limits of theta_h
geometry      catenoid / ribbon meshes, fundamental units and exporters
validation    self-check suites behind ``gyre validate``
cli           command-line front end
"""

from .elliptic import EllipticModulus, jacobi_sn
from .period import FamilyCurve, SolvedPoint, solve_on_vertical, theta_v, trace_family
from .weierstrass import WeierstrassData, theta_h

__version__ = "0.1.0"

__all__ = [
    "EllipticModulus",
    "FamilyCurve",
    "SolvedPoint",
    "WeierstrassData",
    "jacobi_sn",
    "solve_on_vertical",
    "theta_h",
    "theta_v",
    "trace_family",
]
