"""Exact partition functions and cylinder probabilities for log-gases on the ring of integers
of a non-archimedean local field, with a Monte Carlo oracle.

Everything is a rational function of u = q**(-beta) with rational coefficients.
"""
from .canonical import canonical_Z, canonical_Z_ball, energy_distribution, verify_quad_rec
from .cylinderprob import CylinderEvent, gc_cylinder_gf, gc_cylinder_prob, prob_canonical, prob_canonical_full
from .exactnum import BigRational, RationalFunction, UPoly, rf_eval, rf_taylor
from .grandcanonical import gc_Z, occupancy_pmf
from .multicomponent import ChargeProfile, multi_canonical_Z
from .starring import StarSeries, overline, star_mul, star_pow, underline
from .ultrametric import Ball, BallFamily, complement

__version__ = "0.1.0"
