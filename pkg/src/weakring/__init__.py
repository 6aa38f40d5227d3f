"""Weak-instance analysis of Poly-LWE and Ring-LWE over general number rings."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .poly import IntPolynomial, trinomial  # noqa: F401
from .numtheory import PrimeModulus, factorize, is_prime, multiplicative_order  # noqa: F401
from .ringcore import (RootInfo, cyclotomic_poly, discriminant_abs, find_roots_mod,  # noqa: F401
                       is_probably_irreducible, poly_eval_mod, splits_completely)
