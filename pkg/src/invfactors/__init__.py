"""Invariant-factor densities of elliptic curves over Q.

For a non-CM elliptic curve E/Q and j >= 1, the density of primes p whose
group E(F_p) has smallest invariant factor j is a Mobius sum over
division-field degrees.  This package computes that density exactly up to
a rational interval from the mod-m Galois image, decides its positivity
exactly, detects coincidences of division fields, and validates everything
against a brute-force finite-field point-counting harness.
"""

from .numtheory import mobius, psi
from .glgroup import (
    BudgetExceededError,
    ModMatrix,
    ModulusMismatchError,
    NonInvertibleMatrixError,
    ResidueGroup,
    SubgroupClosure,
    close,
    commutator_subgroup,
    det_image,
    full_gl2,
    full_preimage,
    intersect_sl2,
    kernel_of_reduction,
    level,
    mat_det,
    mat_inv,
    mat_mul,
    order_mod,
    order_mod_extended,
    reduce_mat,
    reduce_subgroup,
    serre_modulus,
    serre_subgroup,
)

__version__ = "0.1.0"
