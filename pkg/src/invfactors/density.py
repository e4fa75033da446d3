"""Exact invariant-factor densities and positivity criteria.

The density attached to (E, j) is an infinite Mobius sum over division
field degrees.  It factors as an exact rational finite part (a signed sum
over the primes where j is deficient against the level) times an Euler
product, which we enclose in a rational interval with a rigorous tail
bound.  Positivity is decided exactly, by a covering test on kernels of
reduction inside the mod-m image; no floating point enters any verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from . import glgroup
from .glgroup import ModMatrix, SubgroupClosure
from .numtheory import (
    divisors,
    euler_phi,
    factorize,
    is_squarefree,
    mobius,
    prime_factors,
    primes_up_to,
    psi,
    radical,
    valuation,
)

DEFAULT_TRUNCATION = 10_000


class Verdict(str, Enum):
    ZERO = "ZERO"
    POSITIVE = "POSITIVE"


class CriterionStatus(str, Enum):
    APPLIES_POSITIVE = "APPLIES_POSITIVE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class PrimeSetS:
    """Primes where j is deficient against the working modulus m."""

    j: int
    m: int
    primes: tuple[int, ...]


def prime_set(j: int, m: int) -> PrimeSetS:
    """The set of primes p with v_p(j) < v_p(m)."""
    if j < 1 or m < 1:
        raise ValueError("j and m must be positive")
    ps = tuple(p for p in prime_factors(m) if valuation(j, p) < valuation(m, p))
    return PrimeSetS(j, m, ps)


def reduce_j(j: int, m: int) -> int:
    """gcd(j, m): positivity at j is equivalent to positivity at gcd(j, m)."""
    return math.gcd(j, m)


def finite_part(H: SubgroupClosure, j: int) -> Fraction:
    """The exact rational factor sum_{k in <S>} mu(k)/|H mod jk|.

    k runs over squarefree products of the deficient primes; orders at
    moduli beyond H's modulus come from the declared-level extension.
    """
    S = prime_set(j, H.modulus).primes
    total = Fraction(0)
    for r in range(len(S) + 1):
        for combo in combinations(S, r):
            k = math.prod(combo)
            total += Fraction((-1) ** r, glgroup.order_mod_extended(H, j * k))
    return total


@dataclass(frozen=True)
class PositivityResult:
    j: int
    verdict: Verdict
    prime_set: tuple[int, ...]
    kernel_order: int
    witness: ModMatrix | None
    coverage: dict[int, int] | None

    def certificate(self) -> dict:
        if self.verdict is Verdict.POSITIVE:
            w = self.witness
            return {"witness": {"modulus": w.modulus, "entries": list(w.entries)}}
        return {"coverage": {str(p): c for p, c in sorted(self.coverage.items())}}


def positivity(H: SubgroupClosure, j: int) -> PositivityResult:
    """Exact positivity verdict for the density at j (j | m required).

    ZERO iff the kernel of reduction mod j is covered by the kernels of
    reduction mod jp over the deficient primes p.  POSITIVE comes with the
    first uncovered element in canonical order as a witness; ZERO comes
    with per-prime coverage counts.
    """
    m = H.modulus
    if j < 1 or m % j != 0:
        raise ValueError(f"positivity requires j | m; got j={j}, m={m}")
    S = prime_set(j, m).primes
    K = glgroup.kernel_of_reduction(H, j)
    if not S:
        return PositivityResult(j, Verdict.POSITIVE, S, K.order, ModMatrix.identity(m), None)
    a, b, c, d = K.entry_arrays()
    covered = np.zeros(K.order, dtype=bool)
    coverage: dict[int, int] = {}
    for p in S:
        jp = j * p
        one = 1 % jp
        mask = (a % jp == one) & (b % jp == 0) & (c % jp == 0) & (d % jp == one)
        coverage[p] = int(mask.sum())
        covered |= mask
    if bool(covered.all()):
        return PositivityResult(j, Verdict.ZERO, S, K.order, None, coverage)
    first = int(np.flatnonzero(~covered)[0])
    witness = glgroup._key_to_mat(int(K.keys[first]), m)
    return PositivityResult(j, Verdict.POSITIVE, S, K.order, witness, coverage)


def inclusion_exclusion_identity(H: SubgroupClosure, j: int) -> Fraction:
    """The finite part recomputed from the covering data of the kernel.

    Equals (1 - |union of K_{jp}| / |K_j|) / |H mod j| exactly; this is the
    identity that makes the covering test equivalent to the Mobius sum.
    """
    m = H.modulus
    if j < 1 or m % j != 0:
        raise ValueError(f"requires j | m; got j={j}, m={m}")
    S = prime_set(j, m).primes
    K = glgroup.kernel_of_reduction(H, j)
    a, b, c, d = K.entry_arrays()
    covered = np.zeros(K.order, dtype=bool)
    for p in S:
        jp = j * p
        one = 1 % jp
        covered |= (a % jp == one) & (b % jp == 0) & (c % jp == 0) & (d % jp == one)
    union = int(covered.sum())
    return (1 - Fraction(union, K.order)) / glgroup.order_mod(H, j)


# ---------------------------------------------------------------------------
# the Euler product and full density values


@lru_cache(maxsize=8)
def _primes(n: int) -> tuple[int, ...]:
    return tuple(primes_up_to(n))


def euler_tail_lower(trunc: int) -> Fraction:
    """Rigorous lower bound for prod_{p > trunc} (1 - 1/psi(p)).

    psi(n) > (n-1)^4, so the tail sum of 1/psi over primes > P is below
    sum_{n >= P} n^-4 <= 1/P^4 + 1/(3P^3) <= 2/(3(P-1)^3); the product is
    then at least 1 minus that sum.
    """
    if trunc < 2:
        raise ValueError("truncation must be >= 2")
    return 1 - Fraction(2, 3 * (trunc - 1) ** 3)


def euler_interval(j: int, S: Sequence[int], trunc: int) -> tuple[Fraction, Fraction]:
    """Enclosure of prod_{p not in S, p|j}(1-1/p^4) * prod_{p not in S, p∤j}(1-1/psi(p))."""
    excluded = set(S)
    j_primes = prime_factors(j)
    if trunc <= max([*excluded, *j_primes, 2]):
        raise ValueError(f"truncation {trunc} must exceed every prime of j and S")
    finite = Fraction(1)
    for p in j_primes:
        if p not in excluded:
            finite *= 1 - Fraction(1, p**4)
    for p in _primes(trunc):
        if p not in excluded and j % p != 0:
            finite *= 1 - Fraction(1, psi(p))
    return finite * euler_tail_lower(trunc), finite


@dataclass(frozen=True)
class DensityResult:
    j: int
    finite_part: Fraction
    euler_interval: tuple[Fraction, Fraction]
    value_interval: tuple[Fraction, Fraction]
    verdict: Verdict
    certificate: dict
    truncation: int

    def to_report(self) -> dict:
        return {
            "j": self.j,
            "finite_part": str(self.finite_part),
            "value_lo": float(self.value_interval[0]),
            "value_hi": float(self.value_interval[1]),
            "value_lo_exact": str(self.value_interval[0]),
            "value_hi_exact": str(self.value_interval[1]),
            "verdict": self.verdict.value,
            "certificate": self.certificate,
            "truncation": self.truncation,
        }


def cej(H: SubgroupClosure, j: int, trunc: int = DEFAULT_TRUNCATION) -> DensityResult:
    """The full density at j: exact finite part times an Euler-product interval.

    Positivity is always decided at gcd(j, m); values for j outside the
    divisors of m use the declared-level order extension.
    """
    m = H.modulus
    fp = finite_part(H, j)
    pos = positivity(H, reduce_j(j, m))
    S = prime_set(j, m).primes
    if pos.verdict is Verdict.ZERO:
        assert fp == 0, f"covering says ZERO but finite part is {fp}"
        cert = pos.certificate()
        cert["coincidences"] = [
            [j, p]
            for p in S
            if glgroup.order_mod_extended(H, j) == glgroup.order_mod_extended(H, j * p)
        ]
        return DensityResult(j, fp, (Fraction(0), Fraction(0)),
                             (Fraction(0), Fraction(0)), Verdict.ZERO, cert, trunc)
    assert fp > 0, f"covering says POSITIVE but finite part is {fp}"
    lo, hi = euler_interval(j, S, trunc)
    return DensityResult(j, fp, (lo, hi), (fp * lo, fp * hi),
                         Verdict.POSITIVE, pos.certificate(), trunc)


def direct_series_partial(H: SubgroupClosure, j: int, terms: int) -> Fraction:
    """Partial sum of the defining series sum_k mu(k)/|H mod jk| up to k <= terms."""
    total = Fraction(0)
    for k in range(1, terms + 1):
        mu = mobius(k)
        if mu:
            total += Fraction(mu, glgroup.order_mod_extended(H, j * k))
    return total


def direct_series_tail_bound(H: SubgroupClosure, j: int, terms: int) -> Fraction:
    """Rigorous bound for the series tail beyond k = terms.

    Split squarefree k as k_m * k' with k_m supported on primes of m and k'
    coprime to m.  Then |H mod jk| = |H mod j k_m| * psi(k') exactly, and
    psi(k') >= (3/4) k'^3 for squarefree k', so the k' tail is bounded by a
    cubic integral.
    """
    rad_m = radical(H.modulus)
    bound = Fraction(0)
    for k_m in divisors(rad_m):
        t = max(1, terms // k_m)
        tail = Fraction(4, 3) * Fraction(1, 2 * t * t)
        bound += tail / glgroup.order_mod_extended(H, j * k_m)
    return bound


def partial_lower_bound(
    j: int, degrees: Mapping[int, int], primes: Sequence[int]
) -> Fraction:
    """Lower bound for the finite part from an incomplete table of degrees.

    `degrees` maps moduli jk (k squarefree over `primes`) to division-field
    degrees.  Missing positive terms (mu(k) = +1) are dropped, which only
    lowers the sum; a missing negative term makes no bound possible and is
    an error.
    """
    total = Fraction(0)
    ps = sorted(set(primes))
    for r in range(len(ps) + 1):
        for combo in combinations(ps, r):
            k = math.prod(combo)
            mu = (-1) ** r
            deg = degrees.get(j * k)
            if deg is not None:
                total += Fraction(mu, deg)
            elif mu < 0:
                raise ValueError(
                    f"degree at modulus {j * k} is missing and its term is negative; "
                    "cannot form a lower bound"
                )
    return total


# ---------------------------------------------------------------------------
# positivity criteria


@dataclass(frozen=True)
class CriterionResult:
    status: CriterionStatus
    diagnostics: dict

    @property
    def applies(self) -> bool:
        return self.status is CriterionStatus.APPLIES_POSITIVE


def _unit_coset(j: int, R: int) -> frozenset[int]:
    """Units of Z/RZ congruent to 1 mod j (the group Gal(Q(zeta_R)/Q(zeta_j)))."""
    one = 1 % j
    return frozenset(
        x for x in range(R) if math.gcd(x, R) == 1 and x % j == one
    )


def criterion_T4b(H: SubgroupClosure, j: int) -> CriterionResult:
    """Cyclotomic-intersection positivity test.

    Condition 1: the determinant image of the kernel of reduction mod j is
    the full coset 1 + jZ/RZ inside the units, where R is j times the odd
    primes of m/j (this encodes Q(E[j]) meeting Q(zeta_R) in exactly
    Q(zeta_j)).  Condition 2: the 2-power tower is strict at level
    2^(v2(j)+1).  Both holding forces a positive density.

    The 2-power condition compares pure 2-power division fields; the
    reading relative to j is reported in the diagnostics, with a flag when
    the two disagree.
    """
    m = H.modulus
    if j < 1 or m % j != 0:
        raise ValueError(f"criterion requires j | m; got j={j}, m={m}")
    a = valuation(j, 2)
    odd = [p for p in prime_factors(m // j) if p != 2]
    R = j * math.prod(odd) if odd else j
    Kj = glgroup.kernel_of_reduction(H, j)
    img = glgroup.det_image(Kj, R)
    cond1 = img.elements == _unit_coset(j, R)
    o_a = glgroup.order_mod_extended(H, 2**a)
    o_a1 = glgroup.order_mod_extended(H, 2 ** (a + 1))
    cond2 = o_a1 != o_a
    rel_lo = glgroup.order_mod_extended(H, j)
    rel_hi = glgroup.order_mod_extended(H, 2 * j)
    cond2_rel = rel_hi != rel_lo
    status = (
        CriterionStatus.APPLIES_POSITIVE if (cond1 and cond2) else CriterionStatus.INCONCLUSIVE
    )
    return CriterionResult(
        status,
        {
            "R": R,
            "a": a,
            "cyclotomic_condition": cond1,
            "det_image_size": img.order,
            "target_coset_size": len(_unit_coset(j, R)),
            "two_power_condition": cond2,
            "two_power_orders": [o_a, o_a1],
            "two_power_condition_relative_to_j": cond2_rel,
            "two_power_readings_disagree": cond2 != cond2_rel,
        },
    )


def criterion_abelianisation(H: SubgroupClosure, j: int) -> CriterionResult:
    """Odd-j positivity via the commutator structure of the mod-j image.

    Applies when Q(E[2]) is nontrivial and the commutator subgroup of
    H mod j is its full determinant-one part (the maximal abelian
    subextension of Q(E[j]) is then cyclotomic).
    """
    if j % 2 == 0:
        raise ValueError(f"j must be odd, got {j}")
    m = H.modulus
    if m % j != 0:
        raise ValueError(f"criterion requires j | m; got j={j}, m={m}")
    mod2 = glgroup.order_mod_extended(H, 2)
    Hj = glgroup.reduce_subgroup(H, j)
    comm = glgroup.commutator_subgroup(Hj)
    sl2 = glgroup.intersect_sl2(Hj)
    ok = mod2 > 1 and comm == sl2
    return CriterionResult(
        CriterionStatus.APPLIES_POSITIVE if ok else CriterionStatus.INCONCLUSIVE,
        {
            "mod2_order": mod2,
            "commutator_order": comm.order,
            "sl2_intersection_order": sl2.order,
            "commutator_equals_sl2": comm == sl2,
        },
    )


def criterion_coprime(j: int, A_E: int | None, mod2_order: int) -> CriterionResult:
    """Positivity when j is coprime to 2 A(E) and Q(E[2]) is nontrivial."""
    if A_E is None:
        raise ValueError("A(E) is not available for this record")
    ok = math.gcd(j, 2 * A_E) == 1 and mod2_order > 1
    return CriterionResult(
        CriterionStatus.APPLIES_POSITIVE if ok else CriterionStatus.INCONCLUSIVE,
        {"gcd_j_2AE": math.gcd(j, 2 * A_E), "mod2_order": mod2_order},
    )


def serre_positivity(delta_sf: int, j: int, budget: int | None = None) -> PositivityResult:
    """Positivity at any j for a Serre curve with the given discriminant class.

    Constructs the index-two adelic image and runs the covering test at
    gcd(j, m).  The result is always POSITIVE; anything else is a defect in
    the construction and raises.
    """
    H = glgroup.serre_subgroup(delta_sf, budget=budget)
    res = positivity(H, reduce_j(j, H.modulus))
    if res.verdict is not Verdict.POSITIVE:
        raise AssertionError(
            f"Serre image for delta_sf={delta_sf} produced a ZERO at j={j}; "
            "this contradicts the index-two structure"
        )
    return res


# ---------------------------------------------------------------------------
# the corrected cyclicity lower-bound computation


@dataclass(frozen=True)
class DeltaFprimeInput:
    """Input data for the auxiliary family density delta(F').

    d is the degree of the abelian part of the two-division field (2 or 3);
    R the product of the qualifying odd primes of the level; S | R the
    minimal conductor embedding that field in a cyclotomic field.
    """

    d: int
    R: int
    S: int
    tail_primes_bound: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"d must be 2 or 3, got {self.d}")
        if self.R < 1 or self.R % 2 == 0 or not is_squarefree(self.R):
            raise ValueError(f"R must be odd and squarefree, got {self.R}")
        if self.S < 3:
            raise ValueError(f"S must be >= 3, got {self.S}")
        if self.R % self.S != 0:
            raise ValueError(f"S = {self.S} must divide R = {self.R}")


@dataclass(frozen=True)
class DeltaFprimeResult:
    finite_factor: Fraction
    mobius_form: Fraction
    closed_form: Fraction
    tail_interval: tuple[Fraction, Fraction]
    value_interval: tuple[Fraction, Fraction]


def delta_f_prime(inp: DeltaFprimeInput, exclude_primes: Sequence[int] = ()) -> DeltaFprimeResult:
    """The auxiliary density, via both the Mobius sum and the closed form.

    The two evaluations must agree exactly (they are the same identity);
    the returned finite factor is strictly positive.  The tail product over
    primes away from 2R (minus any explicitly excluded level primes) is
    returned as a rational interval.
    """
    d, R, S = inp.d, inp.R, inp.S
    mobius_form = Fraction(0)
    for k in divisors(R):
        phi_k = euler_phi(k)
        n2k = phi_k if k % S == 0 else d * phi_k
        mobius_form += mobius(k) * (Fraction(1, phi_k) - Fraction(1, n2k))
    closed = Fraction(1, euler_phi(S)) * (1 - Fraction(1, d))
    for q in prime_factors(R // S):
        closed *= 1 - Fraction(1, euler_phi(q))
    inner = Fraction(1)
    for q in prime_factors(S):
        inner *= euler_phi(q) - 1
    closed *= inner - mobius(S)
    assert mobius_form == closed, (
        f"Mobius sum {mobius_form} disagrees with closed form {closed} "
        f"for d={d}, R={R}, S={S}"
    )
    assert closed > 0
    trunc = inp.tail_primes_bound
    skip = set(exclude_primes)
    tail_finite = Fraction(1)
    for q in _primes(trunc):
        if (2 * R) % q != 0 and q not in skip:
            tail_finite *= 1 - Fraction(1, psi(q))
    tail = (tail_finite * euler_tail_lower(trunc), tail_finite)
    return DeltaFprimeResult(
        closed, mobius_form, closed, tail, (closed * tail[0], closed * tail[1])
    )
