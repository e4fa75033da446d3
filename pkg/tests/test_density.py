import math
import random
from fractions import Fraction

import pytest

from invfactors import density as dn
from invfactors import glgroup as gg
from invfactors.numtheory import divisors, mobius, psi

from helpers import borel_full_mod3, crt_glue, product_group

M4 = gg.ModMatrix(4, 1, 1, 0, 3)
X60D = gg.close(4, [M4])
GL2F2 = gg.full_gl2(2)


def glue_borel_gl2f5_over_sign():
    """50.b3-style image mod 15: full Borel mod 3 fibered with GL2(F_5).

    The gluing identifies the quadratic character a -> chi_3(a) of the
    Borel's top-left entry with the square class of det mod 5, so the
    3-division field picks up the quadratic subextension of Q(zeta_15).
    """
    chi3 = {1: 1, 2: -1}
    chi5 = {1: 1, 4: 1, 2: -1, 3: -1}
    rows3, rows5 = [], []
    for B in borel_full_mod3():
        for G in gg.full_gl2(5):
            if chi3[B.a] == chi5[G.det()]:
                rows3.append(B.entries)
                rows5.append(G.entries)
    H = crt_glue([(3, rows3), (5, rows5)], 15)
    assert H.order == 12 * psi(5) // 2
    return H


def test_mobius_reexported():
    assert dn.mobius(1) == 1 and dn.mobius(6) == 1 and dn.mobius(12) == 0


def test_prime_set_examples():
    assert dn.prime_set(6, 6).primes == ()
    assert dn.prime_set(1, 2).primes == (2,)
    assert dn.prime_set(3, 30).primes == (2, 5)
    assert dn.prime_set(4, 8).primes == (2,)


def test_reduce_j():
    assert dn.reduce_j(7, 4) == 1
    assert dn.reduce_j(12, 8) == 4
    assert dn.reduce_j(6, 6) == 6


def test_finite_part_full_mod2():
    assert dn.finite_part(GL2F2, 1) == Fraction(5, 6)


def test_finite_part_empty_prime_set():
    # j = m: the sum is the single positive term 1/|H mod m|
    H = gg.close(4, [M4, gg.ModMatrix(4, 3, 0, 0, 3)])
    assert dn.finite_part(H, 4) == Fraction(1, H.order)


def test_finite_part_x60d_vanishes():
    assert dn.finite_part(X60D, 2) == 0


def test_positivity_empty_prime_set_is_positive():
    H = gg.close(4, [M4, gg.ModMatrix(4, 3, 0, 0, 3)])
    res = dn.positivity(H, 4)
    assert res.verdict is dn.Verdict.POSITIVE
    assert res.witness == gg.ModMatrix.identity(4)


def test_positivity_x60d():
    res1 = dn.positivity(X60D, 1)
    assert res1.verdict is dn.Verdict.POSITIVE
    assert res1.witness == M4  # first uncovered element in canonical order
    res2 = dn.positivity(X60D, 2)
    assert res2.verdict is dn.Verdict.ZERO
    assert res2.coverage == {2: 1}


def test_positivity_requires_divisor():
    with pytest.raises(ValueError):
        dn.positivity(X60D, 3)


def test_positivity_three_prime_cover():
    # V4 inside GL2(Z/30): every element trivial in one slot; covered at j = 1
    a = (1, 1, 0, 1)
    i2, i3, i5 = (1, 0, 0, 1), (1, 0, 0, 1), (1, 0, 0, 1)
    m3, m5 = (2, 0, 0, 2), (4, 0, 0, 4)
    rows = [
        (i2, i3, i5),
        (a, m3, i5),
        (a, i3, m5),
        (i2, m3, m5),
    ]
    H = crt_glue(
        [(2, [r[0] for r in rows]), (3, [r[1] for r in rows]), (5, [r[2] for r in rows])], 30
    )
    assert H.order == 4
    res = dn.positivity(H, 1)
    assert res.verdict is dn.Verdict.ZERO
    assert res.coverage == {2: 2, 3: 2, 5: 2}
    assert dn.finite_part(H, 1) == 0


def test_cej_zero_interval():
    res = dn.cej(X60D, 2)
    assert res.verdict is dn.Verdict.ZERO
    assert res.value_interval == (Fraction(0), Fraction(0))
    assert res.certificate["coincidences"] == [[2, 2]]


def test_cej_full_mod2_value():
    res = dn.cej(GL2F2, 1, trunc=1000)
    lo, hi = res.value_interval
    width = hi - lo
    assert width <= Fraction(1, 10**9)
    # frozen oracle: 5/6 * prod_{p >= 3} (1 - 1/psi(p)) to 30 digits via mpmath
    oracle = 0.813751906106815718
    assert lo <= Fraction(oracle).limit_denominator(10**15) <= hi
    assert res.finite_part == Fraction(5, 6)


def test_cej_monotonicity_bound():
    for H in (GL2F2, X60D, gg.full_gl2(6)):
        for j in divisors(H.modulus):
            res = dn.cej(H, j, trunc=200)
            assert res.value_interval[1] <= Fraction(1, gg.order_mod(H, j))


def test_cej_arbitrary_j_outside_divisors():
    # j = 3 with m = 4: positivity decided at gcd = 1, value uses extensions
    res = dn.cej(X60D, 3, trunc=200)
    assert res.verdict is dn.Verdict.POSITIVE
    assert res.finite_part == dn.finite_part(X60D, 3)
    res6 = dn.cej(X60D, 6, trunc=200)
    assert res6.verdict is dn.Verdict.ZERO  # gcd(6, 4) = 2 vanishes


def test_direct_series_partial_sums_inside_interval():
    for H, j in ((GL2F2, 1), (gg.full_gl2(6), 2), (X60D, 1)):
        res = dn.cej(H, j, trunc=2000)
        for terms in (1000, 10_000):
            partial = dn.direct_series_partial(H, j, terms)
            bound = dn.direct_series_tail_bound(H, j, terms)
            assert res.value_interval[0] - bound <= partial <= res.value_interval[1] + bound


def test_direct_series_tail_bound_is_rigorous_on_truth():
    # the bound must dominate the actual tail between two cutoffs
    H = GL2F2
    for j in (1, 2):
        s_small = dn.direct_series_partial(H, j, 300)
        s_big = dn.direct_series_partial(H, j, 3000)
        assert abs(s_big - s_small) <= dn.direct_series_tail_bound(H, j, 300)


def test_partial_lower_bound_50b3():
    lb = dn.partial_lower_bound(3, {3: 12, 6: 72, 15: 120}, (2, 5))
    assert lb == Fraction(11, 180)
    assert lb > 0  # POSITIVE verdict for 50.b3 at j = 3


def test_partial_lower_bound_missing_negative_term():
    with pytest.raises(ValueError):
        dn.partial_lower_bound(3, {3: 12, 6: 72}, (2, 5))  # 1/|H mod 15| absent


# ---------------------------------------------------------------------------
# equivalence of the covering test with the Mobius sum (proof identity)


def test_equivalence_on_corpus(preimage_corpus):
    for m, p, H in preimage_corpus[:12]:
        M = H.modulus
        for j in divisors(M):
            fp = dn.finite_part(H, j)
            verdict = dn.positivity(H, j).verdict
            assert (fp > 0) == (verdict is dn.Verdict.POSITIVE)
            assert (fp == 0) == (verdict is dn.Verdict.ZERO)
            assert fp == dn.inclusion_exclusion_identity(H, j)


# ---------------------------------------------------------------------------
# criteria


def test_t4b_j1_nontrivial_mod2():
    res = dn.criterion_T4b(GL2F2, 1)
    assert res.status is dn.CriterionStatus.APPLIES_POSITIVE
    assert res.diagnostics["two_power_orders"] == [1, 6]


def test_t4b_two_power_level():
    # full mod-4 image: the cyclotomic condition is vacuous at every j | 4
    G4 = gg.full_gl2(4)
    for j in (1, 2, 4):
        res = dn.criterion_T4b(G4, j)
        assert res.status is dn.CriterionStatus.APPLIES_POSITIVE
        assert res.diagnostics["cyclotomic_condition"]


def test_t4b_inconclusive_on_entangled_mod15():
    H = glue_borel_gl2f5_over_sign()
    res = dn.criterion_T4b(H, 3)
    assert res.status is dn.CriterionStatus.INCONCLUSIVE
    assert not res.diagnostics["cyclotomic_condition"]
    assert res.diagnostics["det_image_size"] == 2
    assert res.diagnostics["target_coset_size"] == 4
    # the density is positive anyway (criterion is sufficient, not necessary)
    assert dn.positivity(H, 3).verdict is dn.Verdict.POSITIVE


def test_t4b_applies_implies_positive(preimage_corpus):
    for m, p, H in preimage_corpus[:10]:
        for j in divisors(H.modulus):
            if dn.criterion_T4b(H, j).applies:
                assert dn.positivity(H, j).verdict is dn.Verdict.POSITIVE


def test_t4b_x60d_fails_at_2():
    # the 2-power tower is flat: |H mod 4| = |H mod 2|
    res = dn.criterion_T4b(X60D, 2)
    assert res.status is dn.CriterionStatus.INCONCLUSIVE
    assert not res.diagnostics["two_power_condition"]


def test_abelianisation_19a3_style():
    H = product_group([(2, [M.entries for M in GL2F2]),
                       (3, [(1, b, 0, d) for b in range(3) for d in (1, 2)])], 6)
    res = dn.criterion_abelianisation(H, 3)
    assert res.status is dn.CriterionStatus.APPLIES_POSITIVE
    assert dn.positivity(H, 3).verdict is dn.Verdict.POSITIVE


def test_abelianisation_inconclusive_for_abelian_image():
    # split Cartan mod 3: abelian with nontrivial determinant-one part
    cartan = [(a, 0, 0, d) for a in (1, 2) for d in (1, 2)]
    H = product_group([(2, [M.entries for M in GL2F2]), (3, cartan)], 6)
    res = dn.criterion_abelianisation(H, 3)
    assert res.status is dn.CriterionStatus.INCONCLUSIVE
    assert res.diagnostics["commutator_order"] == 1
    assert res.diagnostics["sl2_intersection_order"] == 2


def test_abelianisation_full_gl2_mod3():
    H = gg.full_gl2(6)
    res = dn.criterion_abelianisation(H, 3)
    assert res.status is dn.CriterionStatus.APPLIES_POSITIVE


def test_abelianisation_rejects_even_j():
    with pytest.raises(ValueError):
        dn.criterion_abelianisation(gg.full_gl2(6), 2)


def test_criterion_coprime():
    ok = dn.criterion_coprime(5, 3, 6)
    assert ok.status is dn.CriterionStatus.APPLIES_POSITIVE
    assert dn.criterion_coprime(2, 3, 6).status is dn.CriterionStatus.INCONCLUSIVE
    assert dn.criterion_coprime(3, 3, 6).status is dn.CriterionStatus.INCONCLUSIVE
    assert dn.criterion_coprime(5, 3, 1).status is dn.CriterionStatus.INCONCLUSIVE
    with pytest.raises(ValueError):
        dn.criterion_coprime(5, None, 6)


def test_serre_positivity():
    assert dn.serre_positivity(-1, 2).verdict is dn.Verdict.POSITIVE
    assert dn.serre_positivity(5, 10).verdict is dn.Verdict.POSITIVE
    for dsf in (-1, 5, -5):
        assert dn.serre_positivity(dsf, 1).verdict is dn.Verdict.POSITIVE


# ---------------------------------------------------------------------------
# the corrected auxiliary density


def test_delta_f_prime_frozen_values():
    r = dn.delta_f_prime(dn.DeltaFprimeInput(2, 3, 3))
    assert r.finite_factor == Fraction(1, 2)
    # both of the source formulas give 1/2 - 1/4 - 1/8 = 1/8 here
    r = dn.delta_f_prime(dn.DeltaFprimeInput(2, 15, 15))
    assert r.finite_factor == Fraction(1, 8)
    r = dn.delta_f_prime(dn.DeltaFprimeInput(2, 15, 3))
    assert r.finite_factor == Fraction(3, 8)
    r = dn.delta_f_prime(dn.DeltaFprimeInput(3, 7, 7))
    # (1/phi(7)) * (2/3) * ((phi(7)-1) - mu(7)) = (1/6)(2/3)(5+1) = 2/3
    assert r.finite_factor == Fraction(2, 3)


def test_delta_f_prime_tail_and_value_intervals():
    r = dn.delta_f_prime(dn.DeltaFprimeInput(2, 3, 3, tail_primes_bound=500))
    assert 0 < r.tail_interval[0] <= r.tail_interval[1] <= 1
    assert r.value_interval[0] <= Fraction(1, 2) * r.tail_interval[1]


def test_delta_f_prime_randomized_agreement():
    rng = random.Random(99)
    odd_primes = [3, 5, 7, 11, 13, 17, 19, 23]
    for _ in range(100):
        support = rng.sample(odd_primes, rng.randint(1, 4))
        R = math.prod(support)
        S = math.prod(rng.sample(support, rng.randint(1, len(support))))
        d = rng.choice((2, 3))
        r = dn.delta_f_prime(dn.DeltaFprimeInput(d, R, S))
        assert r.mobius_form == r.closed_form > 0


def test_delta_f_prime_validation():
    with pytest.raises(ValueError):
        dn.DeltaFprimeInput(4, 15, 3)
    with pytest.raises(ValueError):
        dn.DeltaFprimeInput(2, 12, 3)  # even R
    with pytest.raises(ValueError):
        dn.DeltaFprimeInput(2, 45, 3)  # not squarefree
    with pytest.raises(ValueError):
        dn.DeltaFprimeInput(2, 15, 7)  # S does not divide R
    with pytest.raises(ValueError):
        dn.DeltaFprimeInput(2, 15, 1)  # S < 3


def test_euler_tail_lower_is_rigorous():
    # compare with the true tail over a window of primes
    from invfactors.numtheory import primes_up_to

    for P in (50, 200):
        true_partial = Fraction(1)
        for p in primes_up_to(5000):
            if p > P:
                true_partial *= 1 - Fraction(1, psi(p))
        assert dn.euler_tail_lower(P) <= true_partial <= 1
