import math
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invfactors import numtheory as nt


def test_factorize_roundtrip():
    for n in (1, 2, 12, 97, 720, 2**10 * 3**4, 99991):
        fac = nt.factorize(n)
        assert math.prod(p**e for p, e in fac.items()) == n
        assert all(nt.is_prime(p) for p in fac)


def test_factorize_rejects_nonpositive():
    with pytest.raises(ValueError):
        nt.factorize(0)


def test_mobius_values():
    assert nt.mobius(1) == 1
    assert nt.mobius(6) == 1
    assert nt.mobius(12) == 0
    assert nt.mobius(30) == -1
    assert [nt.mobius(k) for k in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


def test_psi_small_values():
    # psi(2) = 6 was derived by enumerating the invertible matrices over F_2
    assert nt.psi(1) == 1
    assert nt.psi(2) == 6
    assert nt.psi(3) == 48
    assert nt.psi(4) == 96
    assert nt.psi(6) == 288
    with pytest.raises(ValueError):
        nt.psi(0)


@given(st.integers(1, 40), st.integers(1, 40))
def test_psi_multiplicative(a, b):
    if math.gcd(a, b) == 1:
        assert nt.psi(a * b) == nt.psi(a) * nt.psi(b)


def test_divisors_and_radical():
    assert nt.divisors(12) == [1, 2, 3, 4, 6, 12]
    assert nt.divisors(1) == [1]
    assert nt.radical(12) == 6
    assert nt.radical(1) == 1


def test_squarefree_part():
    assert nt.squarefree_part(12) == 3
    assert nt.squarefree_part(-800) == -2
    assert nt.squarefree_part(2**12 * 3**9 * 7**3) == 21
    assert nt.is_squarefree(30) and not nt.is_squarefree(18)


def test_valuation():
    assert nt.valuation(48, 2) == 4
    assert nt.valuation(48, 3) == 1
    assert nt.valuation(-48, 2) == 4


def test_primes_up_to():
    assert nt.primes_up_to(20) == [2, 3, 5, 7, 11, 13, 17, 19]
    assert len(nt.primes_up_to(10**4)) == 1229


@settings(max_examples=200)
@given(st.integers(-50, 50))
def test_kronecker_matches_euler_criterion(a):
    # (a|p) for odd primes p against a^((p-1)/2) mod p
    for p in (3, 5, 7, 11, 13):
        ks = nt.kronecker(a, p)
        if a % p == 0:
            assert ks == 0
        else:
            euler = pow(a, (p - 1) // 2, p)
            assert ks == (1 if euler == 1 else -1)


def test_kronecker_at_two():
    # (a|2) is 0 for even a, +1 for a = 1,7 mod 8, -1 for a = 3,5 mod 8
    assert nt.kronecker(6, 2) == 0
    assert [nt.kronecker(a, 2) for a in (1, 3, 5, 7, 9)] == [1, -1, -1, 1, 1]


def test_quadratic_character_conductors():
    cases = {-1: 4, 5: 5, -5: 20, 15: 60, -15: 15, 21: 21, 37: 37, -30: 120}
    for d, cond in cases.items():
        assert nt.quadratic_field_conductor(d) == cond
        D, c = nt.quadratic_character(d)
        assert c == cond and abs(D) == cond
    with pytest.raises(ValueError):
        nt.quadratic_field_conductor(1)
    with pytest.raises(ValueError):
        nt.quadratic_field_conductor(12)


def test_quadratic_character_cuts_out_the_right_field():
    # chi(p) = +1 exactly when p splits in Q(sqrt(d)); equivalent to d being
    # a nonzero square mod p for odd unramified p
    for d in (-1, 5, -15, 21):
        D, cond = nt.quadratic_character(d)
        for p in (3, 7, 11, 13, 17, 19, 23):
            if cond % p == 0:
                continue
            is_square = any(x * x % p == d % p for x in range(1, p))
            assert nt.kronecker(D, p) == (1 if is_square else -1)


def test_euler_phi():
    assert [nt.euler_phi(n) for n in (1, 2, 3, 4, 15, 60)] == [1, 1, 2, 2, 8, 16]
