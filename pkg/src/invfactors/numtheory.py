"""Elementary number theory shared by the group and density machinery.

Everything here is exact integer arithmetic on small inputs (moduli of
matrix groups, Mobius supports, discriminants).  Trial division is all we
ever need: the largest numbers factored are point counts near 10^5.
"""

from __future__ import annotations

import math
from functools import lru_cache


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation {p: exponent} of n >= 1 by trial division."""
    if n < 1:
        raise ValueError(f"cannot factor {n}; expected a positive integer")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_factors(n: int) -> list[int]:
    """Sorted distinct prime divisors of n."""
    return sorted(factorize(n))


def valuation(n: int, p: int) -> int:
    """Largest v with p^v | n (n != 0)."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def divisors(n: int) -> list[int]:
    """Sorted list of positive divisors of n."""
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def radical(n: int) -> int:
    """Product of the distinct primes dividing n (rad(1) = 1)."""
    r = 1
    for p in factorize(n):
        r *= p
    return r


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for e in factorize(abs(n)).values())


def squarefree_part(n: int) -> int:
    """The squarefree integer s with n = s * (square), preserving sign."""
    if n == 0:
        raise ValueError("0 has no squarefree part")
    s = -1 if n < 0 else 1
    for p, e in factorize(abs(n)).items():
        if e % 2:
            s *= p
    return s


def mobius(k: int) -> int:
    """Mobius function: 0 on square factors, else (-1)^(number of primes)."""
    if k < 1:
        raise ValueError(f"mobius({k}) undefined; expected k >= 1")
    fac = factorize(k)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorize(n).items():
        phi *= p ** (e - 1) * (p - 1)
    return phi


@lru_cache(maxsize=None)
def psi(n: int) -> int:
    """Order of the group of invertible 2x2 matrices over Z/nZ.

    psi(n) = n^4 * prod_{p|n} (1 - 1/p)(1 - 1/p^2), multiplicative, exact.
    """
    if n < 1:
        raise ValueError(f"psi({n}) undefined; expected n >= 1")
    out = 1
    for p, e in factorize(n).items():
        out *= p ** (4 * e - 3) * (p - 1) * (p * p - 1)
    return out


def primes_up_to(n: int) -> list[int]:
    """All primes <= n by a byte sieve."""
    if n < 2:
        return []
    sieve = bytearray(b"\x01") * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            start = p * p
            sieve[start : n + 1 : p] = b"\x00" * ((n - start) // p + 1)
    return [i for i, v in enumerate(sieve) if v]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), the full extension of the Jacobi symbol."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    # (a|2) factors: 0 if a even, else depends on a mod 8
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            sign = -sign
    a %= n
    # Jacobi symbol on the odd part by binary reciprocity
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def quadratic_field_conductor(d: int) -> int:
    """Conductor of the quadratic character attached to Q(sqrt(d)).

    d must be squarefree and not 1: |d| when d = 1 mod 4, else 4|d|.
    """
    if not is_squarefree(d):
        raise ValueError(f"{d} is not squarefree")
    if d == 1:
        raise ValueError("d = 1 gives the trivial character; no quadratic field")
    return abs(d) if d % 4 == 1 else 4 * abs(d)


def quadratic_character(d: int) -> "tuple[int, int]":
    """Fundamental discriminant D and conductor of chi for Q(sqrt(d)).

    chi(a) = kronecker(D, a) is the primitive quadratic character cutting
    out Q(sqrt(d)); its conductor is |D|.
    """
    cond = quadratic_field_conductor(d)
    D = d if d % 4 == 1 else 4 * d
    assert abs(D) == cond
    return D, cond
