"""Brute-force elliptic curve arithmetic over prime fields.

Point counts come from a Legendre-symbol sweep over x; group structure
(d, e) with E(F_p) = Z/d x Z/e comes from element orders, with the rare
ambiguous cases settled exactly by a vectorised Sylow descent over the
full point set.  Everything is exact; floating point appears only in the
logarithmic-integral normaliser for empirical densities.

Reduction policy: a prime counts as good when p > 3 and p does not divide
the discriminant of the *given* model.  A non-minimal model may therefore
lose finitely many good primes, which is harmless for density statements;
reports carry the policy so downstream consumers can see it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .glgroup import BudgetExceededError
from .numtheory import factorize, primes_up_to, squarefree_part

DEFAULT_PRIME_BUDGET = 100_000

GOOD_REDUCTION_POLICY = "p > 3 and p does not divide the discriminant of the given model"


@dataclass(frozen=True)
class WeierstrassCurve:
    """Integral Weierstrass model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError(f"singular model: discriminant of {self.ainvs()} is 0")

    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.ainvs()
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c_invariants(self) -> tuple[int, int]:
        b2, b4, b6, _ = self.b_invariants
        c4 = b2 * b2 - 24 * b4
        c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
        return c4, c6

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def squarefree_discriminant(self) -> int:
        return squarefree_part(self.discriminant)

    def j_invariant(self) -> "tuple[int, int]":
        """j as a reduced fraction (numerator, denominator)."""
        c4, _ = self.c_invariants
        num, den = c4**3, self.discriminant
        g = math.gcd(num, den) or 1
        num, den = num // g, den // g
        if den < 0:
            num, den = -num, -den
        return num, den

    def short_model(self) -> tuple[int, int]:
        """(A, B) with the curve isomorphic to y^2 = x^3 + Ax + B away from 2, 3."""
        c4, c6 = self.c_invariants
        return -27 * c4, -54 * c6


def good_reduction(curve: WeierstrassCurve, p: int) -> bool:
    """Good-reduction policy: p > 3 and p coprime to the model discriminant."""
    return p > 3 and curve.discriminant % p != 0


@lru_cache(maxsize=4)
def _field_tables(p: int):
    """(is_square, smallest_sqrt) tables for F_p."""
    x = np.arange(p, dtype=np.int64)
    sq = (x * x) % p
    is_sq = np.zeros(p, dtype=bool)
    is_sq[sq] = True
    root = np.zeros(p, dtype=np.int64)
    root[sq[::-1]] = x[::-1]  # descending write: smallest root wins
    return is_sq, root


def count_points(curve: WeierstrassCurve, p: int) -> int:
    """|E(F_p)| = 1 + sum_x (1 + legendre(f(x))) for the short model y^2 = f(x)."""
    if not good_reduction(curve, p):
        raise ValueError(f"bad reduction at {p} under policy: {GOOD_REDUCTION_POLICY}")
    A, B = curve.short_model()
    A %= p
    B %= p
    x = np.arange(p, dtype=np.int64)
    f = (((x * x) % p * x) % p + A * x + B) % p
    is_sq, _ = _field_tables(p)
    leg = np.where(f == 0, 0, np.where(is_sq[f], 1, -1))
    N = 1 + p + int(leg.sum())
    assert (N - (p + 1)) ** 2 <= 4 * p, f"Hasse bound violated at p={p}: N={N}"
    return N


# ---------------------------------------------------------------------------
# scalar affine arithmetic on y^2 = x^3 + Ax + B (points are (x, y) or None)


def ec_add(P, Q, A: int, p: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def ec_mul(k: int, P, A: int, p: int):
    acc = None
    add = P
    while k:
        if k & 1:
            acc = ec_add(acc, add, A, p)
        add = ec_add(add, add, A, p)
        k >>= 1
    return acc


def _point_order(P, N: int, fac: dict[int, int], A: int, p: int) -> int:
    o = N
    for q in fac:
        while o % q == 0 and ec_mul(o // q, P, A, p) is None:
            o //= q
    return o


# ---------------------------------------------------------------------------
# vectorised arithmetic over the full point set (exact Sylow fallback)


def _batch_inv(a: np.ndarray, p: int) -> np.ndarray:
    """Inverses mod p of an array with no zeros, by the prefix-product trick."""
    pref = np.ones(a.size + 1, dtype=np.int64)
    for i in range(a.size):
        pref[i + 1] = pref[i] * a[i] % p
    inv_all = pow(int(pref[-1]), -1, p)
    out = np.empty(a.size, dtype=np.int64)
    for i in range(a.size - 1, -1, -1):
        out[i] = pref[i] * inv_all % p
        inv_all = inv_all * a[i] % p
    return out


def _vec_add(x1, y1, inf1, x2, y2, inf2, A: int, p: int):
    same_x = (x1 == x2) & ~inf1 & ~inf2
    to_inf = same_x & ((y1 + y2) % p == 0)
    doubling = same_x & ~to_inf
    generic = ~same_x & ~inf1 & ~inf2
    den = np.ones(x1.size, dtype=np.int64)
    den[generic] = (x2[generic] - x1[generic]) % p
    den[doubling] = (2 * y1[doubling]) % p
    inv = _batch_inv_fast(den, p)
    num = np.zeros(x1.size, dtype=np.int64)
    num[generic] = (y2[generic] - y1[generic]) % p
    num[doubling] = (3 * x1[doubling] % p * x1[doubling] + A) % p
    lam = num * inv % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * ((x1 - x3) % p) - y1) % p
    x3 = np.where(inf1, x2, np.where(inf2, x1, x3))
    y3 = np.where(inf1, y2, np.where(inf2, y1, y3))
    inf3 = (inf1 & inf2) | to_inf
    x3 = np.where(inf3, 0, x3)
    y3 = np.where(inf3, 0, y3)
    return x3, y3, inf3


def _batch_inv_fast(a: np.ndarray, p: int) -> np.ndarray:
    """Vectorised inverse by Fermat: a^(p-2) via square-and-multiply."""
    e = p - 2
    result = np.ones(a.size, dtype=np.int64)
    base = a % p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def _vec_mul(k: int, x, y, inf, A: int, p: int):
    rx = np.zeros(x.size, dtype=np.int64)
    ry = np.zeros(x.size, dtype=np.int64)
    rinf = np.ones(x.size, dtype=bool)
    bx, by, binf = x.copy(), y.copy(), inf.copy()
    while k:
        if k & 1:
            rx, ry, rinf = _vec_add(rx, ry, rinf, bx, by, binf, A, p)
        k >>= 1
        if k:
            bx, by, binf = _vec_add(bx, by, binf, bx, by, binf, A, p)
    return rx, ry, rinf


def _all_points(A: int, B: int, p: int):
    """Affine points of y^2 = x^3 + Ax + B as coordinate arrays (O excluded)."""
    is_sq, root = _field_tables(p)
    x = np.arange(p, dtype=np.int64)
    f = (((x * x) % p * x) % p + A * x + B) % p
    on2 = is_sq[f] & (f != 0)
    x2 = x[on2]
    y2 = root[f[on2]]
    x0 = x[f == 0]
    xs = np.concatenate([x2, x2, x0])
    ys = np.concatenate([y2, (p - y2) % p, np.zeros(x0.size, dtype=np.int64)])
    return xs, ys


def _exponent_exact(A: int, B: int, p: int, N: int, fac: dict[int, int]) -> int:
    """Exact group exponent: per prime q | N, the depth of the q-Sylow tower."""
    xs, ys = _all_points(A, B, p)
    e = 1
    for q, v in fac.items():
        cof = N // q**v
        x, y, inf = _vec_mul(cof, xs, ys, np.zeros(xs.size, dtype=bool), A, p)
        s = 0
        while not bool(inf.all()):
            x, y, inf = _vec_mul(q, x, y, inf, A, p)
            s += 1
        e *= q**s
    return e


# ---------------------------------------------------------------------------
# group structure


@dataclass(frozen=True)
class GroupStructure:
    """E(F_p) = Z/d x Z/e with d | e; d is the smallest invariant factor."""

    p: int
    N: int
    d: int
    e: int


def _division_poly_roots_full(A: int, B: int, p: int, ell: int) -> bool:
    """Whether E[ell] is F_p-rational in full, for ell in {2, 3}."""
    x = np.arange(p, dtype=np.int64)
    f = (((x * x) % p * x) % p + A * x + B) % p
    if ell == 2:
        return int((f == 0).sum()) == 3
    # ell = 3: quartic 3x^4 + 6Ax^2 + 12Bx - A^2; full iff all four roots are
    # rational with f a nonzero square at each (each then carries 2 points)
    x2 = (x * x) % p
    quart = (3 * x2 % p * x2 + 6 * A * x2 + 12 * B * x + (-A * A) % p) % p
    roots = x[quart == 0]
    if roots.size != 4:
        return False
    is_sq, _ = _field_tables(p)
    fv = f[roots]
    return bool(((fv != 0) & is_sq[fv]).all())


# deterministic sample size before falling back to the exact Sylow sweep
_SAMPLE_POINTS = 16


def group_structure(curve: WeierstrassCurve, p: int, verify: bool = False) -> GroupStructure:
    """Invariant factors of E(F_p) by element orders.

    Accumulates the lcm of sampled point orders; once N/lcm < 4 the small
    factor is in {1, 2, 3} and direct 2- and 3-torsion counts settle it.
    If sampling never gets that far (large d, or unlucky sampling) the
    exponent is computed exactly over the whole point set.

    verify=True re-derives each prime ell | gcd(N, p-1) of d from the
    independent brute-force ell-torsion count and asserts agreement.
    """
    N = count_points(curve, p)
    A, B = curve.short_model()
    A %= p
    B %= p
    fac = factorize(N)
    is_sq, root = _field_tables(p)
    L = 1
    found = 0
    d = None
    for x in range(p):
        fx = (x * x % p * x + A * x + B) % p
        if fx == 0 or not is_sq[fx]:
            continue
        L = math.lcm(L, _point_order((x, int(root[fx])), N, fac, A, p))
        found += 1
        if N // L < 4:
            full2 = _division_poly_roots_full(A, B, p, 2)
            full3 = N % 3 == 0 and _division_poly_roots_full(A, B, p, 3)
            assert not (full2 and full3), "d >= 6 contradicts N/lcm < 4"
            d = 2 if full2 else 3 if full3 else 1
            break
        if found >= _SAMPLE_POINTS:
            break
    if d is None:
        e = _exponent_exact(A, B, p, N, fac) if N > 1 else 1
        d = N // e
    e = N // d
    assert d * e == N and e % d == 0, f"invariant factors broken at p={p}"
    assert (p - 1) % d == 0, f"d = {d} must divide p - 1 = {p - 1}"
    if verify:
        for ell in factorize(math.gcd(N, p - 1)):
            full = torsion_count(curve, p, ell) == ell * ell
            assert full == (d % ell == 0), (
                f"torsion oracle disagrees at p={p}, ell={ell}: "
                f"full={full} but d={d}"
            )
    return GroupStructure(p, N, d, e)


def invariant_factor(curve: WeierstrassCurve, p: int) -> int:
    return group_structure(curve, p).d


def torsion_count(curve: WeierstrassCurve, p: int, ell: int) -> int:
    """Independent oracle: #{P in E(F_p) : ell * P = O} by a full point sweep."""
    if not good_reduction(curve, p):
        raise ValueError(f"bad reduction at {p}")
    A, B = curve.short_model()
    A %= p
    B %= p
    count = 1  # the point at infinity
    for x in range(p):
        fx = (x * x % p * x + A * x + B) % p
        if fx == 0:
            count += ec_mul(ell, (x, 0), A, p) is None
            continue
        y = pow(fx, (p - 1) // 2, p)
        if y != 1:
            continue
        # both points over x; their ell-multiples vanish together or not at all
        ysqrt = _sqrt_mod(fx, p)
        count += 2 * (ec_mul(ell, (x, ysqrt), A, p) is None)
    return count


def _sqrt_mod(a: int, p: int) -> int:
    """A square root of a mod p (a assumed to be a QR), by Tonelli-Shanks."""
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # find a non-residue
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


# ---------------------------------------------------------------------------
# empirical densities


def li(x: float) -> float:
    """Offset logarithmic integral: integral from 2 to x of dt/log t."""
    if x < 3:
        raise ValueError(f"li requires x >= 3, got {x}")
    val, err = quad(lambda t: 1.0 / math.log(t), 2.0, float(x), limit=200)
    assert err <= 1e-6 * abs(val), f"quadrature error {err} too large"
    return val


@dataclass(frozen=True)
class EmpiricalDensity:
    j: int
    x: int
    hits: int
    good_count: int
    li_x: float

    @property
    def ratio(self) -> float:
        return self.hits / self.li_x


@lru_cache(maxsize=32)
def invariant_factor_table(curve: WeierstrassCurve, x: int) -> dict[int, int]:
    """d_{E,p} for every good prime p <= x (keyed by p)."""
    out = {}
    for p in primes_up_to(x):
        if good_reduction(curve, p):
            out[p] = group_structure(curve, p).d
    return out


def empirical_density(
    curve: WeierstrassCurve, j: int, x: int, budget: int = DEFAULT_PRIME_BUDGET
) -> EmpiricalDensity:
    """Count good primes p <= x with smallest invariant factor exactly j."""
    if x > budget:
        raise BudgetExceededError(f"prime bound {x} exceeds budget {budget}")
    table = invariant_factor_table(curve, x)
    hits = sum(1 for d in table.values() if d == j)
    return EmpiricalDensity(j, x, hits, len(table), li(x))


def empirical_table(
    curve: WeierstrassCurve, x: int, budget: int = DEFAULT_PRIME_BUDGET
) -> dict[int, int]:
    """Histogram {j: #good p <= x with d = j}."""
    if x > budget:
        raise BudgetExceededError(f"prime bound {x} exceeds budget {budget}")
    table = invariant_factor_table(curve, x)
    hist: dict[int, int] = {}
    for d in table.values():
        hist[d] = hist.get(d, 0) + 1
    return dict(sorted(hist.items()))
