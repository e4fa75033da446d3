"""Exact arithmetic and explicit subgroup computation in GL2(Z/nZ).

Subgroups are enumerated explicitly: a `SubgroupClosure` stores every
element, packed four-residues-to-one-int64 so that membership tests and
reductions are vectorised numpy operations.  The canonical ordering of
elements is lexicographic on the entry tuple (a, b, c, d), which is the
numeric order of the packed keys; every operation that returns elements or
witnesses iterates in that order, so results are deterministic.

All exposed quantities (orders of reductions, determinant images, kernel
sizes, levels) are invariant under conjugation of the subgroup; inputs are
only ever well defined up to a choice of basis, and nothing here depends
on that choice.

Completed values (`ModMatrix`, `SubgroupClosure`, `ResidueGroup`) are
immutable and safe to share across threads; no operation mutates its
inputs.  Bulk closure/enumeration work is batched through numpy, which is
where any internal parallelism lives.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .numtheory import (
    divisors,
    factorize,
    is_squarefree,
    kronecker,
    psi,
    quadratic_character,
    valuation,
)

# int64 packing of (a, b, c, d) in mixed radix m requires m^4 < 2^63
MAX_MODULUS = 1 << 15

DEFAULT_BUDGET = 1 << 26
_BUDGET_ENV = "INVFACTORS_BUDGET"

_CHUNK = 1 << 20


class ModulusMismatchError(ValueError):
    """Raised when two matrices (or a matrix and a divisor) disagree on moduli."""


class NonInvertibleMatrixError(ValueError):
    """Raised when a matrix with non-unit determinant enters a group computation."""


class BudgetExceededError(RuntimeError):
    """Raised when an enumeration would exceed the configured element budget."""


def closure_budget(override: int | None = None) -> int:
    """Effective element budget: explicit override, else env var, else default."""
    if override is not None:
        return override
    env = os.environ.get(_BUDGET_ENV)
    return int(env) if env else DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True, order=True)
class ModMatrix:
    """A 2x2 matrix over Z/nZ; entries are kept strictly reduced mod n."""

    modulus: int
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        n = self.modulus
        if n < 1:
            raise ValueError(f"modulus must be >= 1, got {n}")
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, getattr(self, name) % n)

    @classmethod
    def identity(cls, n: int) -> "ModMatrix":
        return cls(n, 1, 0, 0, 1)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.modulus

    def is_invertible(self) -> bool:
        return math.gcd(self.det(), self.modulus) == 1

    def __mul__(self, other: "ModMatrix") -> "ModMatrix":
        return mat_mul(self, other)

    def __repr__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]] mod {self.modulus}"


def mat_mul(A: ModMatrix, B: ModMatrix) -> ModMatrix:
    """Product AB reduced mod the common modulus."""
    if A.modulus != B.modulus:
        raise ModulusMismatchError(f"moduli differ: {A.modulus} vs {B.modulus}")
    n = A.modulus
    return ModMatrix(
        n,
        A.a * B.a + A.b * B.c,
        A.a * B.b + A.b * B.d,
        A.c * B.a + A.d * B.c,
        A.c * B.b + A.d * B.d,
    )


def mat_det(A: ModMatrix) -> int:
    return A.det()


def mat_inv(A: ModMatrix) -> ModMatrix:
    """Inverse via adjugate times the modular inverse of the determinant."""
    n = A.modulus
    det = A.det()
    try:
        inv = pow(det, -1, n)
    except ValueError:
        raise NonInvertibleMatrixError(
            f"det {det} is not a unit mod {n}; matrix {A!r} has no inverse"
        ) from None
    return ModMatrix(n, inv * A.d, -inv * A.b, -inv * A.c, inv * A.a)


def reduce_mat(A: ModMatrix, d: int) -> ModMatrix:
    """Entrywise reduction to the divisor d of A's modulus."""
    if d < 1 or A.modulus % d != 0:
        raise ModulusMismatchError(f"{d} does not divide modulus {A.modulus}")
    return ModMatrix(d, A.a, A.b, A.c, A.d)


# ---------------------------------------------------------------------------
# packed-key helpers (internal)


def _check_modulus(m: int) -> None:
    if m < 1:
        raise ValueError(f"modulus must be >= 1, got {m}")
    if m > MAX_MODULUS:
        raise ValueError(f"modulus {m} exceeds packing limit {MAX_MODULUS}")


def _pack(a, b, c, d, m: int):
    return ((a * m + b) * m + c) * m + d


def _unpack(keys: np.ndarray, m: int):
    d = keys % m
    r = keys // m
    c = r % m
    r //= m
    b = r % m
    a = r // m
    return a, b, c, d


def _pack_mat(M: ModMatrix) -> int:
    return int(_pack(M.a, M.b, M.c, M.d, M.modulus))


def _key_to_mat(key: int, m: int) -> ModMatrix:
    key = int(key)
    d = key % m
    key //= m
    c = key % m
    key //= m
    return ModMatrix(m, key // m, key % m, c, d)


def _member_mask(sorted_keys: np.ndarray, cand: np.ndarray) -> np.ndarray:
    """Boolean mask: which candidates occur in the sorted key array."""
    if sorted_keys.size == 0:
        return np.zeros(cand.shape, dtype=bool)
    pos = np.searchsorted(sorted_keys, cand)
    pos = np.minimum(pos, sorted_keys.size - 1)
    return sorted_keys[pos] == cand


# ---------------------------------------------------------------------------
# subgroup closures


class SubgroupClosure:
    """An explicitly enumerated subgroup of GL2(Z/mZ).

    `keys` is the sorted array of packed elements (canonical order);
    `generators` records provenance when the closure was produced from a
    generating set and is empty for derived closures (kernels, reductions,
    character kernels).
    """

    __slots__ = ("modulus", "generators", "keys", "_order_mod_cache")

    def __init__(self, modulus: int, keys: np.ndarray, generators: tuple[ModMatrix, ...] = ()):
        _check_modulus(modulus)
        self.modulus = modulus
        self.keys = keys
        self.generators = generators
        self._order_mod_cache: dict[int, int] = {}

    @property
    def order(self) -> int:
        return int(self.keys.size)

    def __len__(self) -> int:
        return self.order

    def __iter__(self) -> Iterator[ModMatrix]:
        m = self.modulus
        for k in self.keys:
            yield _key_to_mat(k, m)

    def __contains__(self, M: ModMatrix) -> bool:
        if M.modulus != self.modulus:
            return False
        i = int(np.searchsorted(self.keys, _pack_mat(M)))
        return i < self.keys.size and int(self.keys[i]) == _pack_mat(M)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SubgroupClosure)
            and self.modulus == other.modulus
            and self.keys.size == other.keys.size
            and bool(np.array_equal(self.keys, other.keys))
        )

    def __repr__(self) -> str:
        return f"SubgroupClosure(mod {self.modulus}, order {self.order})"

    def entry_arrays(self):
        return _unpack(self.keys, self.modulus)


def from_matrices(modulus: int, mats: Iterable[ModMatrix]) -> SubgroupClosure:
    """Closure object from an explicit element list (assumed to be a subgroup)."""
    _check_modulus(modulus)
    keys = np.unique(np.array([_pack_mat(M) for M in mats], dtype=np.int64))
    return SubgroupClosure(modulus, keys)


def trivial_subgroup(modulus: int) -> SubgroupClosure:
    return from_matrices(modulus, [ModMatrix.identity(modulus)])


def close(
    modulus: int,
    generators: Sequence[ModMatrix],
    budget: int | None = None,
) -> SubgroupClosure:
    """Breadth-first product closure of the generators together with I.

    No inverses are needed: the group is finite, so closure under right
    multiplication by the generators already yields the generated subgroup.
    Exceeding the element budget raises; there is no silent truncation.
    """
    _check_modulus(modulus)
    limit = closure_budget(budget)
    gens = []
    for G in generators:
        if G.modulus != modulus:
            raise ModulusMismatchError(
                f"generator modulus {G.modulus} differs from closure modulus {modulus}"
            )
        if not G.is_invertible():
            raise NonInvertibleMatrixError(f"generator {G!r} has non-unit determinant")
        gens.append(G.entries)

    m = modulus
    known = np.array([_pack_mat(ModMatrix.identity(m))], dtype=np.int64)
    frontier = known
    while frontier.size and gens:
        a, b, c, d = _unpack(frontier, m)
        batches = []
        for (e, f, g, h) in gens:
            na = (a * e + b * g) % m
            nb = (a * f + b * h) % m
            nc = (c * e + d * g) % m
            nd = (c * f + d * h) % m
            batches.append(_pack(na, nb, nc, nd, m))
        cand = np.unique(np.concatenate(batches))
        new = cand[~_member_mask(known, cand)]
        if known.size + new.size > limit:
            raise BudgetExceededError(
                f"closure mod {m} exceeded budget {limit} "
                f"({known.size + new.size} elements and growing)"
            )
        if new.size:
            known = np.union1d(known, new)
        frontier = new
    closure = SubgroupClosure(modulus, known, tuple(ModMatrix(m, *g) for g in gens))
    return closure


def _iter_gl2_chunks(m: int, chunk: int = _CHUNK):
    """Yield entry arrays (a, b, c, d) covering GL2(Z/mZ) exactly once.

    Enumerates GL2 of each prime-power factor by brute force and glues the
    factors with CRT coefficients, streaming in chunks so that moduli with
    psi(m) in the tens of millions stay within memory.
    """
    _check_modulus(m)
    if m == 1:
        yield tuple(np.zeros(1, dtype=np.int64) for _ in range(4))
        return
    fac = factorize(m)
    comps = []
    crt_coeff = []
    for p, e in fac.items():
        q = p**e
        idx = np.arange(q**4, dtype=np.int64)
        d = idx % q
        r = idx // q
        c = r % q
        r //= q
        b = r % q
        a = r // q
        unit = ((a * d - b * c) % p) != 0
        comps.append(tuple(x[unit] for x in (a, b, c, d)))
        other = m // q
        crt_coeff.append(other * pow(other, -1, q))
    sizes = [comp[0].size for comp in comps]
    total = math.prod(sizes)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        out = [np.zeros(idx.size, dtype=np.int64) for _ in range(4)]
        rem = idx
        for comp, coeff, size in zip(comps, crt_coeff, sizes):
            sub = rem % size
            rem = rem // size
            for j in range(4):
                out[j] += coeff * comp[j][sub]
        yield tuple(x % m for x in out)


def full_gl2(m: int, budget: int | None = None) -> SubgroupClosure:
    """All of GL2(Z/mZ) as an explicit closure."""
    limit = closure_budget(budget)
    total = psi(m)
    if total > limit:
        raise BudgetExceededError(f"GL2(Z/{m}Z) has {total} elements; budget is {limit}")
    parts = [_pack(a, b, c, d, m) for a, b, c, d in _iter_gl2_chunks(m)]
    keys = np.sort(np.concatenate(parts))
    H = SubgroupClosure(m, keys)
    assert H.order == total
    return H


def full_preimage(H: SubgroupClosure, M: int, budget: int | None = None) -> SubgroupClosure:
    """Elements of GL2(Z/MZ) whose reduction mod H.modulus lies in H."""
    m = H.modulus
    if M % m != 0:
        raise ModulusMismatchError(f"{m} does not divide target modulus {M}")
    limit = closure_budget(budget)
    expected = H.order * (psi(M) // psi(m))
    if expected > limit:
        raise BudgetExceededError(f"preimage would have {expected} elements; budget is {limit}")
    parts = []
    for a, b, c, d in _iter_gl2_chunks(M):
        red = _pack(a % m, b % m, c % m, d % m, m)
        keep = _member_mask(H.keys, red)
        if keep.any():
            parts.append(_pack(a, b, c, d, M)[keep])
    keys = np.sort(np.concatenate(parts))
    out = SubgroupClosure(M, keys)
    assert out.order == expected
    return out


def reduce_subgroup(H: SubgroupClosure, d: int) -> SubgroupClosure:
    """The image of H under entrywise reduction mod d (d | m)."""
    m = H.modulus
    if d < 1 or m % d != 0:
        raise ModulusMismatchError(f"{d} does not divide modulus {m}")
    a, b, c, dd = H.entry_arrays()
    keys = np.unique(_pack(a % d, b % d, c % d, dd % d, d))
    return SubgroupClosure(d, keys)


def order_mod(H: SubgroupClosure, d: int) -> int:
    """Cardinality of H mod d, i.e. the degree [Q(E[d]):Q] it encodes."""
    m = H.modulus
    if d < 1 or m % d != 0:
        raise ModulusMismatchError(f"{d} does not divide modulus {m}")
    cached = H._order_mod_cache.get(d)
    if cached is None:
        if d == m:
            cached = H.order
        elif d == 1:
            cached = 1
        else:
            a, b, c, dd = H.entry_arrays()
            cached = int(np.unique(_pack(a % d, b % d, c % d, dd % d, d)).size)
        H._order_mod_cache[d] = cached
    return cached


def order_mod_extended(H: SubgroupClosure, n: int) -> int:
    """|H mod n| for arbitrary n >= 1, for H whose level divides its modulus.

    The caller (record) declares that H is the mod-m image of an open group
    of level dividing m.  Each prime power of n beyond its power in m then
    contributes an exact factor: p^4 per extra power when p already divides
    the current modulus, psi(p) for a prime not dividing it at all.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    m = H.modulus
    k0 = 1
    extra = 1
    for p, e in factorize(n).items():
        em = valuation(m, p) if m % p == 0 else 0
        k0 *= p ** min(e, em)
        if e > em:
            if em == 0:
                extra *= psi(p) * p ** (4 * (e - 1))
            else:
                extra *= p ** (4 * (e - em))
    return order_mod(H, k0) * extra


def kernel_of_reduction(H: SubgroupClosure, j: int) -> SubgroupClosure:
    """H intersected with the kernel of reduction mod j, as a closure mod m."""
    m = H.modulus
    if j < 1 or m % j != 0:
        raise ModulusMismatchError(f"{j} does not divide modulus {m}")
    a, b, c, d = H.entry_arrays()
    one = 1 % j
    mask = (a % j == one) & (b % j == 0) & (c % j == 0) & (d % j == one)
    return SubgroupClosure(m, H.keys[mask])


def level(H: SubgroupClosure) -> int:
    """Least divisor d of m such that H is the full preimage of H mod d.

    Computed relative to the given modulus only; whether m itself is a
    multiple of the true adelic level is the record's declared assumption.
    """
    m = H.modulus
    psim = psi(m)
    for d in divisors(m):
        # |preimage of (H mod d)| = |H mod d| * psi(m)/psi(d); H equals it iff sizes match
        if H.order * psi(d) == order_mod(H, d) * psim:
            return d
    raise AssertionError("unreachable: d = m always satisfies the preimage condition")


@dataclass(frozen=True)
class ResidueGroup:
    """A subgroup of the unit group (Z/kZ)^x, enumerated explicitly."""

    modulus: int
    elements: frozenset[int]

    def __post_init__(self):
        if 1 % self.modulus not in self.elements:
            raise ValueError("residue group must contain 1")
        for x in self.elements:
            if math.gcd(x, self.modulus) != 1:
                raise ValueError(f"{x} is not a unit mod {self.modulus}")

    @property
    def order(self) -> int:
        return len(self.elements)


def det_image(H: SubgroupClosure, k: int) -> ResidueGroup:
    """Image of H under determinant followed by reduction mod k (k | m)."""
    m = H.modulus
    if k < 1 or m % k != 0:
        raise ModulusMismatchError(f"{k} does not divide modulus {m}")
    a, b, c, d = H.entry_arrays()
    dets = np.unique((a * d - b * c) % m % k)
    return ResidueGroup(k, frozenset(int(x) for x in dets))


def intersect_sl2(H: SubgroupClosure) -> SubgroupClosure:
    """Elements of H with determinant 1."""
    m = H.modulus
    a, b, c, d = H.entry_arrays()
    mask = (a * d - b * c) % m == 1 % m
    return SubgroupClosure(m, H.keys[mask])


def generating_set(H: SubgroupClosure, budget: int | None = None) -> tuple[ModMatrix, ...]:
    """A small generating set, grown greedily in canonical element order."""
    if H.generators and close(H.modulus, H.generators, budget).order == H.order:
        return H.generators
    gens: list[ModMatrix] = []
    cur = trivial_subgroup(H.modulus)
    while cur.order < H.order:
        missing = H.keys[~_member_mask(cur.keys, H.keys)]
        gens.append(_key_to_mat(int(missing[0]), H.modulus))
        cur = close(H.modulus, gens, budget)
    return tuple(gens)


def commutator_subgroup(H: SubgroupClosure, budget: int | None = None) -> SubgroupClosure:
    """The subgroup generated by all commutators of H.

    Computed as the normal closure of the commutators of a generating set,
    which agrees with the closure of all pairwise commutators but avoids
    the |H|^2 product sweep.
    """
    gens = generating_set(H, budget)
    if len(gens) <= 1:
        return trivial_subgroup(H.modulus)
    seed: list[ModMatrix] = []
    for i, g in enumerate(gens):
        gi = mat_inv(g)
        for h in gens:
            if h is g:
                continue
            seed.append(g * h * gi * mat_inv(h))
    N = close(H.modulus, seed, budget)
    while True:
        new = []
        for g in gens:
            gi = mat_inv(g)
            for n in seed:
                conj = g * n * gi
                if conj not in N:
                    new.append(conj)
        if not new:
            return N
        seed.extend(new)
        N = close(H.modulus, seed, budget)


def commutator_subgroup_bruteforce(H: SubgroupClosure, budget: int | None = None) -> SubgroupClosure:
    """Independent oracle: closure of every commutator aba^-1 b^-1, a,b in H."""
    mats = list(H)
    comms = []
    for A in mats:
        Ai = mat_inv(A)
        for B in mats:
            comms.append(A * B * Ai * mat_inv(B))
    return close(H.modulus, comms, budget)


# ---------------------------------------------------------------------------
# the Serre subgroup


def _eps_table() -> np.ndarray:
    """Sign character of GL2(F_2) indexed by the 4-bit packed mod-2 matrix.

    eps(g) is the parity of the permutation g induces on the three nonzero
    vectors of F_2^2 (+1 for the identity and 3-cycles, -1 for swaps).
    """
    table = np.zeros(16, dtype=np.int64)
    vecs = [(1, 0), (0, 1), (1, 1)]
    for key in range(16):
        a, b, c, d = (key >> 3) & 1, (key >> 2) & 1, (key >> 1) & 1, key & 1
        if (a * d - b * c) % 2 == 0:
            continue
        perm = [vecs.index((((a * x + b * y) % 2), ((c * x + d * y) % 2))) for x, y in vecs]
        fixed = sum(1 for i, t in enumerate(perm) if i == t)
        table[key] = -1 if fixed == 1 else 1
    return table


_EPS = _eps_table()


def serre_modulus(delta_sf: int) -> int:
    """lcm(2, conductor of the quadratic character of Q(sqrt(delta_sf)))."""
    _, cond = quadratic_character(delta_sf)
    return math.lcm(2, cond)


def serre_subgroup(delta_sf: int, m: int | None = None, budget: int | None = None) -> SubgroupClosure:
    """The adelic image of a Serre curve with discriminant class delta_sf.

    The index-two subgroup of GL2(Z/mZ) cut out by eps(g) * chi(det g) = 1,
    where chi is the quadratic character of Q(sqrt(delta_sf)) and eps the
    sign character of GL2(F_2) inflated through reduction mod 2.
    """
    if not is_squarefree(delta_sf):
        raise ValueError(f"delta_sf must be squarefree, got {delta_sf}")
    if delta_sf == 1:
        raise ValueError("delta_sf = 1 is a perfect square; chi would be trivial")
    D, cond = quadratic_character(delta_sf)
    expected_m = math.lcm(2, cond)
    if m is None:
        m = expected_m
    elif m != expected_m:
        raise ValueError(f"modulus must be lcm(2, conductor) = {expected_m}, got {m}")
    limit = closure_budget(budget)
    total = psi(m) // 2
    if total > limit:
        raise BudgetExceededError(f"Serre subgroup mod {m} has {total} elements; budget is {limit}")
    chi = np.array([kronecker(D, x) for x in range(cond)], dtype=np.int64)
    parts = []
    for a, b, c, d in _iter_gl2_chunks(m):
        det = (a * d - b * c) % m
        key2 = ((a % 2) << 3) | ((b % 2) << 2) | ((c % 2) << 1) | (d % 2)
        keep = _EPS[key2] * chi[det % cond] == 1
        if keep.any():
            parts.append(_pack(a, b, c, d, m)[keep])
    keys = np.sort(np.concatenate(parts))
    H = SubgroupClosure(m, keys)
    assert H.order == total, f"Serre subgroup mod {m}: got {H.order}, expected {total}"
    return H
