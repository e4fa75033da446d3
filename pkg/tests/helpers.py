"""Shared test construction helpers (fiber products, random subgroups, oracles)."""

from __future__ import annotations

import random

from invfactors import glgroup as gg


def crt_glue(factors: list[tuple[int, list[tuple[int, int, int, int]]]], m: int) -> gg.SubgroupClosure:
    """Element set of a subgroup of GL2(Z/mZ) from aligned per-factor rows.

    Row i of every factor combines into one element via CRT, so the caller
    encodes graphs/fiber products by how it aligns the lists.
    """
    rows = len(factors[0][1])
    assert all(len(lst) == rows for _, lst in factors)
    coeffs = [(q, (m // q) * pow(m // q, -1, q)) for q, _ in factors]
    mats = []
    for i in range(rows):
        acc = [0, 0, 0, 0]
        for (q, lst), (_, coeff) in zip(factors, coeffs):
            for k in range(4):
                acc[k] += coeff * lst[i][k]
        mats.append(gg.ModMatrix(m, *acc))
    return gg.from_matrices(m, mats)


def product_group(comp_lists: list[tuple[int, list]], m: int) -> gg.SubgroupClosure:
    """Full direct product of per-modulus element lists, glued by CRT."""
    rows = [[]]
    for _, lst in comp_lists:
        rows = [r + [e] for r in rows for e in lst]
    factors = [
        (q, [r[i] for r in rows]) for i, (q, _) in enumerate(comp_lists)
    ]
    return crt_glue(factors, m)


def random_invertible(rng: random.Random, m: int) -> gg.ModMatrix:
    while True:
        M = gg.ModMatrix(m, rng.randrange(m), rng.randrange(m), rng.randrange(m), rng.randrange(m))
        if M.is_invertible():
            return M


def random_subgroup(rng: random.Random, m: int, max_gens: int = 3) -> gg.SubgroupClosure:
    gens = [random_invertible(rng, m) for _ in range(rng.randint(1, max_gens))]
    return gg.close(m, gens)


def naive_point_count(ainvs: tuple[int, int, int, int, int], p: int) -> int:
    """Independent oracle: double loop over (x, y) on the long model."""
    a1, a2, a3, a4, a6 = ainvs
    n = 1
    for x in range(p):
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - rhs) % p == 0:
                n += 1
    return n


def borel_full_mod3() -> gg.SubgroupClosure:
    """All upper-triangular invertible matrices mod 3 (order 12)."""
    mats = [gg.ModMatrix(3, a, b, 0, d) for a in (1, 2) for d in (1, 2) for b in range(3)]
    return gg.from_matrices(3, mats)


def gl2f2_elements() -> list[gg.ModMatrix]:
    return list(gg.full_gl2(2))
