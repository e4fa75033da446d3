#!/usr/bin/env python3
"""Regenerate src/invfactors/fixtures/curves.json.

Every generator set stored in the corpus is verified here against an
independent construction (character-kernel enumeration for the Serre
record, explicit fiber products for the toy entanglement records) before
being written, so the bundled file is reproducible from this script.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from invfactors import glgroup as gg
from invfactors.coincidence import family_instantiate
from invfactors.ffcurve import WeierstrassCurve
from invfactors.records import CurveRecord, serialize_records, validate_record

OUT = Path(__file__).resolve().parents[1] / "src" / "invfactors" / "fixtures" / "curves.json"


def gens_as_rows(gens):
    return tuple(g.entries for g in gens)


def verified_generating_set(H: gg.SubgroupClosure) -> tuple[gg.ModMatrix, ...]:
    gens = gg.generating_set(H)
    assert gg.close(H.modulus, gens) == H
    return gens


def crt_product_closure(factors: list[tuple[int, list[tuple[int, int, int, int]]]], m: int):
    """Explicit element set of a fiber-product subgroup given per-factor element lists.

    `factors` pairs each prime-power modulus with the list of entry tuples
    allowed there; the lists must already be matched (same length, aligned
    rows combine), so callers pass the graph of their gluing directly.
    """
    rows = len(factors[0][1])
    assert all(len(lst) == rows for _, lst in factors)
    mats = []
    for i in range(rows):
        a = b = c = d = 0
        for q, lst in factors:
            coeff = (m // q) * pow(m // q, -1, q)
            ea, eb, ec, ed = lst[i]
            a += coeff * ea
            b += coeff * eb
            c += coeff * ec
            d += coeff * ed
        mats.append(gg.ModMatrix(m, a, b, c, d))
    return gg.from_matrices(m, mats)


def serre_record() -> CurveRecord:
    """37.a1, the standard Serre curve: y^2 + y = x^3 - x, Delta = 37."""
    H = gg.serre_subgroup(37)  # modulus lcm(2, 37) = 74
    m = H.modulus
    # Reidemeister-Schreier generators of the index-2 kernel of eps * chi(det)
    # from generators of GL2(Z/74): elementary matrices + a diagonal unit.
    D, cond = 37, 37
    from invfactors.numtheory import kronecker

    def lam(M: gg.ModMatrix) -> int:
        eps = int(gg._EPS[((M.a % 2) << 3) | ((M.b % 2) << 2) | ((M.c % 2) << 1) | (M.d % 2)])
        return eps * kronecker(D, M.det() % cond)

    def mult_order(x: int, mod: int) -> int:
        o, y = 1, x % mod
        while y != 1:
            y = y * x % mod
            o += 1
        return o

    g = next(x for x in range(3, 74, 2) if mult_order(x, 74) == 36)
    gl_gens = [
        gg.ModMatrix(m, 1, 1, 0, 1),
        gg.ModMatrix(m, 1, 0, 1, 1),
        gg.ModMatrix(m, g, 0, 0, 1),
    ]
    s = next(G for G in gl_gens if lam(G) == -1)
    si = gg.mat_inv(s)
    kernel_gens = []
    for G in gl_gens:
        if lam(G) == 1:
            kernel_gens += [G, s * G * si]
        else:
            kernel_gens += [G * si, s * G]
    closed = gg.close(m, kernel_gens)
    assert closed == H, (closed.order, H.order)
    gens = verified_generating_set_from(kernel_gens, H)
    curve = WeierstrassCurve(0, 0, 1, -1, 0)
    assert curve.discriminant == 37
    return CurveRecord(
        label="37.a1",
        weierstrass=(0, 0, 1, -1, 0),
        conductor=37,
        discriminant=37,
        cm=False,
        a_serre=1,
        adelic_level=74,
        image_generators=gens_as_rows(gens),
        metadata={
            "serre_delta_sf": 37,
            "note": "Serre curve: adelic image is the index-2 character kernel at level 74",
        },
    )


def verified_generating_set_from(candidates, H):
    """Trim a verified generating list greedily while it still generates."""
    gens = list(dict.fromkeys(candidates))
    assert gg.close(H.modulus, gens) == H
    i = 0
    while i < len(gens):
        trial = gens[:i] + gens[i + 1 :]
        if trial and gg.close(H.modulus, trial) == H:
            gens = trial
        else:
            i += 1
    return tuple(gens)


def toy_196() -> CurveRecord:
    """Fiber product mod 126 reproducing Q(E[2]) inside Q(E[7]) and Q(E[9]).

    Components: A3 inside GL2(F_2); all of GL2(Z/7); the split Cartan mod 9.
    The gluing identifies the three Z/3 quotients (mod-2 image; det mod 7
    through its cube-class; first diagonal entry mod 9 likewise).
    """
    # discrete-log-to-Z/3 maps with kernel {+-1}
    nu7 = {1: 0, 3: 1, 2: 2, 6: 0, 4: 1, 5: 2}
    nu9 = {1: 0, 2: 1, 4: 2, 8: 0, 7: 1, 5: 2}
    c = gg.ModMatrix(2, 0, 1, 1, 1)
    powers = [gg.ModMatrix.identity(2), c, c * c]
    gl7 = gg.full_gl2(7)
    by_t2, by_t7, by_t9 = [], [], []
    for M in gl7:
        t = nu7[M.det()]
        by_t7.append((t, M.entries))
    cartan = []
    for a in (1, 2, 4, 5, 7, 8):
        for d in (1, 2, 4, 5, 7, 8):
            cartan.append((nu9[a], (a, 0, 0, d)))
    rows2, rows7, rows9 = [], [], []
    for t in (0, 1, 2):
        e2 = powers[t].entries
        sevens = [e for tt, e in by_t7 if tt == t]
        nines = [e for tt, e in cartan if tt == t]
        for e7 in sevens:
            for e9 in nines:
                rows2.append(e2)
                rows7.append(e7)
                rows9.append(e9)
    H = crt_product_closure([(2, rows2), (7, rows7), (9, rows9)], 126)
    assert H.order == 24192
    assert gg.order_mod(H, 7) == gg.order_mod(H, 14) == 2016
    assert gg.order_mod(H, 9) == gg.order_mod(H, 18) == 36
    assert gg.order_mod(H, 2) == 3
    assert gg.det_image(H, 126).order == 36  # surjective: phi(126) = 36
    gens = verified_generating_set(H)
    curve = WeierstrassCurve(0, 1, 0, -2, -1)
    return CurveRecord(
        label="toy.196style",
        weierstrass=(0, 1, 0, -2, -1),
        conductor=196,
        discriminant=curve.discriminant,
        cm=False,
        a_serre=None,
        adelic_level=126,
        image_generators=gens_as_rows(gens),
        metadata={
            "note": (
                "synthetic fiber product mod 126 reproducing the 196.a1 coincidence "
                "pattern (cubic two-torsion field inside the 7- and 9-division fields); "
                "not a literal image computation for the carried model"
            ),
        },
    )


def toy_19a3() -> CurveRecord:
    """Product mod 6: full GL2(F_2) times the unipotent-column Borel mod 3."""
    gl2 = list(gg.full_gl2(2))
    borel = [gg.ModMatrix(3, 1, b, 0, d) for b in range(3) for d in (1, 2)]
    rows2, rows3 = [], []
    for M2 in gl2:
        for M3 in borel:
            rows2.append(M2.entries)
            rows3.append(M3.entries)
    H = crt_product_closure([(2, rows2), (3, rows3)], 6)
    assert H.order == 36
    gens = verified_generating_set(H)
    curve = WeierstrassCurve(0, 1, 1, 1, 0)
    assert curve.discriminant == -19
    return CurveRecord(
        label="toy.19a3style",
        weierstrass=(0, 1, 1, 1, 0),
        conductor=19,
        discriminant=-19,
        cm=False,
        a_serre=3,
        adelic_level=6,
        image_generators=gens_as_rows(gens),
        metadata={
            "note": (
                "mod-6 product of the full mod-2 image with the stated mod-3 Borel "
                "image of 19.a3, declared as a toy level for criteria demonstrations"
            ),
        },
    )


def main() -> None:
    records = []

    curve_19a3 = WeierstrassCurve(0, 1, 1, 1, 0)
    records.append(
        CurveRecord(
            label="19.a3",
            weierstrass=(0, 1, 1, 1, 0),
            conductor=19,
            discriminant=curve_19a3.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=None,
            image_generators=None,
            metadata={
                "stated_images": [
                    {
                        "modulus": 3,
                        "generators": [[1, 1, 0, 1], [1, 0, 0, 2]],
                        "note": "mod-3 image: upper triangular with trivial first column",
                    }
                ],
            },
        )
    )

    curve_50b3 = WeierstrassCurve(1, 1, 1, -3, 1)
    records.append(
        CurveRecord(
            label="50.b3",
            weierstrass=(1, 1, 1, -3, 1),
            conductor=50,
            discriminant=curve_50b3.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=None,
            image_generators=None,
            metadata={
                "stated_images": [
                    {
                        "modulus": 3,
                        "generators": [[2, 0, 0, 1], [1, 0, 0, 2], [1, 1, 0, 1]],
                        "note": "mod-3 image: the full Borel of upper triangular matrices",
                    }
                ],
                "division_degrees": {"3": 12, "6": 72, "15": 120},
            },
        )
    )

    curve_960a5 = WeierstrassCurve(0, -1, 0, -641, 3105)
    records.append(
        CurveRecord(
            label="960.a5",
            weierstrass=(0, -1, 0, -641, 3105),
            conductor=960,
            discriminant=curve_960a5.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=None,
            image_generators=None,
            metadata={
                "mod8_field": {"abelian": True, "zeta8_in_mod4": True, "conductor": 120},
                "family": {"name": "X187i", "t": 1},
            },
        )
    )

    hesse2 = family_instantiate("Hesse", 2)
    curve_189b2 = hesse2.curve()
    records.append(
        CurveRecord(
            label="189.b2",
            weierstrass=(0, 0, 0, hesse2.a4, hesse2.a6),
            conductor=189,
            discriminant=curve_189b2.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=None,
            image_generators=None,
            metadata={
                "three_torsion_is_zeta3": True,
                "family": {"name": "Hesse", "t": 2},
                "note": "family model (minimal discriminant differs by the 2^12 square)",
            },
        )
    )

    curve_196a1 = WeierstrassCurve(0, 1, 0, -2, -1)
    records.append(
        CurveRecord(
            label="196.a1",
            weierstrass=(0, 1, 0, -2, -1),
            conductor=196,
            discriminant=curve_196a1.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=None,
            image_generators=None,
            metadata={
                "two_torsion_field": {"abelian": True, "degree": 3, "conductor": 7},
            },
        )
    )

    curve_5184 = WeierstrassCurve(0, 0, 0, -3, 4)
    records.append(
        CurveRecord(
            label="5184.j1",
            weierstrass=(0, 0, 0, -3, 4),
            conductor=5184,
            discriminant=curve_5184.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=None,
            image_generators=None,
            metadata={
                "stated_adelic_level": 4,
                "note": "source states adelic level 4 but no generators; tower strict at 2",
            },
        )
    )

    curve_full2 = WeierstrassCurve(0, 0, 0, -7, 6)
    records.append(
        CurveRecord(
            label="full2torsion",
            weierstrass=(0, 0, 0, -7, 6),
            conductor=None,
            discriminant=curve_full2.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=2,
            image_generators=(),
            metadata={
                "two_torsion_field": {"abelian": True, "degree": 1, "conductor": 1},
                "note": (
                    "full rational two-torsion: trivial mod-2 image declared at toy "
                    "level 2 (square discriminant, no quadratic entanglement)"
                ),
            },
        )
    )

    x60d = family_instantiate("X60d", 1)
    curve_x60d = x60d.curve()
    records.append(
        CurveRecord(
            label="x60d.t1",
            weierstrass=(0, 0, 0, x60d.a4, x60d.a6),
            conductor=None,
            discriminant=curve_x60d.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=4,
            image_generators=((1, 1, 0, 3),),
            metadata={
                "family": {"name": "X60d", "t": 1},
                "note": (
                    "order-2 mod-4 image from the family; declared level 4 "
                    "(squarefree discriminant part is -1, entanglement lives mod 4)"
                ),
            },
        )
    )

    x60tw = family_instantiate("X60_twist", 1, twist=5)
    curve_x60tw = x60tw.curve()
    records.append(
        CurveRecord(
            label="x60twist.5",
            weierstrass=(0, 0, 0, x60tw.a4, x60tw.a6),
            conductor=None,
            discriminant=curve_x60tw.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=None,
            image_generators=None,
            metadata={
                "stated_images": [
                    {
                        "modulus": 4,
                        "generators": [[1, 1, 0, 3], [3, 0, 0, 3]],
                        "note": "mod-4 image of the twist; 4 is not a level multiple here",
                    }
                ],
                "mod4_field": {"abelian": True, "two_torsion_is_qi": True, "conductor": 20},
                "family": {"name": "X60_twist", "t": 1, "twist": 5},
            },
        )
    )

    x27h = family_instantiate("X27h", 3)
    curve_x27h = x27h.curve()
    records.append(
        CurveRecord(
            label="x27h.t3",
            weierstrass=(0, 0, 0, x27h.a4, x27h.a6),
            conductor=None,
            discriminant=curve_x27h.discriminant,
            cm=False,
            a_serre=None,
            adelic_level=None,
            image_generators=None,
            metadata={
                "stated_images": [
                    {
                        "modulus": 4,
                        "generators": [[1, 1, 0, 3], [1, 2, 0, 1]],
                        "note": "mod-4 image contained in this group (twist subtlety)",
                    }
                ],
                "mod4_field": {"abelian": True, "two_torsion_is_qi": True, "conductor": 12},
                "family": {"name": "X27h", "t": 3},
            },
        )
    )

    records.append(serre_record())
    records.append(toy_196())
    records.append(toy_19a3())

    for rec in records:
        issues = validate_record(rec)
        assert not issues, f"{rec.label}: {[str(i) for i in issues]}"

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(serialize_records(records))
    print(f"wrote {OUT} with {len(records)} records")


if __name__ == "__main__":
    main()
