"""Division-field coincidences: detection, classification, families, scans.

A p-coincidence at j is an equality of consecutive division-field degrees,
|H mod j| = |H mod jp|; it forces the density at j to vanish.  This module
detects coincidences from image data, classifies them as primitive or
induced from a smaller level, instantiates the explicit curve families
built from abelian division fields, predicts coincidences from field
metadata, and runs the two conjecture scans over a record corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import density, glgroup
from .glgroup import ModMatrix, SubgroupClosure
from .numtheory import (
    divisors,
    is_prime,
    is_squarefree,
    prime_factors,
    squarefree_part,
    valuation,
)
from .records import CurveRecord


@dataclass(frozen=True)
class Coincidence:
    """A detected p-coincidence at level j for one record's image."""

    j: int
    p: int
    primitive: bool
    source: str = ""
    witness_divisor: int | None = None  # proper d | j inducing an imprimitive one

    def as_row(self) -> str:
        kind = "primitive" if self.primitive else f"imprimitive(from {self.witness_divisor})"
        return f"({self.j},{self.p}) {kind}"


def is_p_coincidence(H: SubgroupClosure, j: int, p: int) -> bool:
    """Whether |H mod j| = |H mod jp| under the record's declared level.

    Primes away from the modulus never produce coincidences: the extension
    factor is psi(p) or p^4, both > 1, so those return False immediately.
    """
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if H.modulus % p != 0:
        return False
    return glgroup.order_mod_extended(H, j) == glgroup.order_mod_extended(H, j * p)


def classify_primitive(H: SubgroupClosure, j: int, p: int) -> tuple[bool, int | None]:
    """Primitive unless induced from a proper divisor d | j with j/d coprime to p."""
    for d in divisors(j):
        if d < j and math.gcd(j // d, p) == 1 and is_p_coincidence(H, d, p):
            return False, d
    return True, None


def all_coincidences(H: SubgroupClosure, j_bound: int, source: str = "") -> list[Coincidence]:
    """All p-coincidences with j <= j_bound; only p | m can qualify."""
    if j_bound < 1:
        raise ValueError(f"j_bound must be >= 1, got {j_bound}")
    out = []
    for j in range(1, j_bound + 1):
        for p in prime_factors(H.modulus):
            if is_p_coincidence(H, j, p):
                primitive, wit = classify_primitive(H, j, p)
                out.append(Coincidence(j, p, primitive, source, wit))
    return out


# ---------------------------------------------------------------------------
# explicit families from abelian division fields


@dataclass(frozen=True)
class PredictedImage:
    """Image data a family carries for its members (mod a 2-power).

    exact=False means the family only pins the image inside this group.
    """

    modulus: int
    generators: tuple[ModMatrix, ...]
    exact: bool


@dataclass(frozen=True)
class FamilyPoint:
    family: str
    t: Fraction
    twist: int | None
    a4: int
    a6: int
    scale: int  # the (u^2, u^3) clearing factor applied to the rational model
    predicted_image: PredictedImage | None

    def curve(self):
        from .ffcurve import WeierstrassCurve

        return WeierstrassCurve(0, 0, 0, self.a4, self.a6)


_GEN_11_0M1 = ModMatrix(4, 1, 1, 0, -1)
_GEN_M10_0M1 = ModMatrix(4, -1, 0, 0, -1)
_GEN_12_01 = ModMatrix(4, 1, 2, 0, 1)

FAMILY_IMAGES: dict[str, PredictedImage | None] = {
    "X60d": PredictedImage(4, (_GEN_11_0M1,), exact=True),
    "X60_twist": PredictedImage(4, (_GEN_11_0M1, _GEN_M10_0M1), exact=True),
    "X27h": PredictedImage(4, (_GEN_11_0M1, _GEN_12_01), exact=False),
    "X187i": None,
    "Hesse": None,
}


def family_rational_model(
    family: str, t: Fraction | int, twist: int | None = None
) -> tuple[Fraction, Fraction]:
    """Coefficients (A, B) of y^2 = x^3 + Ax + B over Q, before clearing."""
    t = Fraction(t)
    if family == "X60d" or family == "X60_twist":
        A = -432 * t**8 + 1512 * t**4 - 27
        B = 3456 * t**12 + 28512 * t**8 - 7128 * t**4 - 54
    elif family == "X27h":
        A = -432 * t**4 + 1512 * t**2 - 27
        B = 3456 * t**6 + 28512 * t**4 - 7128 * t**2 - 54
    elif family == "X187i":
        A = -108 * t**16 - 24192 * t**8 - 27648
        B = -432 * t**24 + 228096 * t**16 + 3649536 * t**8 - 1769472
    elif family == "Hesse":
        A = -27 * t * (t**3 + 8)
        B = 54 * (t**6 - 20 * t**3 - 8)
    else:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(FAMILY_IMAGES)}")
    if family == "X60_twist":
        if twist is None or abs(twist) <= 1 or twist % 2 == 0 or not is_squarefree(twist):
            raise ValueError(
                f"X60_twist needs an odd squarefree twist of absolute value > 1, got {twist}"
            )
        A, B = A * twist**2, B * twist**3
    elif twist is not None:
        raise ValueError(f"family {family} takes no twist parameter")
    return A, B


def _clearing_factor(A: Fraction, B: Fraction) -> int:
    """Minimal positive u with u^4 A and u^6 B integral."""
    from .numtheory import factorize

    u = 1
    dens = factorize(A.denominator * B.denominator) if (A.denominator * B.denominator) > 1 else {}
    for q in dens:
        vu = max(
            -(-valuation(A.denominator, q) // 4) if A.denominator % q == 0 else 0,
            -(-valuation(B.denominator, q) // 6) if B.denominator % q == 0 else 0,
        )
        u *= q**vu
    return u


def family_instantiate(
    family: str, t: Fraction | int, twist: int | None = None
) -> FamilyPoint:
    """An integral short Weierstrass member of the family at parameter t.

    Denominators are cleared by the standard (u^2, u^3) scaling with the
    minimal positive integer u, so coefficients are reproducible bit for
    bit.  A parameter with vanishing discriminant is rejected.
    """
    t = Fraction(t)
    A, B = family_rational_model(family, t, twist)
    disc = -16 * (4 * A**3 + 27 * B**2)
    if disc == 0:
        raise ValueError(f"singular model: family {family} is degenerate at t = {t}")
    u = _clearing_factor(A, B)
    a4 = int(A * u**4)
    a6 = int(B * u**6)
    return FamilyPoint(family, t, twist, a4, a6, u, FAMILY_IMAGES[family])


# ---------------------------------------------------------------------------
# predictions from division-field metadata


@dataclass(frozen=True)
class Prediction:
    j: int
    p: int
    source: str
    cross_checked: bool = False
    consistent: bool | None = None


def predict_coincidence(record: CurveRecord, cross_check: bool = True) -> list[Prediction]:
    """Coincidences implied by the record's division-field metadata.

    Metadata is trusted input (conductors of abelian division fields are
    consumed, never computed here).  When the record also carries
    level-scoped image data, each prediction is checked against the image;
    an inconsistency means the record's data is wrong and is flagged.
    """
    meta = record.metadata
    preds: list[tuple[int, int, str]] = []

    two = meta.get("two_torsion_field")
    if two is not None:
        if not two.get("abelian"):
            raise ValueError(f"{record.label}: two_torsion_field metadata must be abelian")
        cond = int(two["conductor"])
        if cond % 2 == 0:
            raise ValueError(f"{record.label}: abelian two-torsion conductor must be odd")
        preds.append((cond, 2, "abelian-two-torsion"))

    mod4 = meta.get("mod4_field")
    if mod4 is not None and mod4.get("abelian") and mod4.get("two_torsion_is_qi"):
        cond = int(mod4["conductor"])
        if cond % 4 != 0 or (cond // 4) % 2 == 0:
            raise ValueError(f"{record.label}: mod-4 conductor must be 4j with j odd, got {cond}")
        preds.append((cond // 2, 2, "abelian-mod4"))

    mod8 = meta.get("mod8_field")
    if mod8 is not None and mod8.get("abelian") and mod8.get("zeta8_in_mod4"):
        cond = int(mod8["conductor"])
        if cond % 8 != 0 or (cond // 8) % 2 == 0:
            raise ValueError(f"{record.label}: mod-8 conductor must be 8j with j odd, got {cond}")
        preds.append((cond // 2, 2, "abelian-mod8"))

    if meta.get("three_torsion_is_zeta3"):
        dsf = squarefree_part(record.discriminant)
        if dsf % 3 != 0:
            raise ValueError(
                f"{record.label}: minimal three-torsion prediction needs 3 | squarefree "
                f"discriminant part, got {dsf}"
            )
        three_m = 2 * abs(dsf) if dsf % 4 == 1 else 4 * abs(dsf)
        if three_m % 3 != 0:
            raise ValueError(f"{record.label}: inconsistent discriminant data ({three_m})")
        preds.append((three_m // 3, 3, "minimal-three-torsion"))

    if not preds:
        raise ValueError(
            f"{record.label}: no division-field metadata for coincidence prediction"
        )

    H = record.closure() if (cross_check and record.has_level_scoped_image()) else None
    out = []
    for j, p, source in preds:
        if H is not None:
            out.append(Prediction(j, p, source, True, is_p_coincidence(H, j, p)))
        else:
            out.append(Prediction(j, p, source))
    return out


# ---------------------------------------------------------------------------
# conjecture scans


@dataclass
class ScanEntry:
    label: str
    skipped: str | None = None
    error: str | None = None
    modulus: int | None = None
    zeros: list[int] = field(default_factory=list)
    coincidences: list[Coincidence] = field(default_factory=list)
    zeros_without_coincidence: list[int] = field(default_factory=list)
    large_p_coincidences: list[Coincidence] = field(default_factory=list)
    assumptions: list[str] = field(default_factory=list)

    @property
    def counterexample(self) -> bool:
        return bool(self.zeros_without_coincidence or self.large_p_coincidences)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "skipped": self.skipped,
            "error": self.error,
            "modulus": self.modulus,
            "zeros": self.zeros,
            "coincidences": [
                {
                    "j": c.j,
                    "p": c.p,
                    "primitive": c.primitive,
                    "witness_divisor": c.witness_divisor,
                }
                for c in self.coincidences
            ],
            "zeros_without_coincidence": self.zeros_without_coincidence,
            "large_p_coincidences": [[c.j, c.p] for c in self.large_p_coincidences],
            "assumptions": self.assumptions,
        }


@dataclass
class ScanReport:
    j_bound: int
    entries: list[ScanEntry]

    @property
    def counterexamples(self) -> int:
        return sum(1 for e in self.entries if e.counterexample)

    def to_dict(self) -> dict:
        return {
            "j_bound": self.j_bound,
            "counterexamples": self.counterexamples,
            "records": [e.to_dict() for e in self.entries],
        }


def scan_image(H: SubgroupClosure, j_bound: int, label: str = "") -> ScanEntry:
    """Zeros and coincidences for one image, with conjecture bookkeeping.

    For every j up to the bound whose density vanishes (decided at
    gcd(j, m)), a p-coincidence at j must explain it; a zero with no
    coincidence is a counterexample to the one-prime conjecture, and any
    coincidence with p >= 5 is a counterexample to the small-prime one.
    """
    entry = ScanEntry(label=label, modulus=H.modulus)
    m = H.modulus
    for j in range(1, j_bound + 1):
        verdict = density.positivity(H, density.reduce_j(j, m)).verdict
        if verdict is density.Verdict.ZERO:
            entry.zeros.append(j)
            explained = [p for p in prime_factors(m * j) if is_p_coincidence(H, j, p)]
            if not explained:
                entry.zeros_without_coincidence.append(j)
    entry.coincidences = all_coincidences(H, j_bound, source=label)
    entry.large_p_coincidences = [c for c in entry.coincidences if c.p >= 5]
    return entry


def conjecture_scan(
    records: Sequence[CurveRecord], j_bound: int = 24, budget: int | None = None
) -> ScanReport:
    """Scan a corpus for counterexamples to the two coincidence conjectures.

    Records without level-scoped image data are reported as skipped;
    per-record failures are collected, not fatal.  Report order follows
    input order.
    """
    entries = []
    for rec in records:
        if not rec.has_level_scoped_image():
            entries.append(
                ScanEntry(label=rec.label, skipped="no level-scoped image data")
            )
            continue
        try:
            H = rec.closure(budget=budget)
            entry = scan_image(H, j_bound, label=rec.label)
            entry.assumptions = rec.assumptions()
        except Exception as exc:  # per-record errors are collected, not fatal
            entry = ScanEntry(label=rec.label, error=f"{type(exc).__name__}: {exc}")
        entries.append(entry)
    return ScanReport(j_bound, entries)
