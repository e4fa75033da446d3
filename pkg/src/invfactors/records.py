"""Curve + Galois-image records: schema, validation, serialization.

Records are a versioned JSON document.  The `adelic_level` field is the
modulus of the stored generators and is a *declared* claim that it is a
multiple of the curve's true adelic level; the claim is trusted and echoed
into every downstream report as an assumption.  Image statements the
source does not tie to the level (e.g. a paper stating only the mod-3
image) belong in metadata.stated_images, and records carrying only those
are refused by density/positivity/scan commands rather than silently
treated as level data.

Validation enforces the structural constraints relating the Serre constant
A(E), the level and the conductor: primes of A(E) divide the level, and
primes of the level divide 2 * conductor * A(E) (checked when the needed
fields are present).  Violating records are rejected with the violated
clause named; parsing returns the surviving records plus the issue list.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .glgroup import ModMatrix, SubgroupClosure, close
from .numtheory import prime_factors

try:  # importlib.resources for the bundled corpus
    from importlib.resources import files as _files
except ImportError:  # pragma: no cover
    _files = None

SCHEMA_VERSION = 1


class RecordFormatError(ValueError):
    """The records file itself is malformed (not per-record data issues)."""


@dataclass(frozen=True)
class ValidationIssue:
    label: str
    clause: str
    message: str

    def __str__(self) -> str:
        return f"{self.label}: [{self.clause}] {self.message}"


@dataclass(frozen=True)
class CurveRecord:
    label: str
    weierstrass: tuple[int, int, int, int, int]
    conductor: int | None
    discriminant: int
    cm: bool
    a_serre: int | None  # A(E): product of primes with non-surjective p-adic image
    adelic_level: int | None  # declared modulus, a multiple of the true level
    image_generators: tuple[tuple[int, int, int, int], ...] | None
    galois_image: bool = True  # False: abstract group study, det need not be surjective
    metadata: dict = field(default_factory=dict, hash=False, compare=False)

    def curve(self):
        from .ffcurve import WeierstrassCurve

        return WeierstrassCurve(*self.weierstrass)

    def has_level_scoped_image(self) -> bool:
        return self.adelic_level is not None and self.image_generators is not None

    def generator_matrices(self) -> tuple[ModMatrix, ...]:
        if not self.has_level_scoped_image():
            raise ValueError(f"record {self.label} has no level-scoped image data")
        m = self.adelic_level
        return tuple(ModMatrix(m, *g) for g in self.image_generators)

    def closure(self, budget: int | None = None) -> SubgroupClosure:
        key = (self.adelic_level, self.image_generators)
        cached = _closure_cache.get(key)
        if cached is None:
            cached = close(self.adelic_level, self.generator_matrices(), budget)
            _closure_cache[key] = cached
        return cached

    def assumptions(self) -> list[str]:
        out = []
        if self.adelic_level is not None:
            out.append(
                f"record declares that the adelic level divides {self.adelic_level}"
            )
        note = self.metadata.get("note")
        if note:
            out.append(note)
        return out

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "weierstrass": list(self.weierstrass),
            "conductor": self.conductor,
            "discriminant": self.discriminant,
            "cm": self.cm,
            "a_serre": self.a_serre,
            "adelic_level": self.adelic_level,
            "image_generators": (
                None
                if self.image_generators is None
                else [list(g) for g in self.image_generators]
            ),
            "galois_image": self.galois_image,
            "metadata": self.metadata,
        }


_closure_cache: dict[tuple, SubgroupClosure] = {}


def _unit_group_generated(dets: Iterable[int], m: int) -> set[int]:
    """Multiplicative closure of determinant values inside (Z/mZ)^x."""
    seen = {1 % m}
    frontier = [1 % m]
    gens = [d % m for d in dets]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = x * g % m
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def validate_record(rec: CurveRecord) -> list[ValidationIssue]:
    issues = []

    def bad(clause: str, message: str):
        issues.append(ValidationIssue(rec.label, clause, message))

    if rec.cm:
        bad("non-cm-required", "record is flagged CM; density computations require non-CM")
    curve_disc = rec.curve().discriminant if rec.discriminant != 0 else 0
    if rec.discriminant == 0:
        bad("nonzero-discriminant", "discriminant is 0 (singular model)")
    elif curve_disc != rec.discriminant:
        bad(
            "discriminant-consistency",
            f"stored discriminant {rec.discriminant} != model discriminant {curve_disc}",
        )
    if (rec.image_generators is None) != (rec.adelic_level is None):
        bad(
            "image-requires-level",
            "image_generators and adelic_level must be present together",
        )
    if rec.has_level_scoped_image():
        m = rec.adelic_level
        dets = []
        for g in rec.image_generators:
            M = ModMatrix(m, *g)
            if not M.is_invertible():
                bad(
                    "unit-determinant-generators",
                    f"generator {list(g)} has non-unit determinant mod {m}",
                )
            else:
                dets.append(M.det())
        det_ok = all(i.clause != "unit-determinant-generators" for i in issues)
        if det_ok and rec.galois_image:
            units = {x for x in range(m) if math.gcd(x, m) == 1}
            if _unit_group_generated(dets, m) != units:
                bad(
                    "determinant-surjectivity",
                    "closure of image generators does not have surjective determinant "
                    f"mod {m}, as a Galois image over Q must",
                )
    if rec.a_serre is not None and rec.adelic_level is not None:
        for p in prime_factors(rec.a_serre) if rec.a_serre > 1 else []:
            if rec.adelic_level % p != 0:
                bad(
                    "serre-constant-divides-level",
                    f"prime {p} of A(E) does not divide the declared level "
                    f"{rec.adelic_level}",
                )
    if (
        rec.adelic_level is not None
        and rec.a_serre is not None
        and rec.conductor is not None
    ):
        bound = 2 * rec.conductor * rec.a_serre
        for p in prime_factors(rec.adelic_level):
            if bound % p != 0:
                bad(
                    "level-primes-divide-2NA",
                    f"prime {p} of the declared level does not divide "
                    f"2 * conductor * A(E) = {bound}",
                )
    return issues


def _record_from_dict(d: dict) -> CurveRecord:
    required = {"label", "weierstrass", "discriminant", "cm"}
    missing = required - d.keys()
    if missing:
        raise RecordFormatError(f"record missing required fields: {sorted(missing)}")
    w = d["weierstrass"]
    if len(w) != 5 or not all(isinstance(x, int) for x in w):
        raise RecordFormatError(f"weierstrass must be 5 integers, got {w!r}")
    gens = d.get("image_generators")
    if gens is not None:
        gens = tuple(tuple(int(x) for x in g) for g in gens)
        if any(len(g) != 4 for g in gens):
            raise RecordFormatError("image generators must be rows [a, b, c, d]")
    return CurveRecord(
        label=str(d["label"]),
        weierstrass=tuple(int(x) for x in w),
        conductor=d.get("conductor"),
        discriminant=int(d["discriminant"]),
        cm=bool(d["cm"]),
        a_serre=d.get("a_serre"),
        adelic_level=d.get("adelic_level"),
        image_generators=gens,
        galois_image=bool(d.get("galois_image", True)),
        metadata=d.get("metadata", {}),
    )


def parse_records(path: str | Path) -> tuple[list[CurveRecord], list[ValidationIssue]]:
    """Load and validate a records file.

    Returns the records that pass validation plus the issues for those that
    were rejected.  A malformed file (bad JSON, unsupported schema) raises.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise RecordFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise RecordFormatError(
            f"{path}: expected schema_version {SCHEMA_VERSION}, "
            f"got {doc.get('schema_version') if isinstance(doc, dict) else type(doc)}"
        )
    records = []
    issues: list[ValidationIssue] = []
    labels = set()
    for raw in doc.get("records", []):
        rec = _record_from_dict(raw)
        if rec.label in labels:
            issues.append(ValidationIssue(rec.label, "unique-labels", "duplicate label"))
            continue
        labels.add(rec.label)
        rec_issues = validate_record(rec)
        if rec_issues:
            issues.extend(rec_issues)
        else:
            records.append(rec)
    return records, issues


def serialize_records(records: Iterable[CurveRecord]) -> str:
    """Canonical JSON form; parse + serialize round-trips byte-identically."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "records": [r.to_dict() for r in records],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def bundled_fixture_path() -> Path:
    """Path of the corpus of paper curves and toy images shipped with the package."""
    return Path(str(_files("invfactors").joinpath("fixtures/curves.json")))


def load_bundled(label: str | None = None):
    records, issues = parse_records(bundled_fixture_path())
    assert not issues, f"bundled corpus must validate cleanly: {[str(i) for i in issues]}"
    if label is None:
        return records
    for rec in records:
        if rec.label == label:
            return rec
    raise KeyError(f"no bundled record with label {label!r}")
