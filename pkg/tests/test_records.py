import json

import pytest

from invfactors import records as rmod


def _doc(*recs):
    return {"schema_version": 1, "records": list(recs)}


def _base(**over):
    rec = {
        "label": "t",
        "weierstrass": [0, 0, 0, -7, 6],
        "conductor": None,
        "discriminant": 6400,
        "cm": False,
        "a_serre": None,
        "adelic_level": None,
        "image_generators": None,
        "galois_image": True,
        "metadata": {},
    }
    rec.update(over)
    return rec


def _write(tmp_path, doc, name="recs.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_bundled_corpus_parses_clean(bundled_records):
    labels = [r.label for r in bundled_records]
    assert labels == [
        "19.a3", "50.b3", "960.a5", "189.b2", "196.a1", "5184.j1",
        "full2torsion", "x60d.t1", "x60twist.5", "x27h.t3",
        "37.a1", "toy.196style", "toy.19a3style",
    ]


def test_bundled_roundtrip_byte_identical():
    path = rmod.bundled_fixture_path()
    recs, issues = rmod.parse_records(path)
    assert not issues
    assert rmod.serialize_records(recs) == path.read_text()


def test_empty_records_file(tmp_path):
    recs, issues = rmod.parse_records(_write(tmp_path, _doc()))
    assert recs == [] and issues == []


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(rmod.RecordFormatError):
        rmod.parse_records(path)


def test_wrong_schema_version(tmp_path):
    with pytest.raises(rmod.RecordFormatError):
        rmod.parse_records(_write(tmp_path, {"schema_version": 99, "records": []}))


def test_missing_fields(tmp_path):
    with pytest.raises(rmod.RecordFormatError):
        rmod.parse_records(_write(tmp_path, _doc({"label": "x"})))


def test_cm_record_rejected(tmp_path):
    recs, issues = rmod.parse_records(_write(tmp_path, _doc(_base(cm=True))))
    assert not recs
    assert [i.clause for i in issues] == ["non-cm-required"]


def test_discriminant_mismatch_rejected(tmp_path):
    recs, issues = rmod.parse_records(_write(tmp_path, _doc(_base(discriminant=1))))
    assert not recs
    assert issues[0].clause == "discriminant-consistency"


def test_non_unit_generator_rejected(tmp_path):
    rec = _base(adelic_level=4, image_generators=[[2, 0, 0, 1]])
    recs, issues = rmod.parse_records(_write(tmp_path, _doc(rec)))
    assert not recs
    assert any(i.clause == "unit-determinant-generators" for i in issues)


def test_det_surjectivity_enforced_for_galois_images(tmp_path):
    # mod-5 image generated by a determinant-1 matrix: not a Galois image
    rec = _base(adelic_level=5, image_generators=[[1, 1, 0, 1]])
    recs, issues = rmod.parse_records(_write(tmp_path, _doc(rec)))
    assert not recs
    assert any(i.clause == "determinant-surjectivity" for i in issues)
    # the same group is fine as an abstract study
    rec2 = _base(adelic_level=5, image_generators=[[1, 1, 0, 1]], galois_image=False)
    recs2, issues2 = rmod.parse_records(_write(tmp_path, _doc(rec2), "b.json"))
    assert [r.label for r in recs2] == ["t"] and not issues2


def test_serre_constant_divides_level(tmp_path):
    rec = _base(conductor=37, a_serre=3, adelic_level=4, image_generators=[[1, 1, 0, 3]])
    recs, issues = rmod.parse_records(_write(tmp_path, _doc(rec)))
    assert any(i.clause == "serre-constant-divides-level" for i in issues)


def test_level_primes_divide_2na(tmp_path):
    # declared level has a prime 5 not dividing 2 * N * A(E)
    rec = _base(conductor=3, a_serre=1, adelic_level=10,
                image_generators=[[1, 1, 0, 1], [1, 0, 1, 1], [3, 0, 0, 1]])
    recs, issues = rmod.parse_records(_write(tmp_path, _doc(rec)))
    assert any(i.clause == "level-primes-divide-2na" == i.clause.lower() or
               i.clause == "level-primes-divide-2NA" for i in issues)


def test_image_requires_level(tmp_path):
    rec = _base(image_generators=[[1, 0, 0, 1]])
    recs, issues = rmod.parse_records(_write(tmp_path, _doc(rec)))
    assert any(i.clause == "image-requires-level" for i in issues)


def test_duplicate_labels(tmp_path):
    recs, issues = rmod.parse_records(_write(tmp_path, _doc(_base(), _base())))
    assert len(recs) == 1
    assert any(i.clause == "unique-labels" for i in issues)


def test_closure_and_flags(bundled_records):
    rec = rmod.load_bundled("x60d.t1")
    assert rec.has_level_scoped_image()
    H = rec.closure()
    assert H.order == 2 and H.modulus == 4
    assert rec.closure() is H  # cached
    plain = rmod.load_bundled("19.a3")
    assert not plain.has_level_scoped_image()
    with pytest.raises(ValueError):
        plain.closure()


def test_assumptions_echoed(bundled_records):
    rec = rmod.load_bundled("x60d.t1")
    msgs = rec.assumptions()
    assert any("adelic level divides 4" in m for m in msgs)


def test_validation_issue_str():
    issue = rmod.ValidationIssue("x", "clause-name", "boom")
    assert "x" in str(issue) and "clause-name" in str(issue)
