import json
from pathlib import Path

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from avgord.basepairs import base_pair_from_files
from avgord.certify import (
    CERT_VERSION,
    Certificate,
    CertificateParseError,
    Trace,
    parse,
    serialize,
    verify,
)
from avgord.density import construct_ge1, construct_le1_abelian, construct_sub_unit_nilpotent
from avgord.groups import Named, parse_group

DATA = Path(__file__).parent / "data"


def edited(cert, **fields):
    doc = json.loads(serialize(cert))
    for key, value in fields.items():
        if key.startswith("trace."):
            doc["trace"][key[6:]] = value
        else:
            doc[key] = value
    return parse(json.dumps(doc))


def statuses(verdict):
    return {c.name: c.status for c in verdict.checks}


def test_round_trip_seven_sixths():
    cert = construct_ge1(mpq(7, 6), mpq(1, 1000))
    data = serialize(cert)
    assert parse(data) == cert
    assert serialize(parse(data)) == data
    v = verify(parse(data))
    assert v.ok and v.status == "ok"
    assert v.recomputed_ratio == mpq(7, 6)


def test_serialization_is_canonical():
    cert = construct_ge1(3, mpq(1, 10**4))
    data = serialize(cert)
    assert data.endswith(b"\n")
    doc = json.loads(data)
    assert doc["version"] == CERT_VERSION
    assert list(doc) == sorted(doc)
    assert doc["claimed_ratio"] == f"{cert.claimed_ratio.numerator}/{cert.claimed_ratio.denominator}"
    assert serialize(construct_ge1(3, mpq(1, 10**4))) == data


def test_tampered_ratio_fails():
    cert = construct_ge1(mpq(7, 6), mpq(1, 1000))
    bad = edited(cert, claimed_ratio="7/5")
    v = verify(bad)
    assert not v.ok and v.status == "fail"
    assert statuses(v)["exact_ratio"] == "fail"
    assert v.recomputed_ratio == mpq(7, 6)


def test_tampered_target_fails_tolerance():
    cert = construct_ge1(2, mpq(1, 1000))
    v = verify(edited(cert, target="21/10"))
    assert statuses(v)["tolerance"] == "fail"
    assert statuses(v)["exact_ratio"] == "pass"


def test_tampered_groups_fail():
    cert = construct_ge1(mpq(7, 6), mpq(1, 1000))
    # C(4) does not embed in C(2)^2 even though the ratio is recomputed honestly
    v = verify(edited(cert, h="C(4)", claimed_ratio="7/11"))
    assert statuses(v)["subgroup_witness"] == "fail"
    v = verify(edited(cert, g="C(3)^2", h="C(3)", claimed_ratio="25/21"))
    assert statuses(v)["trace"] == "fail"
    v = verify(edited(cert, g="D4", h="C(4)", claimed_ratio="19/22", target="19/22"))
    assert statuses(v)["abelian"] == "fail"


def test_tampered_trace_fails():
    cert = construct_ge1(2, mpq(1, 1000))
    assert statuses(verify(edited(cert, **{"trace.prime_indices": [2, 1, 3, 4, 5, 11]})))["trace"] == "fail"
    assert statuses(verify(edited(cert, **{"trace.m": 1})))["trace"] == "fail"
    assert statuses(verify(edited(cert, **{"trace.excluded_indices": [11]})))["trace"] == "fail"


def test_unknown_version_and_mode():
    cert = construct_ge1(mpq(7, 6), mpq(1, 1000))
    assert statuses(verify(edited(cert, version="avgord-cert/99")))["version"] == "fail"
    v = verify(edited(cert, mode="magic"))
    assert v.status == "fail" and statuses(v)["mode"] == "fail"


def test_d4_over_c4_oracle_path():
    for h in ("C(4)", "C4"):
        cert = Certificate("sub_unit_nilpotent", mpq(19, 22), mpq(1, 10), Named("D4"), parse_group(h),
                           mpq(19, 22), Trace(2, (1,), (), "D4C4"))
        assert verify(cert).ok, h


def test_wrong_witness_fails():
    cert = Certificate("sub_unit_nilpotent", mpq(19, 20), mpq(1, 10), Named("D4"), Named("Q8"),
                       mpq(19, 20), Trace(2, (1,), (), "D4C4"))
    assert statuses(verify(cert))["subgroup_witness"] == "fail"


def test_perm_base_pair_certificate():
    base = base_pair_from_files(str(DATA / "D4xC3.perm"), str(DATA / "C4xC3.perm"))
    assert base.rho0 == mpq(19, 22)
    cert = construct_sub_unit_nilpotent(mpq(9, 10), mpq(1, 10**4), base)
    assert 1 in cert.trace.excluded and 2 in cert.trace.excluded
    v = verify(parse(serialize(cert)))
    assert v.ok, v.failed()
    v = verify(parse(serialize(cert)), cap=10)
    assert v.status == "unverifiable"


def test_non_nilpotent_base_rejected():
    with pytest.raises(ValueError):
        base_pair_from_files(str(DATA / "S4.perm"), str(DATA / "C4.perm")).validate()


def test_parse_errors_name_the_field():
    cert = construct_ge1(mpq(7, 6), mpq(1, 1000))
    with pytest.raises(CertificateParseError) as err:
        edited(cert, g="C(6)^2")
    assert err.value.field == "g"
    with pytest.raises(CertificateParseError) as err:
        edited(cert, target="seven")
    assert err.value.field == "target"
    with pytest.raises(CertificateParseError) as err:
        parse(b'{"mode": "ge1",')
    assert "line 1" in str(err.value)
    doc = json.loads(serialize(cert))
    del doc["eps"]
    with pytest.raises(CertificateParseError, match="eps"):
        parse(json.dumps(doc))


def test_rational_field():
    cert = construct_ge1(mpq(7, 6), mpq(1, 1000))
    assert edited(cert, target="19/22").target == mpq(19, 22)


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=0, max_value=1, max_denominator=200).filter(lambda f: f > 0.2))
def test_le1_round_trip(a):
    cert = construct_le1_abelian(mpq(a.numerator, a.denominator), mpq(1, 10**5))
    again = parse(serialize(cert))
    assert again == cert
    assert verify(again).ok
