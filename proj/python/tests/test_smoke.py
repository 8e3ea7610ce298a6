import json

import pytest

import flatstruct as fs

KLEIN = {
    "name": "LT8",
    "weights": ["2/7", "3/7", "1"],
    "g": [
        "(-2*t1^3*t2 + t2^3 + 12*t1*t3)/12",
        "(2*t1^5 + 5*t1^2*t2^2 + 10*t2*t3)/10",
        "(-8*t1^7 + 21*t1^4*t2^2 + 7*t1*t2^4 + 28*t3^2)/56",
    ],
}


def test_catalog_ids():
    ids = fs.catalog_ids()
    assert len(ids) == 11
    assert ids[0] == "H3" and "LT30" in ids


def test_catalog_entry():
    e = fs.catalog_get("LT8")
    assert e["pvf"]["weights"] == ["2/7", "3/7", "1"]
    assert fs.catalog_get("H3p")["pvf"]["extension"]["relation"] == "t2 + t1*z + z^4"


def test_unknown_id():
    with pytest.raises(fs.FlatstructError, match="UnknownId"):
        fs.catalog_get("LT99")


def test_wdvv():
    assert fs.check_wdvv(json.dumps(KLEIN)).passed()
    bad = dict(KLEIN, g=KLEIN["g"][:2] + [KLEIN["g"][2] + " + t1^7"])
    rep = fs.check_wdvv(json.dumps(bad))
    assert not rep.passed()
    assert rep.failing_commutators == [(1, 2)]


def test_normalize():
    assert fs.normalize_expr("t1*(t2 + 1) - t1", ["1/3", "2/3", "1"]) == "t1*t2"
    with pytest.raises(fs.FlatstructError):
        fs.normalize_expr("t1 +", ["1/3", "2/3", "1"])


def test_verify_symbolic():
    rep = fs.verify("H3")
    assert rep["passed"]
    assert rep["tolerances"]["residual"] == 1e-6


def test_p6():
    run = fs.extract_p6("LT8", (1, 2))
    assert len(run["t"]) == 20
    assert run["max_residual"] < 1e-6


def test_jm_round_trip():
    r = fs.jm_round_trip(3)
    assert r["passed"]
    assert abs(sum(r["theta"]) + sum(r["kappa"])) < 1e-12
