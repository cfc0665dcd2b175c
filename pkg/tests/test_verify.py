import json

import pytest

from qchar import verify


@pytest.fixture(scope="module")
def full_report():
    return verify.run("all")


def test_default_grid_passes(full_report):
    assert full_report.passed, [c.name for c in full_report.failures()]
    prefixes = {c.name.split("[")[0] for c in full_report.checks}
    assert {"link_stochasticity", "classical_branching", "coherence", "toeplitz_nonnegativity",
            "bessel_consistency", "generator_validity", "zero_generator", "intertwining",
            "monte_carlo_goodness_of_fit"} <= prefixes


def test_report_json_shape(full_report):
    data = json.loads(json.dumps(full_report.to_json()))
    assert data["passed"] is True
    for c in data["checks"]:
        assert set(c) == {"name", "status", "metric", "bound", "detail"}
        assert c["status"] in ("pass", "fail")


def test_report_is_deterministic():
    a = verify.run("links").to_json()
    b = verify.run("links").to_json()
    assert a == b


def test_overall_status_is_conjunction():
    rep = verify.VerifyReport()
    rep.add("a", True)
    assert rep.passed
    rep.add("b", False, metric=1.0, bound=0.5)
    assert not rep.passed
    assert [c.name for c in rep.failures()] == ["b"]


def test_fault_injection_is_detected_and_scoped():
    bad = verify.run("characters", fault="coefficient")
    assert not bad.passed
    assert all("C" in c.name for c in bad.failures())
    assert verify.run("characters").passed
    with pytest.raises(ValueError):
        verify.run("characters", fault="bitflip")
    with pytest.raises(ValueError):
        verify.run("nonsense")
