import math

import numpy as np
import pytest

import pgl


@pytest.fixture(scope="module")
def p3():
    return pgl.solve(3.0)


def test_profile_arrays(p3):
    assert p3.r[0] == 0.0 and p3.f[0] == 0.0
    assert len(p3.r) == len(p3.f) == 2001
    assert np.all(np.diff(p3.f) > 0)
    assert np.allclose(p3.tail, 1.0 - p3.f, atol=1e-15)
    assert p3.f_prime_at_zero > 0
    assert p3.solver == "shooting"


def test_audit_passes(p3):
    checks = pgl.audit(p3)
    assert len(checks) == 8
    assert all(c["pass"] for c in checks.values())


def test_solvers_agree():
    a = pgl.solve(4.0, solver="shooting")
    b = pgl.solve(4.0, solver="variational")
    assert pgl.sup_distance(a, b) <= 1e-6


def test_energy_pohozaev(p3):
    e = pgl.energy(p3)
    assert e["total"] == pytest.approx(e["kinetic"] + e["potential"], rel=1e-14)
    assert abs(e["kinetic"] - 2.0 / 3.0 * e["total"]) <= 1e-4


def test_tail_constants(p3):
    t = pgl.tail_constants(p3)
    assert t["potential"] == pytest.approx(1.5, rel=0.02)
    assert t["derivative"] == pytest.approx(2.25, rel=0.05)


def test_large_p_near_limit():
    s = pgl.solve(100.0)
    e = pgl.energy(s)
    assert 1 / 6 - 1e-6 <= e["total"] <= 1 / 6 + 5 * math.log(100) / 100
    assert pgl.distance_to_limit(s) <= 3 * math.sqrt(math.log(100) / 100)


def test_stability_p3(p3):
    s = pgl.stability_survey(p3)
    assert s["stable"]
    assert s["negative_count"] == 0
    assert s["kernel_dimension"] == 3
    assert s["min_kernel_overlap"] > 0.999
    assert pgl.coefficient_signs(p3)["certified_range"]


def test_invalid_p():
    with pytest.raises(pgl.InvalidArgument, match="p must exceed 2"):
        pgl.solve(1.5)
    with pytest.raises(pgl.Error):
        pgl.solve(3.0, solver="newton")
