import math

import numpy as np
import pytest

import iadmm


def test_soft_threshold_and_group_shrink():
    np.testing.assert_allclose(iadmm.soft_threshold(np.array([2.0, -0.5]), 1.0), [1.0, 0.0])
    np.testing.assert_allclose(iadmm.group_shrink(np.array([3.0, 4.0]), 2.5), [1.5, 2.0])
    with pytest.raises(ValueError):
        iadmm.soft_threshold(np.ones(2), 0.0)


def test_load_and_reference():
    p = iadmm.load("qp-3-m3")
    assert p.num_blocks == 3
    assert p.dims == [5, 5, 5]
    assert "convex" in p.tags
    assert p.kkt_error(p.x_star, p.lambda_star) <= 1e-9
    assert p.fingerprint() == iadmm.load("qp-3-m3").fingerprint()
    assert iadmm.load("img-0-s16").x_star is None


def test_solve_reaches_reference():
    p = iadmm.load("qp-7-m3")
    r = iadmm.solve(p, tol=1e-9)
    assert r["converged"]
    assert np.linalg.norm(r["x"] - p.x_star) <= 1e-6
    E = np.array(r["history"]["E"])
    assert np.all(np.diff(E) <= 1e-8 * (1.0 + E[:-1]))


def test_strong_mode_and_exact_mode_agree():
    p = iadmm.load("qp-1-m3-mu0.5")
    a = iadmm.solve(p, mode="strong", tol=1e-10)
    b = iadmm.solve(p, mode="exact", tol=1e-10)
    assert a["converged"] and b["converged"]
    assert np.linalg.norm(a["x"] - b["x"]) <= 1e-6
    rho = a["history"]["rho"]
    assert all(y > x for x, y in zip(rho, rho[1:]))


def test_iteration_cap_and_errors():
    p = iadmm.load("qp-0-m3")
    r = iadmm.solve(p, max_outer=1)
    assert r["cause"] == "max-iterations"
    assert r["iterations"] == 1
    with pytest.raises(ValueError):
        iadmm.solve(p, alpha=1.5)
    with pytest.raises(ValueError):
        iadmm.load("nope")


def test_verify_suite():
    assert "operators" in iadmm.suite_names()
    r = iadmm.verify("fixed-point")
    assert r["passed"]
    assert r["checks"] > 0 and r["failures"] == 0
    assert not math.isnan(r["seconds"])
