"""Smoke test for the charclass_py extension module."""

import cmath
import json
import math

import charclass_py as cc


def main():
    # p = 1 regulator on scalars is log|g|.
    g = 3.0 * cmath.exp(0.7j)
    v = cc.cs_cocycle(1, 1, [1.0, g])
    assert abs(v.reduced - math.log(3.0)) < 1e-8, v
    b = cc.borel_cocycle(1, 1, [1.0, g])
    assert b.raw == 2 * v.raw

    a = [[1.0, 0.5j], [0.2, 2.0]]
    h = [[0.3 + 1j, 1.0], [0.0, 1.5]]
    e = [[1.0, 0.0], [0.0, 1.0]]
    assert cc.cocycle_residual(2, 1, [e, a, h]) < 5e-5

    # det(tI - A) = t^2 - tr(A) t + det(A)
    assert abs(cc.chern_poly(1, a) + 3.0) < 1e-12
    assert abs(cc.chern_poly(2, a) - (2.0 - 0.1j)) < 1e-12

    t = json.loads(cc.transgress(2, 1))
    assert t["residual_zero"] and t["closed_basic_dimension"] == 0

    f = cc.LogMeroForm("dz/w^2", ["z", "w"])
    assert (f.q_level(), f.f_level(), f.is_log()) == (1, -1, False)
    assert f.restrict_diagonal("z", "w", "z").q_level() == 0
    assert cc.LogMeroForm("dz/z", ["z"]).classify() == "dz/z ∈ Q^1 \\ Q^2, F-level 1, log: yes"
    try:
        cc.LogMeroForm("dz +", ["z"])
    except cc.CharclassError as err:
        assert "syntax" in str(err)
    else:
        raise AssertionError("expected a syntax error")

    report = json.loads(cc.verify("filtration", 7))
    assert report["passed"]
    print("smoke test passed")


if __name__ == "__main__":
    main()
