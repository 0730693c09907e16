import math

import numpy as np
import pytest

from proxevo.analysis import brute_force_prox_1d
from proxevo.potentials import (AbsValue, PowerPlusAbs, Quadratic,
                                Radial1DTable, Separable, XLogX, ZeroPotential,
                                catalog, make_potential)

RNG = np.random.default_rng(42)


def test_value_examples():
    assert XLogX().value(0.0) == 0.0
    assert XLogX().value(1.0) == pytest.approx(math.log(2.0), abs=1e-12)
    assert PowerPlusAbs(p=2).value(3.0) == pytest.approx(7.5, abs=1e-12)


def test_subdiff_examples():
    assert AbsValue().subdiff(0.0) == pytest.approx(0.0)
    assert XLogX().subdiff(1.0) == pytest.approx(math.log(2.0) + 0.5, abs=1e-12)
    assert Quadratic(scale=1.0).subdiff(4.0) == pytest.approx(4.0)


def test_prox_examples():
    res = AbsValue().prox(1.0, 3.0, tol=1e-10)
    assert res.point == pytest.approx(2.0, abs=1e-9)
    assert res.residual <= 1e-10 * 4.0
    assert Quadratic(1.0).prox(1.0, 4.0).point == pytest.approx(2.0, abs=1e-10)
    ref = brute_force_prox_1d(XLogX(), 1.0, 2.0)
    assert XLogX().prox(1.0, 2.0).point == pytest.approx(ref, abs=1e-7)


def test_prox_of_zero_is_exactly_zero():
    for pot in catalog().values():
        assert np.all(pot.prox(0.7, 0.0).point == 0.0)


def test_prox_threshold_is_exactly_zero():
    # inside |z| <= lam * slope(0) the origin absorbs the point
    pot = AbsValue()
    assert np.all(pot.prox(0.5, 0.49).point == 0.0)
    assert np.all(pot.prox(0.5, np.array([0.2, 0.3])).point == 0.0)


def test_moreau_examples():
    assert Quadratic(1.0).moreau_envelope(1.0, 4.0) == pytest.approx(4.0, abs=1e-9)
    assert AbsValue().moreau_envelope(1.0, 3.0) == pytest.approx(2.5, abs=1e-9)
    for pot in catalog().values():
        assert pot.moreau_envelope(0.3, 0.0) == 0.0


def test_moreau_is_a_lower_bound():
    for pot in catalog().values():
        for _ in range(20):
            lam = RNG.uniform(0.05, 5.0)
            z = RNG.uniform(-10, 10, size=2)
            env = pot.moreau_envelope(lam, z)
            assert env <= pot.value(z) + 1e-9
            m = RNG.uniform(-10, 10, size=2)
            assert env <= pot.value(m) + np.sum((m - z) ** 2) / (2 * lam) + 1e-9


def test_catalog_invariants_at_origin():
    for pot in catalog().values():
        assert pot.value(np.zeros(3)) == 0.0
        sub0 = pot.subdiff(np.zeros(3))
        assert np.all(np.isfinite(sub0))
        # 0 is a global minimizer
        for _ in range(20):
            assert pot.value(RNG.uniform(-5, 5, size=3)) >= 0.0


def test_convexity_spot_check():
    for pot in catalog().values():
        for _ in range(50):
            x = RNG.uniform(-8, 8, size=2)
            y = RNG.uniform(-8, 8, size=2)
            th = RNG.uniform(0, 1)
            lhs = pot.value(th * x + (1 - th) * y)
            rhs = th * pot.value(x) + (1 - th) * pot.value(y)
            assert lhs <= rhs + 1e-12 * (1 + abs(rhs))


def test_firm_nonexpansiveness():
    for pot in catalog().values():
        for _ in range(30):
            lam = RNG.uniform(0.05, 5.0)
            z1 = RNG.uniform(-10, 10, size=2)
            z2 = RNG.uniform(-10, 10, size=2)
            p1 = pot.prox(lam, z1).point
            p2 = pot.prox(lam, z2).point
            gap = p1 - p2
            assert np.sum(gap ** 2) <= np.dot(gap, z1 - z2) + 1e-9


def test_resolvent_subgradient_inequality():
    # s = (z - prox) / lam must support the potential from below at the prox
    for pot in catalog().values():
        lam = 0.8
        z = np.array([3.0, -1.5])
        x = pot.prox(lam, z).point
        s = (z - x) / lam
        for _ in range(100):
            y = RNG.uniform(-6, 6, size=2)
            assert pot.value(y) >= pot.value(x) + np.dot(s, y - x) - 1e-9


def test_subdiff_monotone():
    for pot in catalog().values():
        for _ in range(50):
            x = RNG.uniform(-8, 8, size=2)
            y = RNG.uniform(-8, 8, size=2)
            gap = pot.subdiff(x) - pot.subdiff(y)
            assert np.dot(gap, x - y) >= -1e-12


def test_prox_collinear_with_input():
    for pot in catalog().values():
        z = np.array([3.0, -4.0])
        p = pot.prox(0.9, z).point
        cross = p[0] * z[1] - p[1] * z[0]
        assert abs(cross) <= 1e-9 * np.linalg.norm(z)


def test_separable_blocks():
    pot = Separable([(AbsValue(), np.array([0, 1])), (Quadratic(1.0), np.array([2]))])
    x = np.array([3.0, 0.0, 4.0])
    assert pot.value(x) == pytest.approx(3.0 + 8.0)
    res = pot.prox(1.0, x)
    np.testing.assert_allclose(res.point, [2.0, 0.0, 2.0], atol=1e-9)
    np.testing.assert_allclose(pot.subdiff(x), [1.0, 0.0, 4.0], atol=1e-12)


def test_radial_custom_table():
    pot = Radial1DTable(value_fn=lambda r: np.asarray(r, float) ** 4 / 4,
                        slope_fn=lambda r: np.asarray(r, float) ** 3)
    # no curvature oracle: pure bisection path
    x = float(pot.prox(1.0, 2.0, tol=1e-12).point[0])
    assert x + x ** 3 == pytest.approx(2.0, abs=1e-9)


def test_factory():
    assert isinstance(make_potential("zero"), ZeroPotential)
    assert make_potential("power_plus_abs", p=1.5).p == 1.5
    with pytest.raises(ValueError):
        make_potential("nope")
    with pytest.raises(ValueError):
        make_potential("power_plus_abs", p=0.5)
