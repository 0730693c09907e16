import numpy as np
import pytest

from proxevo.coupling import (CubicCoupling, LinearCoupling, NemytskiiCoupling,
                              CustomCoupling, GlobalLipschitz, LocalLipschitz,
                              ZeroCoupling, lipschitz_budget, make_coupling)
from proxevo.errors import ModulusUnavailable
from proxevo.resolvent import TimeGrid

RNG = np.random.default_rng(7)


def test_eval_examples():
    np.testing.assert_allclose(ZeroCoupling().eval(0.3, np.array([1.0, 2.0])), 0.0)
    lin = LinearCoupling(2.0 * np.eye(2))
    np.testing.assert_allclose(lin.eval(0.0, np.array([1.0, -1.0])), [2.0, -2.0])
    cub = CubicCoupling(sign=-1, coeff=1.0)
    np.testing.assert_allclose(cub.eval(0.0, np.array([3.0])), [-27.0])


def test_budget_constant_modulus():
    c = CustomCoupling(lambda t, u: u, GlobalLipschitz(lambda t: 1.0))
    assert lipschitz_budget(c, TimeGrid(1.0, 100)) == pytest.approx(1.0)


def test_budget_linear_in_time_modulus():
    c = CustomCoupling(lambda t, u: u, GlobalLipschitz(lambda t: 2.0 * t))
    assert lipschitz_budget(c, TimeGrid(1.0, 1000)) == pytest.approx(1.0, abs=1e-5)


def test_budget_local_modulus():
    c = CustomCoupling(lambda t, u: u ** 3,
                       LocalLipschitz(lambda R, t: 3.0 * R ** 2))
    assert lipschitz_budget(c, TimeGrid(0.5, 200), radius=2.0) == pytest.approx(6.0)
    with pytest.raises(ModulusUnavailable):
        lipschitz_budget(c, TimeGrid(0.5, 200))


def test_linear_alpha_matches_power_iteration():
    K = RNG.normal(size=(4, 4))
    lin = LinearCoupling(K)
    # power iteration on K^T K
    v = RNG.normal(size=4)
    for _ in range(500):
        v = K.T @ (K @ v)
        v /= np.linalg.norm(v)
    sigma = np.linalg.norm(K @ v)
    assert lin.modulus_at(0.0) == pytest.approx(sigma, abs=1e-6)


def test_cubic_local_modulus_dominates_difference_quotients():
    cub = CubicCoupling(sign=1, coeff=2.0)
    R = 1.5
    mod = cub.modulus_at(0.0, radius=R)
    assert mod == pytest.approx(3.0 * R ** 2 * 2.0)
    for _ in range(200):
        u = RNG.uniform(-R, R, size=1)
        v = RNG.uniform(-R, R, size=1)
        if np.allclose(u, v):
            continue
        quot = np.linalg.norm(cub.eval(0.0, u) - cub.eval(0.0, v)) \
            / np.linalg.norm(u - v)
        assert quot <= mod + 1e-9


def test_global_lipschitz_spot_check():
    lin = LinearCoupling(np.array([[1.0, 0.5], [0.0, 2.0]]))
    a = lin.modulus_at(0.1)
    for _ in range(100):
        u = RNG.uniform(-3, 3, size=2)
        v = RNG.uniform(-3, 3, size=2)
        assert np.linalg.norm(lin.eval(0.1, u) - lin.eval(0.1, v)) \
            <= a * np.linalg.norm(u - v) + 1e-12


def test_nemytskii_componentwise():
    nem = NemytskiiCoupling(lambda t, x, u: t + x * u, c_b=2.0,
                            sites=np.array([1.0, 2.0]))
    np.testing.assert_allclose(nem.eval(0.5, np.array([1.0, 1.0])), [1.5, 2.5])
    assert nem.zero_bound(0.5) == pytest.approx(np.sqrt(2 * 0.25))


def test_zero_bound():
    assert ZeroCoupling().zero_bound(0.2) == 0.0
    assert LinearCoupling(np.eye(2)).zero_bound(0.2) == 0.0


def test_factory():
    assert make_coupling("zero").kind == "zero"
    assert make_coupling("cubic", sign=1, coeff=0.5).coeff == 0.5
    with pytest.raises(ValueError):
        make_coupling("unknown")
