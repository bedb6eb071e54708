import math

import numpy as np
import pytest

from ruelle_workbench.laurent import (
    LaurentPoly,
    autocorrelation,
    circle_grid,
    compose_power,
    conj_reflect,
    downsample_average,
    evaluate,
    evaluate_at,
    haar_integral,
    is_hermitian,
    is_real_nonneg,
    linear_combination,
    mul,
    root_of_unity_power,
    rotate,
    sample,
)
from ruelle_workbench.rng import make_rng


def test_trims_leading_and_trailing_zeros() -> None:
    f = LaurentPoly(-1, [0.0, 0.0, 2.0, 1e-16])
    assert f.lo == 1
    assert f.hi == 1
    assert f.coefficient(1) == 2.0


def test_zero_is_canonical() -> None:
    zero = LaurentPoly(5, [0.0, 0.0])
    assert zero.is_zero()
    assert zero == LaurentPoly.zero()
    assert zero.lo == 0


@pytest.mark.parametrize("coeffs", [[], [math.nan], [1.0, math.inf]])
def test_rejects_bad_coefficients(coeffs: list) -> None:
    with pytest.raises(ValueError):
        LaurentPoly(0, coeffs)


def test_arithmetic() -> None:
    one_plus_z = LaurentPoly(0, [1.0, 1.0])
    one_minus_z = LaurentPoly(0, [1.0, -1.0])
    assert one_plus_z * one_minus_z == LaurentPoly.from_dict({0: 1.0, 2: -1.0})
    assert (one_plus_z - one_plus_z).is_zero()
    assert (one_plus_z + one_minus_z) == LaurentPoly.constant(2.0)
    assert (2 * one_plus_z).coefficient(1) == 2.0


def test_window() -> None:
    f = LaurentPoly(-1, [1.0, 2.0, 3.0])
    assert np.array_equal(f.window(2), np.array([0, 1, 2, 3, 0], dtype=complex))
    assert LaurentPoly.from_window(f.window(2), 2) == f
    with pytest.raises(ValueError):
        f.window(0)


def test_conj_reflect() -> None:
    f = LaurentPoly(1, [1j, 2.0])
    reflected = conj_reflect(f)
    assert reflected.lo == -2
    assert reflected.coefficient(-1) == -1j
    assert reflected.coefficient(-2) == 2.0


def test_haar_autocorrelation() -> None:
    m0 = LaurentPoly(0, [1 / math.sqrt(2), 1 / math.sqrt(2)])
    c = autocorrelation(m0)
    assert c.allclose(LaurentPoly(-1, [0.5, 1.0, 0.5]))


def test_compose_and_downsample() -> None:
    f = LaurentPoly(-2, [1.0, 2.0, 3.0, 4.0, 5.0])
    assert downsample_average(f, 2) == LaurentPoly(-1, [1.0, 3.0, 5.0])
    assert compose_power(LaurentPoly(0, [1.0, 1.0]), 3) == LaurentPoly.from_dict({0: 1.0, 3: 1.0})
    assert downsample_average(compose_power(f, 3), 3) == f
    assert downsample_average(LaurentPoly.monomial(1), 2).is_zero()


def test_rotate() -> None:
    assert rotate(LaurentPoly.monomial(1), 1, 2) == LaurentPoly.monomial(1, -1.0)
    assert root_of_unity_power(1, 4) == 1j
    assert root_of_unity_power(6, 4) == -1.0


def test_evaluate_uses_negative_angle() -> None:
    z = LaurentPoly.monomial(1)
    assert abs(evaluate(z, math.pi / 2) - (-1j)) < 1e-15
    values = evaluate(z, circle_grid(4))
    assert np.allclose(values, [1, -1j, -1, 1j])
    assert abs(evaluate_at(LaurentPoly(-1, [1.0, 0.0, 1.0]), 2.0) - 2.5) < 1e-15


def test_haar_integral_and_predicates(density: LaurentPoly) -> None:
    assert abs(haar_integral(density) - 1 / 3) < 1e-15
    assert is_hermitian(density)
    assert is_real_nonneg(density)
    assert not is_hermitian(LaurentPoly.monomial(1))
    assert not is_real_nonneg(LaurentPoly(-1, [1.0, 0.0, 1.0]))


def test_linear_combination() -> None:
    total = linear_combination([(2.0, LaurentPoly.monomial(0)), (1j, LaurentPoly.monomial(3))])
    assert total == LaurentPoly.from_dict({0: 2.0, 3: 1j})


def random_poly(rng: np.random.Generator, lo: int, length: int) -> LaurentPoly:
    return LaurentPoly(lo, rng.standard_normal(length) + 1j * rng.standard_normal(length))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_product_matches_pointwise_values(seed: int) -> None:
    rng = make_rng(seed)
    f = random_poly(rng, -3, 6)
    g = random_poly(rng, -1, 5)
    omega = rng.uniform(0.0, 2 * math.pi, size=64)
    assert np.allclose(evaluate(mul(f, g), omega), evaluate(f, omega) * evaluate(g, omega), atol=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_autocorrelation_is_nonnegative(seed: int) -> None:
    m = random_poly(make_rng(seed), -2, 7)
    values = sample(autocorrelation(m), 512)
    assert np.max(np.abs(values.imag)) < 1e-12
    assert np.min(values.real) >= -1e-12


@pytest.mark.parametrize("p", [1, 2, 3, 5, 8])
def test_full_turn_rotation_is_identity(p: int) -> None:
    f = random_poly(make_rng(p), -4, 9)
    assert rotate(f, p, p) == f
    assert rotate(f, -2 * p, p) == f
