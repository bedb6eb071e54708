import math

import numpy as np
import pytest

from ruelle_workbench.enums import Normalization
from ruelle_workbench.exceptions import ContractViolation, NotHarmonicError
from ruelle_workbench.filters import daubechies4, example31, h_phi, h_phi_reflected, haar, stretched_haar, trivial
from ruelle_workbench.laurent import (
    FilterSpec,
    LaurentPoly,
    circle_grid,
    conj_reflect,
    evaluate,
    is_real_nonneg,
    sample,
)
from ruelle_workbench.rng import make_rng
from ruelle_workbench.transfer import (
    apply_ruelle,
    apply_ruelle_pointwise,
    apply_ruelle_power,
    build_transfer_matrix,
    check_lowpass,
    check_quadrature,
    cocycle_harmonic_residual,
    cocycle_pair_residual,
    cocycle_transform,
    conditional_expectation,
    cuntz_filters,
    cuntz_s,
    cuntz_s_adjoint,
    fejer_spike,
    filter_power,
    fixed_space,
    harmonic_density,
    isometry_defect,
    l1_norm_bound_witness,
    moment,
    span_residual,
    weighted_adjoint_power_decay,
    zero_set_fraction,
)

SQRT2 = math.sqrt(2.0)


@pytest.mark.parametrize("name,filter", [("haar", haar()), ("example31", example31()), ("db4", daubechies4())])
def test_quadrature_lowpass_filters(name: str, filter: FilterSpec) -> None:
    assert check_quadrature(filter), name
    assert check_lowpass(filter), name
    assert filter.quadrature and filter.lowpass


def test_predicates_are_independent() -> None:
    not_lowpass = trivial()
    assert check_quadrature(not_lowpass)
    assert not check_lowpass(not_lowpass)

    not_quadrature = FilterSpec(scale=2, m0=LaurentPoly.constant(SQRT2))
    assert not check_quadrature(not_quadrature)
    assert check_lowpass(not_quadrature)


def test_haar_transfer_matrix(haar_filter: FilterSpec) -> None:
    matrix = build_transfer_matrix(haar_filter)
    assert matrix.window == 1
    expected = np.array([[0.5, 0.0, 0.0], [0.5, 1.0, 0.5], [0.0, 0.0, 0.5]])
    assert np.allclose(matrix.entries, expected)
    with pytest.raises(ValueError):
        matrix.restrict(2)


def test_matrix_agrees_with_coefficient_form(example_filter: FilterSpec) -> None:
    matrix = build_transfer_matrix(example_filter)
    rng = np.random.default_rng(7)
    size = 2 * matrix.window + 1
    f = LaurentPoly(-matrix.window, rng.standard_normal(size) + 1j * rng.standard_normal(size))
    assert matrix.apply(f).allclose(apply_ruelle(example_filter, f), atol=1e-12)
    pointwise = apply_ruelle_pointwise(example_filter, f, circle_grid(32))
    assert np.allclose(sample(apply_ruelle(example_filter, f), 32), pointwise)


@pytest.mark.parametrize("scale", [2, 3])
def test_matrix_agrees_with_pointwise_form_for_eight_taps(scale: int) -> None:
    rng = make_rng(scale)
    filter = FilterSpec(scale=scale, m0=LaurentPoly(0, rng.standard_normal(8) + 1j * rng.standard_normal(8)))
    matrix = build_transfer_matrix(filter)
    size = 2 * matrix.window + 1
    f = LaurentPoly(-matrix.window, rng.standard_normal(size) + 1j * rng.standard_normal(size))
    assert matrix.apply(f).allclose(apply_ruelle(filter, f), atol=1e-10)
    pointwise = apply_ruelle_pointwise(filter, f, circle_grid(64))
    assert np.allclose(sample(matrix.apply(f), 64), pointwise, atol=1e-10)


def test_ruelle_fixes_constants(example_filter: FilterSpec) -> None:
    one = LaurentPoly.constant(1.0)
    assert apply_ruelle(example_filter, one).allclose(one)
    assert apply_ruelle_power(example_filter, one, 5).allclose(one)


def test_reflected_density_is_not_fixed(example_filter: FilterSpec) -> None:
    reflected = h_phi_reflected()
    image = apply_ruelle(example_filter, reflected)
    assert image.allclose(LaurentPoly(-2, [-1 / 9, 0.0, 1 / 3, 0.0, -1 / 9]))
    assert abs(apply_ruelle_pointwise(example_filter, reflected, math.pi) - 1 / 9) < 1e-12
    assert abs(apply_ruelle_pointwise(example_filter, reflected, 0.0) - 1 / 9) < 1e-12


def test_haar_fixed_space(haar_filter: FilterSpec) -> None:
    report = fixed_space(haar_filter)
    assert report.dimension == 1
    assert report.pure
    assert report.basis[0].allclose(LaurentPoly.constant(1.0), atol=1e-9)
    assert max(report.residuals) < 1e-10
    assert abs(report.spectral_radius_estimate - 1.0) < 1e-6


def test_example31_fixed_space_contains_h_phi(example_filter: FilterSpec, density: LaurentPoly) -> None:
    report = fixed_space(example_filter)
    assert report.dimension == 2
    assert not report.pure
    assert span_residual(density, report.basis) < 1e-9
    assert span_residual(LaurentPoly.constant(1.0), report.basis) < 1e-9
    for vector in report.basis:
        assert vector.allclose(conj_reflect(vector), atol=1e-9)


def test_daubechies_is_pure() -> None:
    assert fixed_space(daubechies4()).pure


def test_harmonic_density_normalizations(example_filter: FilterSpec, density: LaurentPoly) -> None:
    at_one = harmonic_density(example_filter, density)
    assert at_one.normalization == Normalization.eval_at_1
    assert at_one.h.allclose(density)
    assert abs(at_one(0.0) - 1.0) < 1e-12

    vanishing = LaurentPoly.constant(1.0) - density
    unit = harmonic_density(example_filter, vanishing)
    assert unit.normalization == Normalization.unit_integral
    assert unit.h.allclose(vanishing.scale(1.5))


def test_harmonic_density_rejects(example_filter: FilterSpec) -> None:
    with pytest.raises(NotHarmonicError):
        harmonic_density(example_filter, h_phi_reflected())
    with pytest.raises(ContractViolation):
        harmonic_density(example_filter, LaurentPoly.monomial(1))
    with pytest.raises(ContractViolation):
        harmonic_density(example_filter, LaurentPoly(-3, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]))


def test_non_tracial_moments(example_filter: FilterSpec, density: LaurentPoly) -> None:
    assert abs(moment(example_filter, density, 0, 0, LaurentPoly.monomial(1)) - 2 / 9) < 1e-12
    assert abs(moment(example_filter, density, 0, 0, LaurentPoly.monomial(2)) - 1 / 9) < 1e-12
    assert abs(moment(example_filter, density, 2, 2, LaurentPoly.constant(1.0)) - 1 / 3) < 1e-12
    with pytest.raises(ContractViolation):
        moment(example_filter, density, 3, 2, LaurentPoly.constant(1.0))


def test_filter_power(haar_filter: FilterSpec) -> None:
    assert filter_power(haar_filter, 0) == LaurentPoly.constant(1.0)
    assert filter_power(haar_filter, 2).allclose(LaurentPoly(0, [0.5, 0.5, 0.5, 0.5]))


def test_cocycle_transform(example_filter: FilterSpec, density: LaurentPoly) -> None:
    result = cocycle_transform(example_filter, density, 384)
    assert result.quadrature_residual < 1e-9
    assert result.lowpass_residual is not None and result.lowpass_residual < 1e-12
    assert int(np.sum(~result.admissible)) == 4
    assert np.all(result.values[~result.admissible] == 0)


def test_cocycle_lowpass_residual_reads_the_transformed_filter(haar_filter: FilterSpec) -> None:
    flat = cocycle_transform(trivial(), LaurentPoly.constant(1.0), 64)
    assert flat.values[0] == 1.0
    assert flat.lowpass_residual == pytest.approx(SQRT2 - 1.0, abs=1e-15)

    vanishing = cocycle_transform(haar_filter, LaurentPoly(-1, [-0.5, 1.0, -0.5]), 64)
    assert not vanishing.admissible[0]
    assert vanishing.lowpass_residual is None


def test_cocycle_pair() -> None:
    stretched = stretched_haar(2)
    f = LaurentPoly(0, [1.0, 1.0])
    assert cocycle_pair_residual(stretched, haar().m0, f) < 1e-12
    assert cocycle_harmonic_residual(stretched, haar().m0, f) < 1e-12
    assert cocycle_pair_residual(stretched, stretched.m0, f) > 0.1


def test_zero_set_fraction() -> None:
    assert zero_set_fraction(LaurentPoly(0, [1.0, 1.0]), grid_size=4) == 0.25
    assert zero_set_fraction(LaurentPoly.constant(1.0)) == 0.0


def test_cuntz_relations(haar_filter: FilterSpec) -> None:
    m0, m1 = cuntz_filters(haar_filter)
    assert m1.allclose(LaurentPoly(0, [-1 / SQRT2, 1 / SQRT2]))
    rng = np.random.default_rng(3)
    f = LaurentPoly(-3, rng.standard_normal(7) + 1j * rng.standard_normal(7))
    for i in (0, 1):
        for j in (0, 1):
            product = cuntz_s_adjoint(haar_filter, i, cuntz_s(haar_filter, j, f))
            assert product.allclose(f if i == j else LaurentPoly.zero(), atol=1e-12)
    total = cuntz_s(haar_filter, 0, cuntz_s_adjoint(haar_filter, 0, f)) + cuntz_s(
        haar_filter, 1, cuntz_s_adjoint(haar_filter, 1, f)
    )
    assert total.allclose(f, atol=1e-12)


def test_cuntz_preconditions() -> None:
    with pytest.raises(ContractViolation):
        cuntz_filters(trivial(3))
    with pytest.raises(ContractViolation):
        cuntz_s(FilterSpec(scale=2, m0=LaurentPoly.constant(SQRT2)), 0, LaurentPoly.constant(1.0))


def test_isometry_defects(example_filter: FilterSpec, density: LaurentPoly) -> None:
    f = LaurentPoly(0, [1.0, 0.0, 1.0])
    assert abs(isometry_defect(example_filter, density, f, branch=0)) < 1e-12
    assert abs(isometry_defect(example_filter, density, f, branch=1) + 4 / 9) < 1e-12


def test_weighted_adjoint_power_decay(haar_filter: FilterSpec) -> None:
    one = LaurentPoly.constant(1.0)
    norms = weighted_adjoint_power_decay(haar_filter, one, one, 3, grid_size=64)
    assert np.allclose(norms, [2 ** -0.5, 0.5, 2 ** -1.5])
    assert weighted_adjoint_power_decay(haar_filter, one, one, 0) == []


def test_conditional_expectation_of_constant(haar_filter: FilterSpec) -> None:
    result = conditional_expectation(haar_filter, LaurentPoly.constant(1.0), 1.0, grid_size=64)
    assert np.allclose(result.values, 1.0)
    assert result.integral_defect < 1e-12


def test_l1_witness() -> None:
    witness = l1_norm_bound_witness(haar(), trials=5, seed=0)
    assert abs(witness.bound - 2.0) < 1e-9
    assert 1.8 <= witness.ratio <= witness.bound + 1e-9

    flat = l1_norm_bound_witness(trivial(), trials=5, seed=0)
    assert abs(flat.ratio - 1.0) < 1e-9


def test_fejer_spike_is_nonnegative() -> None:
    assert is_real_nonneg(fejer_spike(1.0, 8), grid_size=512)


@pytest.mark.parametrize("name,filter", [("haar", haar()), ("example31", example31()), ("db4", daubechies4())])
def test_conditional_expectation_pulls_out_functions_of_z_to_the_n(name: str, filter: FilterSpec) -> None:
    one = LaurentPoly.constant(1.0)
    g = LaurentPoly(-1, [0.5, 0.2, 0.5])
    f = LaurentPoly(0, [1.0, -0.3, 0.25j])
    scale = filter.scale

    def outer(w: np.ndarray) -> np.ndarray:
        return evaluate(g, scale * np.asarray(w))

    def product(w: np.ndarray) -> np.ndarray:
        return outer(w) * evaluate(f, np.asarray(w))

    pulled = conditional_expectation(filter, one, outer, grid_size=128)
    assert np.allclose(pulled.values, evaluate(g, pulled.omega), atol=1e-12)

    inner = conditional_expectation(filter, one, f, grid_size=128)
    mixed = conditional_expectation(filter, one, product, grid_size=128)
    assert np.allclose(mixed.values, evaluate(g, mixed.omega) * inner.values, atol=1e-12)
    assert mixed.integral_defect < 1e-12


@pytest.mark.parametrize("name,filter", [("haar", haar()), ("example31", example31()), ("db4", daubechies4())])
def test_fixed_vectors_do_not_vanish_on_sets_of_positive_measure(name: str, filter: FilterSpec) -> None:
    for vector in fixed_space(filter).basis:
        assert zero_set_fraction(vector, grid_size=1024) == 0.0


def test_l1_witness_stays_below_the_sup_bound(example_filter: FilterSpec) -> None:
    witness = l1_norm_bound_witness(example_filter, trials=20, seed=11)
    assert witness.bound <= 2.0 + 1e-9
    assert 0.9 * witness.bound <= witness.ratio <= witness.bound + 1e-12
