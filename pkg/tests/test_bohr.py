import math

import numpy as np
import pytest

from ruelle_workbench.bohr import (
    DeltaKernel,
    MomentKernel,
    NadicRational,
    TableKernel,
    canonicalize,
    default_gram_index,
    domination_check,
    gns_gram,
    kernel_gram,
    keane_mixed_moment,
    keane_moment,
    nadic_grid,
    phase_discrepancy,
    psd_check,
)
from ruelle_workbench.exceptions import ContractViolation, NotHarmonicError
from ruelle_workbench.filters import h_phi_reflected, haar, trivial
from ruelle_workbench.laurent import FilterSpec, LaurentPoly, autocorrelation
from ruelle_workbench.rng import make_rng
from ruelle_workbench.transfer import moment


@pytest.mark.parametrize("n,k,expected", [(4, 2, (1, 0)), (6, 1, (3, 0)), (3, 2, (3, 2)), (0, 5, (0, 0))])
def test_canonicalize(n: int, k: int, expected: tuple) -> None:
    point = canonicalize(n, k, 2)
    assert (point.numerator, point.depth) == expected


def test_nadic_arithmetic() -> None:
    half = canonicalize(1, 1, 2)
    quarter = canonicalize(1, 2, 2)
    assert half + half == canonicalize(1, 0, 2)
    assert half - quarter == quarter
    assert (-half).value == -0.5
    assert str(quarter) == "1/2^2"
    with pytest.raises(ValueError):
        NadicRational(2, 2, 1)
    with pytest.raises(ValueError):
        half + canonicalize(1, 1, 3)


def test_nadic_grid() -> None:
    points = nadic_grid(2, 4, 2)
    assert len(points) == 17
    values = [point.value for point in points]
    assert values == sorted(values)
    assert values[0] == -4.0 and values[-1] == 4.0


def test_moment_kernel_values(example_filter: FilterSpec, density: LaurentPoly) -> None:
    kernel = MomentKernel(example_filter, density)
    assert abs(kernel.value(canonicalize(0, 0, 2)) - 1 / 3) < 1e-12
    assert abs(kernel.value(canonicalize(1, 0, 2)) - 2 / 9) < 1e-12
    assert kernel.consistency_residual(1, 1, 2) < 1e-12
    assert kernel.consistency_residual(3, 0, 3) < 1e-12
    with pytest.raises(ValueError):
        kernel.value(canonicalize(1, 0, 3))


def test_moment_kernel_needs_a_fixed_vector(example_filter: FilterSpec) -> None:
    with pytest.raises(NotHarmonicError):
        MomentKernel(example_filter, h_phi_reflected())


def test_moment_kernel_is_positive_definite(example_filter: FilterSpec, density: LaurentPoly) -> None:
    report = psd_check(MomentKernel(example_filter, density), nadic_grid(2, 4, 2))
    assert report.passed
    assert report.size == 17
    assert report.hermitian_discrepancy < 1e-12


def test_delta_kernel_gives_identity() -> None:
    points = nadic_grid(3, 2, 1)
    assert np.allclose(kernel_gram(DeltaKernel(3), points), np.eye(len(points)))


def test_corrupted_table_fails(example_filter: FilterSpec, density: LaurentPoly) -> None:
    kernel = MomentKernel(example_filter, density)
    zero, one = canonicalize(0, 0, 2), canonicalize(1, 0, 2)
    corrupted = TableKernel(kernel, {one: 2 * kernel.value(zero)})
    report = psd_check(corrupted, [zero, one])
    assert not report.passed
    assert report.min_eigenvalue == pytest.approx(-1 / 3)


def test_non_hermitian_table_is_rejected(example_filter: FilterSpec, density: LaurentPoly) -> None:
    kernel = MomentKernel(example_filter, density)
    zero = canonicalize(0, 0, 2)
    with pytest.raises(ContractViolation):
        psd_check(TableKernel(kernel, {zero: 1j}), [zero])


def test_empty_gram() -> None:
    report = psd_check(DeltaKernel(2), [])
    assert report.passed and report.min_eigenvalue is None


def test_gns_gram(haar_filter: FilterSpec) -> None:
    one = LaurentPoly.constant(1.0)
    gram = gns_gram(haar_filter, one, [(0, 0), (1, 0)])
    assert np.allclose(np.diag(gram.matrix), 1.0)
    assert abs(gram.matrix[0, 1] - 1 / math.sqrt(2)) < 1e-12
    assert gram.psd.passed

    larger = gns_gram(haar_filter, one, default_gram_index(2, 2))
    assert larger.psd.passed
    assert len(default_gram_index(3, 3)) == 28


def test_gns_gram_with_second_density(example_filter: FilterSpec, density: LaurentPoly) -> None:
    gram = gns_gram(example_filter, density, [(0, 0), (1, 0)], h_q=LaurentPoly.constant(1.0))
    assert np.allclose(np.diag(gram.matrix), 1.0)
    with pytest.raises(NotHarmonicError):
        gns_gram(example_filter, density, [(0, 0)], h_q=h_phi_reflected())


@pytest.mark.parametrize("h_q", [None, LaurentPoly.constant(1.0)], ids=["own-density", "constant"])
def test_gns_gram_is_psd_for_fixed_vectors(
    example_filter: FilterSpec, density: LaurentPoly, h_q: LaurentPoly
) -> None:
    index = [(n, j) for n in range(3) for j in range(-2, 3)]
    gram = gns_gram(example_filter, density, index, h_q=h_q)
    assert gram.psd.size == 15
    assert gram.psd.min_eigenvalue >= -1e-9
    assert gram.psd.passed


def test_moment_kernel_is_hermitian(example_filter: FilterSpec, density: LaurentPoly) -> None:
    kernel = MomentKernel(example_filter, density)
    rng = make_rng(2024)
    numerators = rng.integers(-40, 41, size=100)
    depths = rng.integers(0, 5, size=100)
    for n, k in zip(numerators, depths):
        point = canonicalize(int(n), int(k), 2)
        assert abs(kernel.value(-point) - kernel.value(point).conjugate()) < 1e-12


def test_domination(density: LaurentPoly) -> None:
    report = domination_check(density, LaurentPoly.constant(1.0))
    assert report.dominated and report.nonnegative
    assert report.constant == pytest.approx(1.0)

    vanishing = LaurentPoly(-1, [0.25, 0.5, 0.25])
    flipped = domination_check(LaurentPoly.constant(1.0), vanishing)
    assert not flipped.dominated


def test_phase_discrepancy(haar_filter: FilterSpec) -> None:
    one = LaurentPoly.constant(1.0)
    assert phase_discrepancy(trivial(), one, 2, LaurentPoly.monomial(1)) < 1e-12
    haar_gap = phase_discrepancy(haar_filter, one, 1, one)
    assert haar_gap == pytest.approx(2 * math.sqrt(2) / math.pi - 1 / math.sqrt(2), abs=1e-5)
    assert abs(keane_moment(haar_filter, one, 1, one) - 2 * math.sqrt(2) / math.pi) < 1e-5


def test_nonnegative_filter_has_no_phase(density: LaurentPoly) -> None:
    root = math.sqrt(2)
    raised_cosine = FilterSpec(2, LaurentPoly(-1, [1 / (2 * root), 1 / root, 1 / (2 * root)]))
    assert np.allclose((autocorrelation(haar().m0) * (1 / root)).coeffs, raised_cosine.m0.coeffs)
    for n, f in [(1, LaurentPoly.constant(1.0)), (2, LaurentPoly.monomial(1)), (3, LaurentPoly.monomial(-2))]:
        assert phase_discrepancy(raised_cosine, density, n, f) < 1e-12
    mixed = keane_mixed_moment(raised_cosine, density, 1, 3, LaurentPoly.monomial(1))
    assert abs(mixed - moment(raised_cosine, density, 1, 3, LaurentPoly.monomial(1))) < 1e-12


def test_two_step_haar_phase(haar_filter: FilterSpec) -> None:
    one = LaurentPoly.constant(1.0)
    keane = (8 * math.sqrt(2) - 4) / (3 * math.pi)
    assert phase_discrepancy(haar_filter, one, 2, one) == pytest.approx(keane - 0.5, abs=1e-5)
