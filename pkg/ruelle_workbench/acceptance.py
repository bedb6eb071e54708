"""
The reproduction battery: every worked example, identity and table value the workbench is expected to reproduce,
as named checks for `battery.run_checks`.
"""
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from .battery import CheckFunc, CheckOutcome, CheckResult, run_checks
from .bohr import DeltaKernel, MomentKernel, kernel_gram, nadic_grid, psd_check
from .cascade import (
    GridFunction,
    correlation_density,
    mallat_partial,
    refinement_residual,
    transfer_intertwine_residual,
)
from .duality import dimension_vs_orbits, intertwine_residual, multiplicative_order, orbit_period, orbits
from .filters import example31, example31_scaling_function, h_phi, h_phi_reflected, haar
from .keane import (
    CircleMap,
    CycleMeasure,
    GWeight,
    RealPolynomial,
    backward_sample,
    cycle_measure_residual,
    cylinder_masses,
    doubling_map,
    inverse_branches,
    julia_bracket,
    orbit_histogram,
    two_branch_map,
    ulam_fixed_density,
)
from .laurent import FilterSpec, LaurentPoly, circle_grid, compose_power, distance, downsample_average, mul, sample
from .rng import make_rng
from .transfer import (
    apply_ruelle,
    apply_ruelle_pointwise,
    build_transfer_matrix,
    check_lowpass,
    check_quadrature,
    cuntz_s,
    cuntz_s_adjoint,
    fixed_space,
    moment,
    span_residual,
)

logger = logging.getLogger(__name__)

ALPHA = 1.05
SEED = 20240601


def quintic(alpha: float = ALPHA) -> RealPolynomial:
    return RealPolynomial((1.0, 0.0, -5 * alpha ** 2, 0.0, 5 * alpha ** 4, 0.0))


def quartic(alpha: float = ALPHA) -> RealPolynomial:
    return RealPolynomial((1.0, 0.0, -4 * alpha ** 2, 0.0, 2 * alpha ** 4))


def _random_poly(rng: np.random.Generator, lo: int, hi: int) -> LaurentPoly:
    size = hi - lo + 1
    return LaurentPoly(lo, rng.standard_normal(size) + 1j * rng.standard_normal(size))


def filter_predicates() -> CheckResult:
    filter = example31()
    quadrature, lowpass = check_quadrature(filter), check_lowpass(filter)
    constant_defect = distance(apply_ruelle(filter, LaurentPoly.constant(1.0)), LaurentPoly.constant(1.0))
    passed = quadrature and lowpass and constant_defect <= 1e-15
    return passed, f"quadrature={quadrature} lowpass={lowpass} |R(1)-1|={constant_defect:.3g}"


def harmonic_density_span() -> CheckResult:
    report = fixed_space(example31())
    residual = span_residual(h_phi(), report.basis)
    haar_pure = fixed_space(haar()).pure
    passed = report.dimension == 2 and residual < 1e-9 and haar_pure
    return passed, f"dim={report.dimension} span residual={residual:.3g} haar pure={haar_pure}"


def scaling_function() -> CheckResult:
    phi = example31_scaling_function()
    residual = refinement_residual(example31(), phi)
    density_error = distance(correlation_density(phi, phi), h_phi())
    passed = residual <= 1e-15 and density_error <= 1e-15
    return passed, f"refinement residual={residual:.3g} correlation error={density_error:.3g}"


def non_tracial_moments() -> CheckResult:
    filter, h = example31(), h_phi()
    first = moment(filter, h, 0, 0, LaurentPoly.monomial(1))
    second = moment(filter, h, 0, 0, LaurentPoly.monomial(2))
    error = max(abs(first - 2 / 9), abs(second - 1 / 9))
    return error < 1e-12, f"moment(e1)={first.real:.12g} moment(e2)={second.real:.12g}"


def second_isometry_defect() -> CheckResult:
    filter, reflected = example31(), h_phi_reflected()
    image = apply_ruelle(filter, reflected)
    gap = float(np.max(np.abs(sample(image - reflected, 1024))))
    omega = circle_grid(64)
    oracle = 1 / 3 - (2 / 9) * np.cos(2 * omega)
    pointwise = np.asarray(apply_ruelle_pointwise(filter, reflected, omega))
    coefficient = sample(image, 64)
    oracle_error = float(max(np.max(np.abs(pointwise - oracle)), np.max(np.abs(coefficient - oracle))))
    return gap > 0.1 and oracle_error <= 1e-9, f"sup|R(h)-h|={gap:.12g} oracle error={oracle_error:.3g}"


def grid_pairs() -> List[Tuple[GridFunction, GridFunction]]:
    return [
        (GridFunction.indicator(0, 1, 2), GridFunction.indicator(0, 1, 2)),
        (GridFunction.indicator(0, 1, 2), GridFunction.indicator(1, 2, 2)),
        (example31_scaling_function(), GridFunction.indicator(0, 2, 2)),
        (GridFunction.indicator(-1, 1, 2), GridFunction.indicator(0, 3, 2, height=0.5)),
        (
            GridFunction(2, 1, 0, np.array([1.0, -1.0, 0.5], dtype=np.complex128)),
            GridFunction(2, 2, 1, np.array([1j, 2.0, 0.0, -1.0], dtype=np.complex128)),
        ),
    ]


def correlation_intertwining() -> CheckResult:
    worst = max(
        transfer_intertwine_residual(filter, phi, psi) for filter in (haar(), example31()) for phi, psi in grid_pairs()
    )
    return worst <= 1e-9, f"max residual={worst:.3g}"


def mallat_norms() -> CheckResult:
    filter = example31()
    plain = [mallat_partial(filter, n).norm_squared for n in range(1, 5)]
    weighted = [mallat_partial(filter, n, h_phi()).norm_squared for n in range(1, 5)]
    spread = max(max(plain) - min(plain), max(weighted) - min(weighted))
    passed = spread <= 1e-4 and abs(weighted[0] - 1 / 3) <= 1e-4 and abs(plain[0] - 1.0) <= 1e-4
    return passed, f"h=1 norms^2 {plain[0]:.12g}, h=h_phi norms^2 {weighted[0]:.12g}, spread={spread:.3g}"


def cuntz_relations() -> CheckResult:
    rng = make_rng(SEED)
    worst = 0.0
    for filter in (haar(), example31()):
        for _ in range(20):
            f = _random_poly(rng, -4, 4)
            for i in (0, 1):
                for j in (0, 1):
                    expected = f if i == j else LaurentPoly.zero()
                    worst = max(worst, distance(cuntz_s_adjoint(filter, i, cuntz_s(filter, j, f)), expected))
            total = LaurentPoly.zero()
            for i in (0, 1):
                total = total + cuntz_s(filter, i, cuntz_s_adjoint(filter, i, f))
            worst = max(worst, distance(total, f))
    return worst < 1e-12, f"max defect={worst:.3g}"


def scale_duality() -> CheckResult:
    orbit_ok = orbits(2, 3).orbits == [[0], [1, 2]]
    comparisons = {p: dimension_vs_orbits(haar(), p) for p in (3, 5, 7, 9, 15)}
    dimensions_ok = all(c.equal for c in comparisons.values())
    twisted = max(intertwine_residual(haar(), h_phi(), 3, k) for k in (0, 1, 2))
    periods_ok = all(
        orbit_period(2, p, j) == multiplicative_order(2, p // math.gcd(j, p))
        for p in range(3, 102, 2)
        for j in range(p)
    )
    passed = orbit_ok and dimensions_ok and twisted <= 1e-9 and periods_ok
    summary = " ".join(f"p={p}:{c.dimension}/{c.orbit_count}" for p, c in comparisons.items())
    return passed, f"{summary} twisted residual={twisted:.3g} periods={periods_ok}"


def julia_brackets() -> CheckResult:
    fifth, fourth = julia_bracket(quintic()), julia_bracket(quartic())
    brackets_ok = abs(fifth.b - 2.08411) <= 1e-4 and abs(fourth.b - 2.08064) <= 1e-4
    rng = make_rng(SEED)
    residual_ok = True
    for system in (fifth, fourth):
        x = rng.uniform(system.a, system.b, 1000)
        roots = inverse_branches(system, x)
        residual_ok &= roots.shape == (1000, system.degree)
        residual = float(np.max(np.abs(system.poly(roots) - x[:, None])))
        residual_ok &= residual < 1e-11 * max(1.0, system.b ** system.degree)
        residual_ok &= bool(np.all(np.diff(roots, axis=1) < 0))
    points = backward_sample(fifth, fifth.b, depth=8, count=100_000, seed=SEED)
    worst_z = max(mass.z_score for mass in cylinder_masses(fifth, points, depth=2))
    passed = brackets_ok and residual_ok and worst_z <= 5.0
    return passed, f"b5={fifth.b:.12g} b4={fourth.b:.12g} branches ok={residual_ok} worst cylinder z={worst_z:.3g}"


def cycle_measures() -> CheckResult:
    circle = CircleMap(2)
    cycle = CycleMeasure((0.0,), circle)
    e1 = LaurentPoly.monomial(1)
    residuals = [
        cycle_measure_residual(circle, GWeight.from_filter(filter), cycle, e1, strict=True).residual
        for filter in (haar(), example31())
    ]
    control = cycle_measure_residual(circle, GWeight.uniform(2), cycle, e1).residual
    passed = max(residuals) <= 1e-12 and abs(control - 1.0) <= 1e-12
    return passed, f"residuals={max(residuals):.3g} constant-g control={control:.12g}"


def markov_densities() -> CheckResult:
    doubling = ulam_fixed_density(doubling_map(), 64)
    doubling_error = float(np.max(np.abs(doubling.density - 1.0)))
    unequal = two_branch_map(0.4)
    ulam = ulam_fixed_density(unequal, 50)
    histogram = orbit_histogram(unequal, 50, 1_000_000, seed=SEED)
    l1 = float(np.mean(np.abs(ulam.density - histogram)))
    return doubling_error <= 1e-12 and l1 < 0.02, f"doubling error={doubling_error:.3g} orbit L1={l1:.3g}"


def bohr_kernel() -> CheckResult:
    kernel = MomentKernel(example31(), h_phi())
    consistency = max(
        kernel.consistency_residual(n, k, extra)
        for n in range(-4, 5)
        for k in range(0, 5)
        for extra in range(1, 7 - k)
    )
    points = nadic_grid(2, 4, 2)
    reports = [psd_check(kernel, points), psd_check(MomentKernel(haar(), LaurentPoly.constant(1.0)), points)]
    identity_error = float(np.max(np.abs(kernel_gram(DeltaKernel(2), points) - np.eye(len(points)))))
    passed = consistency < 1e-10 and all(r.passed for r in reports) and identity_error == 0.0
    smallest = min(r.min_eigenvalue or 0.0 for r in reports)
    return passed, f"consistency={consistency:.3g} min eigenvalue={smallest:.12g} delta error={identity_error:.3g}"


def oracle_equivalence() -> CheckResult:
    rng = make_rng(SEED)
    omega = circle_grid(64)
    worst = 0.0
    for _ in range(50):
        scale = int(rng.integers(2, 4))
        filter = FilterSpec(scale=scale, m0=_random_poly(rng, 0, int(rng.integers(1, 8))))
        matrix = build_transfer_matrix(filter)
        f = _random_poly(rng, -matrix.window, matrix.window)
        via_matrix = matrix.apply(f)
        worst = max(worst, float(np.max(np.abs(sample(via_matrix, 64) - apply_ruelle_pointwise(filter, f, omega)))))
        worst = max(worst, distance(via_matrix, apply_ruelle(filter, f)))
        g = _random_poly(rng, -2, 2)
        pulled = apply_ruelle(filter, mul(compose_power(g, scale), f))
        worst = max(worst, distance(pulled, mul(g, apply_ruelle(filter, f))))
        parseval = abs(f.norm2() ** 2 - float(np.mean(np.abs(sample(f, 256)) ** 2)))
        worst = max(worst, parseval / max(1.0, f.norm2() ** 2))
        worst = max(worst, distance(downsample_average(compose_power(g, scale), scale), g))
    return worst <= 1e-9, f"max discrepancy={worst:.3g}"


ACCEPTANCE_CHECKS: List[Tuple[str, CheckFunc]] = [
    ("filter predicates", filter_predicates),
    ("harmonic density span", harmonic_density_span),
    ("scaling function", scaling_function),
    ("non-tracial moments", non_tracial_moments),
    ("second isometry defect", second_isometry_defect),
    ("correlation intertwining", correlation_intertwining),
    ("mallat norms", mallat_norms),
    ("cuntz relations", cuntz_relations),
    ("scale duality", scale_duality),
    ("julia brackets", julia_brackets),
    ("cycle g-measures", cycle_measures),
    ("markov fixed densities", markov_densities),
    ("moment kernel", bohr_kernel),
    ("oracle equivalence", oracle_equivalence),
]


def run_acceptance(
    record: Optional[Callable[[str], None]] = None, raise_exceptions: bool = False
) -> List[CheckOutcome]:
    return run_checks(ACCEPTANCE_CHECKS, logger=logger, raise_exceptions=raise_exceptions, record=record)


def format_table(outcomes: List[CheckOutcome]) -> str:
    width = max(len(outcome.name) for outcome in outcomes) if outcomes else 0
    lines = [
        f"{index:>2}  {outcome.name:<{width}}  {'PASS' if outcome.passed else 'FAIL'}  {outcome.seconds:7.3f}s  "
        f"{outcome.detail}"
        for index, outcome in enumerate(outcomes, start=1)
    ]
    passed = sum(outcome.passed for outcome in outcomes)
    lines.append(f"{passed}/{len(outcomes)} passed")
    return "\n".join(lines)
