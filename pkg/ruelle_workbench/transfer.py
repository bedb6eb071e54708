"""
The Ruelle operator of a scale-N filter on the circle,

    (Rf)(z) = (1/N) * sum over w^N = z of |m0(w)|^2 f(w),

realized on coefficients as a finite transfer matrix, together with its fixed space, filter predicates, the
cocycle transform, the Cuntz isometries and representation moments.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import null_space

from .enums import Normalization
from .exceptions import ContractViolation, NotHarmonicError, SingularDensityError
from .laurent import (
    FilterSpec,
    LaurentPoly,
    autocorrelation,
    circle_grid,
    compose_power,
    conj_reflect,
    downsample_average,
    evaluate,
    haar_integral,
    is_hermitian,
    mul,
    rotate,
    sample,
)
from .rng import make_rng
from .settings import get_settings

logger = logging.getLogger(__name__)

QUADRATURE_TOL = 1e-10
LOWPASS_TOL = 1e-10
DENSITY_MIN_TOL = 1e-9
SINGULAR_TOL = 1e-9

Evaluator = Callable[[np.ndarray], np.ndarray]
FunctionLike = Union[LaurentPoly, Evaluator, float, complex]


def values_at(f: FunctionLike, omega: np.ndarray) -> np.ndarray:
    """
    Evaluates a polynomial, an angle evaluator or a constant at the angles `omega` (z = exp(-i*omega))
    """
    angles = np.asarray(omega, dtype=np.float64)
    if isinstance(f, LaurentPoly):
        return np.asarray(evaluate(f, angles), dtype=np.complex128)
    if callable(f):
        return np.broadcast_to(np.asarray(f(angles), dtype=np.complex128), angles.shape)
    return np.full(angles.shape, complex(f))


# --- filter predicates ---------------------------------------------------------------------------------------------


def check_quadrature(filter: FilterSpec) -> bool:
    """
    True iff c_{Nn} = delta_{n,0} for the autocorrelation c of m0, the coefficient form of
    sum over w^N = z of |m0(w)|^2 = N
    """
    c = autocorrelation(filter.m0)
    n = filter.scale
    for k in range(-(-c.lo // n), c.hi // n + 1):
        target = 1.0 if k == 0 else 0.0
        if abs(c.coefficient(n * k) - target) > QUADRATURE_TOL:
            return False
    return abs(c.coefficient(0) - 1.0) <= QUADRATURE_TOL


def check_lowpass(filter: FilterSpec) -> bool:
    return abs(complex(evaluate(filter.m0, 0.0)) - math.sqrt(filter.scale)) <= LOWPASS_TOL


def validate_filter(filter: FilterSpec) -> FilterSpec:
    """
    Returns a copy of `filter` with the `quadrature` and `lowpass` flags set from the checks
    """
    return replace(filter, quadrature=check_quadrature(filter), lowpass=check_lowpass(filter))


def require_quadrature(filter: FilterSpec) -> None:
    if not (filter.quadrature or check_quadrature(filter)):
        raise ContractViolation("A quadrature filter is required")


# --- the operator --------------------------------------------------------------------------------------------------


def apply_ruelle(filter: FilterSpec, f: LaurentPoly) -> LaurentPoly:
    return downsample_average(mul(autocorrelation(filter.m0), f), filter.scale)


def apply_ruelle_power(filter: FilterSpec, f: LaurentPoly, k: int) -> LaurentPoly:
    c = autocorrelation(filter.m0)
    for _ in range(k):
        f = downsample_average(mul(c, f), filter.scale)
    return f


def root_fiber(omega: Union[float, np.ndarray], n: int) -> np.ndarray:
    """
    Angles of the N points w with w^N = exp(-i*omega), along a trailing axis
    """
    angles = np.asarray(omega, dtype=np.float64)
    return (angles[..., None] + 2.0 * np.pi * np.arange(n)) / n


def apply_ruelle_pointwise(
    filter: FilterSpec, f: FunctionLike, omega: Union[float, np.ndarray]
) -> Union[complex, np.ndarray]:
    """
    Evaluates Rf at z = exp(-i*omega) by summing over the N roots; independent of the transfer matrix.
    """
    roots = root_fiber(omega, filter.scale)
    weights = np.abs(values_at(filter.m0, roots)) ** 2
    result = np.mean(weights * values_at(f, roots), axis=-1)
    if np.ndim(result) == 0:
        return complex(result)
    return result


@dataclass(frozen=True)
class TransferMatrix:
    """
    entries[n + window][m + window] = c_{Nn - m} for n, m in [-window, window]
    """

    scale: int
    window: int
    entries: np.ndarray

    def apply(self, f: LaurentPoly) -> LaurentPoly:
        return LaurentPoly.from_window(self.entries @ f.window(self.window), self.window)

    def restrict(self, window: int) -> np.ndarray:
        if window > self.window:
            raise ValueError(f"Cannot restrict window {self.window} to larger window {window}")
        offset = self.window - window
        return self.entries[offset : offset + 2 * window + 1, offset : offset + 2 * window + 1]


def transfer_window(filter: FilterSpec) -> int:
    """
    K = ceil(D / (N - 1)) with D the top exponent of |m0|^2; exponents outside [-K, K] never feed back into it
    """
    c = autocorrelation(filter.m0)
    spread = max(abs(c.lo), abs(c.hi))
    return -(-spread // (filter.scale - 1))


def build_transfer_matrix(filter: FilterSpec, window: Optional[int] = None) -> TransferMatrix:
    if filter.m0.is_zero():
        raise ContractViolation("Cannot build a transfer matrix for the zero filter")
    c = autocorrelation(filter.m0)
    spread = max(abs(c.lo), abs(c.hi))
    size = transfer_window(filter) if window is None else window
    index = np.arange(-size, size + 1)
    shift = filter.scale * index[:, None] - index[None, :]
    padded = c.window(spread)
    inside = np.abs(shift) <= spread
    entries = np.where(inside, padded[np.clip(shift + spread, 0, 2 * spread)], 0.0)
    return TransferMatrix(scale=filter.scale, window=size, entries=entries.astype(np.complex128))


# --- fixed space ---------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenReport:
    dimension: int
    basis: List[LaurentPoly]
    residuals: List[float]
    spectral_radius_estimate: float
    pure: bool


def _hermitian_basis(kernel: np.ndarray, rank_rtol: float) -> np.ndarray:
    """
    Re-expresses a basis of a conjugation-invariant subspace by orthonormal vectors with v(-n) = conj(v(n))
    """
    dimension = kernel.shape[1]
    reflected = np.conj(kernel[::-1, :])
    candidates = np.hstack([(kernel + reflected) / 2.0, (kernel - reflected) / 2.0j])
    stacked = np.vstack([candidates.real, candidates.imag])
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(s > rank_rtol * s[0])) if s.size and s[0] > 0 else 0
    if rank != dimension:
        logger.warning("Hermitian symmetrization changed the rank (%d -> %d); keeping raw kernel", dimension, rank)
        return kernel
    half = kernel.shape[0]
    real_basis = u[:, :rank]
    basis = real_basis[:half, :] + 1j * real_basis[half:, :]
    # orthonormal over the reals and Hermitian, hence orthonormal over the complex numbers
    return basis / np.linalg.norm(basis, axis=0)


def _fix_sign(vector: np.ndarray) -> np.ndarray:
    """
    Flips the sign so that the value at z = 1 is positive (or, when it vanishes, the largest coefficient is)
    """
    at_one = float(np.sum(vector).real)
    if abs(at_one) > 1e-12:
        return vector if at_one > 0 else -vector
    pivot = vector[np.argmax(np.abs(vector))]
    lead = pivot.real if abs(pivot.real) > 1e-12 else pivot.imag
    return vector if lead >= 0 else -vector


def spectral_radius_estimate(matrix: np.ndarray, steps: int, seed: int = 0) -> float:
    rng = make_rng(seed)
    vector = rng.standard_normal(matrix.shape[0]) + 1j * rng.standard_normal(matrix.shape[0])
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for _ in range(steps):
        image = matrix @ vector
        estimate = float(np.linalg.norm(image))
        if estimate == 0.0:
            break
        vector = image / estimate
    return estimate


def fixed_space(
    filter: FilterSpec, rank_rtol: Optional[float] = None, eig_tol: Optional[float] = None
) -> EigenReport:
    """
    Computes a basis of {h : R(h) = h} inside the transfer window.

    The kernel of T - I is extracted with `scipy.linalg.null_space`, counting singular values below
    `rank_rtol * s_max` as zero. Basis vectors are made Hermitian (real valued on the circle) when that keeps the
    rank; positivity is not asserted for them.
    """
    settings = get_settings()
    rank_rtol = settings.rank_rtol if rank_rtol is None else rank_rtol
    eig_tol = settings.eig_tol if eig_tol is None else eig_tol

    matrix = build_transfer_matrix(filter)
    kernel = null_space(matrix.entries - np.eye(matrix.entries.shape[0]), rcond=rank_rtol)
    if kernel.shape[1] > 0:
        kernel = _hermitian_basis(kernel, rank_rtol)
    basis = [LaurentPoly.from_window(_fix_sign(kernel[:, i]), matrix.window) for i in range(kernel.shape[1])]
    residuals = [(apply_ruelle(filter, b) - b).norm2() for b in basis]
    if any(r > eig_tol for r in residuals):
        raise ContractViolation(f"Fixed-space residual {max(residuals):.3e} exceeds {eig_tol:.1e}")
    radius = spectral_radius_estimate(matrix.entries, settings.power_steps)
    logger.debug("fixed space of %r: dimension %d, spectral radius %.6f", filter.m0, len(basis), radius)
    return EigenReport(
        dimension=len(basis),
        basis=basis,
        residuals=residuals,
        spectral_radius_estimate=radius,
        pure=len(basis) == 1,
    )


def orthonormal_columns(vectors: List[LaurentPoly], size: int, rtol: float = 1e-9) -> np.ndarray:
    """
    An orthonormal basis (as columns over exponents -size..size) of the span of `vectors`, rank cut at rtol * s_max
    """
    if not vectors:
        return np.zeros((2 * size + 1, 0), dtype=np.complex128)
    matrix = np.column_stack([v.window(size) for v in vectors])
    u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    if s[0] == 0:
        return np.zeros((2 * size + 1, 0), dtype=np.complex128)
    return u[:, : int(np.sum(s > rtol * s[0]))]


def span_residual(vector: LaurentPoly, basis: List[LaurentPoly]) -> float:
    """
    l2 distance from `vector` to the span of `basis`
    """
    size = max(max(abs(v.lo), abs(v.hi)) for v in [vector] + list(basis))
    columns = orthonormal_columns(list(basis), size)
    target = vector.window(size)
    return float(np.linalg.norm(target - columns @ (np.conj(columns.T) @ target)))


# --- harmonic densities --------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicDensity:
    h: LaurentPoly
    normalization: Normalization

    def __call__(self, omega: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        values = np.asarray(evaluate(self.h, omega)).real
        return float(values) if np.ndim(values) == 0 else values


def harmonic_density(
    filter: FilterSpec, h: LaurentPoly, eig_tol: Optional[float] = None, grid_size: int = 256
) -> HarmonicDensity:
    """
    Validates a nonnegative solution of R(h) = h and normalizes it to h(1) = 1, or to unit integral when h(1) = 0.
    """
    eig_tol = get_settings().eig_tol if eig_tol is None else eig_tol
    if not is_hermitian(h):
        raise ContractViolation("A harmonic density must have Hermitian coefficients")
    if float(np.min(sample(h, grid_size).real)) < -DENSITY_MIN_TOL:
        raise ContractViolation("A harmonic density must be nonnegative on the circle")
    residual = (apply_ruelle(filter, h) - h).norm2()
    if residual > eig_tol:
        raise NotHarmonicError(f"R(h) - h has norm {residual:.3e} > {eig_tol:.1e}")
    at_one = complex(evaluate(h, 0.0)).real
    if abs(at_one) > 1e-9:
        return HarmonicDensity(h=h.scale(1.0 / at_one), normalization=Normalization.eval_at_1)
    total = haar_integral(h).real
    if total <= 0:
        raise ContractViolation("A harmonic density must have positive integral")
    return HarmonicDensity(h=h.scale(1.0 / total), normalization=Normalization.unit_integral)


def _density_poly(h: Union[HarmonicDensity, LaurentPoly]) -> LaurentPoly:
    return h.h if isinstance(h, HarmonicDensity) else h


# --- moments -------------------------------------------------------------------------------------------------------


def filter_power(filter: FilterSpec, n: int) -> LaurentPoly:
    """
    m0^(n)(z) = m0(z) m0(z^N) ... m0(z^(N^(n-1))); n = 0 gives the constant 1
    """
    if n < 0:
        raise ValueError(f"filter_power needs n >= 0, got {n}")
    product = LaurentPoly.constant(1.0)
    for k in range(n):
        product = mul(product, compose_power(filter.m0, filter.scale ** k))
    return product


def moment(filter: FilterSpec, h: Union[HarmonicDensity, LaurentPoly], k: int, n: int, f: LaurentPoly) -> complex:
    """
    The representation moment integral of m0^(n-k) * R^k(f h) over the circle.

    k = 0 with f = e_n gives the translation moments <phi, pi(e_n) phi>; f = 1 gives the moments of the
    scaling operator alone.
    """
    if not 0 <= k <= n:
        raise ContractViolation(f"moment needs 0 <= k <= n, got k={k}, n={n}")
    pushed = apply_ruelle_power(filter, mul(f, _density_poly(h)), k)
    return haar_integral(mul(filter_power(filter, n - k), pushed))


# --- cocycles ------------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class CocycleTransform:
    """
    Samples of m0^(h)(z) = m0(z) (h(z) / h(z^N))^(1/2) on a uniform angle grid.

    Grid points with h(z^N) <= eps are excluded (`admissible` is False and the stored value is 0).
    """

    scale: int
    omega: np.ndarray
    values: np.ndarray
    admissible: np.ndarray
    quadrature_residual: float
    lowpass_residual: Optional[float]


def cocycle_transform(
    filter: FilterSpec, h: Union[HarmonicDensity, LaurentPoly], grid_size: int, eps: float = 1e-9
) -> CocycleTransform:
    density = _density_poly(h)
    n = filter.scale
    omega = circle_grid(grid_size)
    h_here = values_at(density, omega).real
    h_image = values_at(density, n * omega).real
    if float(np.min(h_here)) < -DENSITY_MIN_TOL:
        raise ContractViolation("cocycle_transform needs h >= 0")
    admissible = h_image > eps
    if not np.any(admissible):
        raise SingularDensityError("h vanishes at every image point of the grid")

    ratio = np.zeros_like(h_here)
    ratio[admissible] = np.maximum(h_here[admissible], 0.0) / h_image[admissible]
    values = np.where(admissible, values_at(filter.m0, omega) * np.sqrt(ratio), 0.0)

    # the fiber over z shares the denominator h(z), so admissibility of the fiber is h(z) > eps
    fiber_ok = h_here > eps
    roots = root_fiber(omega[fiber_ok], n)
    fiber_sums = np.sum(np.abs(values_at(filter.m0, roots)) ** 2 * values_at(density, roots).real, axis=-1)
    quadrature_residual = float(np.max(np.abs(fiber_sums / h_here[fiber_ok] - n))) if np.any(fiber_ok) else 0.0

    # omega[0] = 0 is z = 1, a fixed point of z -> z^N
    lowpass_residual = abs(complex(values[0]) - math.sqrt(n)) if admissible[0] else None
    return CocycleTransform(
        scale=n,
        omega=omega,
        values=values,
        admissible=admissible,
        quadrature_residual=quadrature_residual,
        lowpass_residual=lowpass_residual,
    )


def cocycle_pair_residual(
    filter: FilterSpec,
    m0prime: Union[CocycleTransform, FunctionLike],
    f: FunctionLike,
    grid_size: int = 256,
) -> float:
    """
    max over the grid of |f(z^N) m0'(z) - f(z) m0(z)|; a `CocycleTransform` brings its own grid and mask
    """
    if isinstance(m0prime, CocycleTransform):
        omega, prime_values, mask = m0prime.omega, m0prime.values, m0prime.admissible
    else:
        omega = circle_grid(grid_size)
        prime_values = values_at(m0prime, omega)
        mask = np.ones(omega.shape, dtype=bool)
    lhs = values_at(f, filter.scale * omega) * prime_values
    rhs = values_at(f, omega) * values_at(filter.m0, omega)
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(lhs - rhs)[mask]))


def cocycle_harmonic_residual(
    filter: FilterSpec, m0prime: LaurentPoly, f: FunctionLike, grid_size: int = 256
) -> float:
    """
    sup over the grid of |R(|f|^2) - |f|^2 R'(1)|, where R' is the Ruelle operator of m0'.

    For a cocycle f(z^N) m0'(z) = f(z) m0(z) this vanishes, so |f|^2 is harmonic when m0' is a quadrature filter.
    """
    omega = circle_grid(grid_size)

    def squared(w: np.ndarray) -> np.ndarray:
        return np.abs(values_at(f, w)) ** 2

    lhs = apply_ruelle_pointwise(filter, squared, omega)
    prime = FilterSpec(scale=filter.scale, m0=m0prime)
    rhs = squared(omega) * apply_ruelle_pointwise(prime, 1.0, omega)
    return float(np.max(np.abs(np.asarray(lhs) - rhs)))


def zero_set_fraction(f: FunctionLike, grid_size: int = 4096, tol: float = 1e-7) -> float:
    """
    Fraction of the uniform grid where |f| <= tol
    """
    values = values_at(f, circle_grid(grid_size))
    return float(np.mean(np.abs(values) <= tol))


# --- Cuntz isometries ----------------------------------------------------------------------------------------------


def cuntz_filters(filter: FilterSpec) -> Tuple[LaurentPoly, LaurentPoly]:
    """
    The pair (m0, m1) with m1(z) = z * conj(m0(-z)); scale 2 only
    """
    if filter.scale != 2:
        raise ContractViolation(f"The Cuntz pair is defined for N = 2, got N = {filter.scale}")
    m1 = mul(LaurentPoly.monomial(1), conj_reflect(rotate(filter.m0, 1, 2)))
    return filter.m0, m1


def _branch_filter(filter: FilterSpec, i: int) -> LaurentPoly:
    if i not in (0, 1):
        raise ValueError(f"Cuntz branch must be 0 or 1, got {i}")
    return cuntz_filters(filter)[i]


def cuntz_s(filter: FilterSpec, i: int, f: LaurentPoly) -> LaurentPoly:
    """
    (S_i f)(z) = m_i(z) f(z^2)
    """
    require_quadrature(filter)
    return mul(_branch_filter(filter, i), compose_power(f, 2))


def cuntz_s_adjoint(filter: FilterSpec, i: int, f: LaurentPoly) -> LaurentPoly:
    """
    The L2(T) adjoint of S_i.

    From <S_i g, f> = int m_i(z) g(z^2) conj(f(z)) dmu = int g(u) conj((1/2) sum over w^2 = u of
    conj(m_i(w)) f(w)) dmu(u), so S_i* f = downsample_average(conj_reflect(m_i) * f, 2), i.e.
    (S_i* f)~(n) = (conj_reflect(m_i) f)~(2n).
    """
    require_quadrature(filter)
    return downsample_average(mul(conj_reflect(_branch_filter(filter, i)), f), 2)


def weighted_norm_squared(f: LaurentPoly, h: LaurentPoly) -> float:
    """
    int |f|^2 h dmu, exactly on coefficients
    """
    return haar_integral(mul(mul(conj_reflect(f), f), h)).real


def isometry_defect(
    filter: FilterSpec, h: Union[HarmonicDensity, LaurentPoly], f: LaurentPoly, branch: int = 0
) -> float:
    """
    ||S f||^2 - ||f||^2 in L2(h) for S f = m f(z^N), with m = m0 (branch 0) or m1 (branch 1, N = 2).

    Branch 0 is isometric exactly when R(h) = h.
    """
    density = _density_poly(h)
    weight = filter.m0 if branch == 0 else _branch_filter(filter, branch)
    image = mul(weight, compose_power(f, filter.scale))
    return weighted_norm_squared(image, density) - weighted_norm_squared(f, density)


def weighted_adjoint_power_decay(
    filter: FilterSpec,
    h: Union[HarmonicDensity, LaurentPoly],
    f: FunctionLike,
    nmax: int,
    grid_size: int = 256,
) -> List[float]:
    """
    Returns ||S0*^n f||_{L2(h)} for n = 1..nmax, where S0* is the adjoint of S0 in L2(h):

        (S0* f)(z) = (1/N) * sum over w^N = z of conj(m0(w)) f(w) h(w) / h(z).

    f is sampled on a grid of grid_size * N^nmax points; each step maps a grid onto the grid N times coarser,
    whose fibers are exactly the fine-grid points.
    """
    if nmax < 0:
        raise ValueError(f"nmax must be nonnegative, got {nmax}")
    if nmax == 0:
        return []
    density = _density_poly(h)
    n = filter.scale
    size = grid_size * n ** nmax
    omega = circle_grid(size)
    h_fine = values_at(density, omega).real
    if float(np.min(h_fine)) <= SINGULAR_TOL:
        raise SingularDensityError("h is singular on the evaluation grid")
    current = values_at(f, omega)
    weights = np.conj(values_at(filter.m0, omega)) * h_fine

    norms: List[float] = []
    while len(norms) < nmax:
        coarse = size // n
        products = (weights * current).reshape(n, coarse)
        h_coarse = h_fine[::n]
        current = products.mean(axis=0) / h_coarse
        size, h_fine, weights = coarse, h_coarse, weights[::n]
        norms.append(math.sqrt(float(np.mean(np.abs(current) ** 2 * h_fine))))
    return norms


@dataclass(frozen=True)
class ConditionalExpectation:
    omega: np.ndarray
    values: np.ndarray
    integral_defect: float


def conditional_expectation(
    filter: FilterSpec, h: Union[HarmonicDensity, LaurentPoly], xi: FunctionLike, grid_size: int = 256
) -> ConditionalExpectation:
    """
    Samples R(xi h) / h, the projection onto functions of z^N in L2(h).

    `integral_defect` compares the grid integrals of R(xi h) and |m0|^2 xi h, which agree for every xi.
    """
    density = _density_poly(h)
    omega = circle_grid(grid_size)
    h_values = values_at(density, omega).real
    if float(np.min(h_values)) <= SINGULAR_TOL:
        raise SingularDensityError("h vanishes on the evaluation grid")

    def product(w: np.ndarray) -> np.ndarray:
        return values_at(xi, w) * values_at(density, w)

    pushed = np.asarray(apply_ruelle_pointwise(filter, product, omega))
    weighted = np.abs(values_at(filter.m0, omega)) ** 2 * product(omega)
    defect = abs(np.mean(pushed) - np.mean(weighted))
    return ConditionalExpectation(omega=omega, values=pushed / h_values, integral_defect=float(defect))


# --- L1 operator norm ----------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class L1Witness:
    ratio: float
    bound: float


def fejer_spike(center: float, order: int) -> LaurentPoly:
    """
    The Fejer kernel of the given order centered at angle `center`; nonnegative on the circle
    """
    k = np.arange(-order, order + 1)
    return LaurentPoly(-order, (1.0 - np.abs(k) / (order + 1)) * np.exp(1j * k * center))


def l1_norm_bound_witness(
    filter: FilterSpec, trials: int, seed: int = 0, grid_size: int = 1024, spike_order: int = 64
) -> L1Witness:
    """
    Returns the largest ||Rf||_1 / ||f||_1 over random trigonometric polynomials and Fejer spikes at argmax |m0|,
    with the bound ||m0||_inf^2.

    ||f||_1 is taken on the fiber grid of the root-sum oracle, so the computed ratio never exceeds the bound.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    n = filter.scale
    coarse = circle_grid(grid_size)
    fine = circle_grid(n * grid_size)
    weight = np.abs(values_at(filter.m0, fine)) ** 2
    dense_max = float(np.max(np.abs(sample(filter.m0, 8 * n * grid_size)) ** 2))
    bound = max(float(np.max(weight)), dense_max)

    def ratio(f: LaurentPoly) -> float:
        mass = float(np.mean(np.abs(values_at(f, fine))))
        if mass == 0.0:
            return 0.0
        pushed = np.asarray(apply_ruelle_pointwise(filter, f, coarse))
        return float(np.mean(np.abs(pushed))) / mass

    rng = make_rng(seed)
    best = 0.0
    for _ in range(trials):
        coeffs = rng.standard_normal(13) + 1j * rng.standard_normal(13)
        best = max(best, ratio(LaurentPoly(-6, coeffs)))
    peak = float(fine[int(np.argmax(weight))])
    for order in (spike_order, 4 * spike_order):
        best = max(best, ratio(fejer_spike(peak, order)))
    return L1Witness(ratio=best, bound=bound)
