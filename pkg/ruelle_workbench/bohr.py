"""
Moment kernels on the N-adic rationals Z[1/N].

L(n / N^k) = integral of R^k(e_n h) over the circle is well defined on equivalence classes exactly when R(h) = h;
positive definiteness of L is checked on finite sets of N-adic rationals through Gram matrices.
"""
import logging
import math
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh

from .exceptions import ContractViolation, NotHarmonicError
from .laurent import FilterSpec, LaurentPoly, circle_grid, conj_reflect, evaluate, haar_integral, mul
from .transfer import (
    HarmonicDensity,
    apply_ruelle,
    apply_ruelle_power,
    filter_power,
    moment,
    values_at,
)

logger = logging.getLogger(__name__)

HARMONIC_TOL = 1e-8
HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
KEANE_GRID = 8192

Density = Union[HarmonicDensity, LaurentPoly]


def _poly(h: Density) -> LaurentPoly:
    return h.h if isinstance(h, HarmonicDensity) else h


@dataclass(frozen=True)
class NadicRational:
    """
    n / N^k in canonical form: k = 0 or N does not divide n
    """

    scale: int
    numerator: int
    depth: int

    def __post_init__(self) -> None:
        if self.scale < 2:
            raise ValueError(f"scale must be at least 2, got {self.scale}")
        if self.depth < 0:
            raise ValueError(f"depth must be nonnegative, got {self.depth}")
        if self.depth > 0 and self.numerator % self.scale == 0:
            raise ValueError(f"{self.numerator}/{self.scale}^{self.depth} is not canonical; use canonicalize")

    @property
    def value(self) -> float:
        return self.numerator / self.scale ** self.depth

    def _at_depth(self, depth: int) -> int:
        return self.numerator * self.scale ** (depth - self.depth)

    def _check_scale(self, other: "NadicRational") -> None:
        if other.scale != self.scale:
            raise ValueError(f"Cannot combine scales {self.scale} and {other.scale}")

    def __add__(self, other: "NadicRational") -> "NadicRational":
        self._check_scale(other)
        depth = max(self.depth, other.depth)
        return canonicalize(self._at_depth(depth) + other._at_depth(depth), depth, self.scale)

    def __neg__(self) -> "NadicRational":
        return NadicRational(self.scale, -self.numerator, self.depth)

    def __sub__(self, other: "NadicRational") -> "NadicRational":
        return self + (-other)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.scale}^{self.depth}"


def canonicalize(n: int, k: int, scale: int) -> NadicRational:
    if k < 0:
        raise ValueError(f"depth must be nonnegative, got {k}")
    if n == 0:
        return NadicRational(scale, 0, 0)
    while k > 0 and n % scale == 0:
        n //= scale
        k -= 1
    return NadicRational(scale, n, k)


def nadic_grid(scale: int, nmax: int, kmax: int) -> List[NadicRational]:
    """
    The distinct values n / N^k with |n| <= nmax and 0 <= k <= kmax, in increasing order
    """
    points = {canonicalize(n, k, scale) for n in range(-nmax, nmax + 1) for k in range(kmax + 1)}
    return sorted(points, key=lambda point: point.value)


class MomentKernel:
    """
    L(n / N^k) = integral of R^k(e_n h) for a fixed vector h of the Ruelle operator.

    Values are cached by canonical representative; the cache is shared between threads.
    """

    def __init__(self, filter: FilterSpec, h: Density) -> None:
        self.filter = filter
        self.h = _poly(h)
        residual = (apply_ruelle(filter, self.h) - self.h).norm2()
        if residual > HARMONIC_TOL:
            raise NotHarmonicError(f"L is not well defined: R(h) - h has norm {residual:.3e}")
        self._cache: Dict[NadicRational, complex] = {}
        self._lock = threading.Lock()

    def raw_value(self, n: int, k: int) -> complex:
        """
        Evaluates at the representative n / N^k without canonicalizing first
        """
        pushed = apply_ruelle_power(self.filter, mul(LaurentPoly.monomial(n), self.h), k)
        return haar_integral(pushed)

    def value(self, point: NadicRational) -> complex:
        if point.scale != self.filter.scale:
            raise ValueError(f"Point of scale {point.scale} given to a scale-{self.filter.scale} kernel")
        with self._lock:
            cached = self._cache.get(point)
        if cached is not None:
            return cached
        result = self.raw_value(point.numerator, point.depth)
        with self._lock:
            self._cache[point] = result
        return result

    def consistency_residual(self, n: int, k: int, extra: int) -> float:
        """
        |L(n N^extra / N^(k + extra)) - L(n / N^k)| computed along both paths
        """
        scale = self.filter.scale
        return abs(self.raw_value(n * scale ** extra, k + extra) - self.value(canonicalize(n, k, scale)))


class DeltaKernel:
    """
    The kernel of Haar measure on the dual group: 1 at 0 and 0 elsewhere
    """

    def __init__(self, scale: int) -> None:
        self.scale = scale

    def value(self, point: NadicRational) -> complex:
        return 1.0 + 0j if point.numerator == 0 else 0j


class TableKernel:
    """
    A kernel with some values overridden; each override at lambda also sets -lambda to the conjugate
    """

    def __init__(self, base: Union[MomentKernel, DeltaKernel], overrides: Dict[NadicRational, complex]) -> None:
        self.base = base
        self.overrides: Dict[NadicRational, complex] = {}
        for point, value in overrides.items():
            self.overrides[point] = complex(value)
            self.overrides[-point] = complex(value).conjugate()

    def value(self, point: NadicRational) -> complex:
        if point in self.overrides:
            return self.overrides[point]
        return self.base.value(point)


Kernel = Union[MomentKernel, DeltaKernel, TableKernel]


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: Optional[float]
    passed: bool
    hermitian_discrepancy: float
    size: int


def _psd_report(gram: np.ndarray) -> PsdReport:
    if gram.size == 0:
        return PsdReport(min_eigenvalue=None, passed=True, hermitian_discrepancy=0.0, size=0)
    discrepancy = float(np.max(np.abs(gram - np.conj(gram.T))))
    if discrepancy > HERMITIAN_TOL:
        raise ContractViolation(f"Gram matrix is not Hermitian (discrepancy {discrepancy:.3e})")
    smallest = float(eigvalsh(0.5 * (gram + np.conj(gram.T)))[0])
    return PsdReport(
        min_eigenvalue=smallest, passed=smallest >= -PSD_TOL, hermitian_discrepancy=discrepancy, size=gram.shape[0]
    )


def kernel_gram(kernel: Kernel, points: Sequence[NadicRational]) -> np.ndarray:
    """
    G[i, j] = L(lambda_j - lambda_i)
    """
    gram = np.zeros((len(points), len(points)), dtype=np.complex128)
    for i, left in enumerate(points):
        for j, right in enumerate(points):
            gram[i, j] = kernel.value(right - left)
    return gram


def psd_check(kernel: Kernel, points: Sequence[NadicRational]) -> PsdReport:
    report = _psd_report(kernel_gram(kernel, points))
    logger.debug("psd check on %d points: min eigenvalue %s", report.size, report.min_eigenvalue)
    return report


def default_gram_index(nmax: int = 3, jmax: int = 3) -> List[Tuple[int, int]]:
    return [(n, j) for n in range(nmax + 1) for j in range(-jmax, jmax + 1)]


@dataclass(frozen=True)
class GramReport:
    matrix: np.ndarray
    psd: PsdReport


def gns_gram(
    filter: FilterSpec, h: Density, index: Sequence[Tuple[int, int]], h_q: Optional[Density] = None
) -> GramReport:
    """
    Inner products <U^-n1 pi(e_j1) phi, U^-n2 pi(e_j2) phi> for index pairs (n, j), computed against the fixed
    vector h_q (h when omitted).

    With d = |n2 - n1|, the n2 >= n1 entries are integrals of conj(e_j1(z^(N^d))) e_j2 conj(m0^(d)) h_q and the
    n2 < n1 entries integrals of conj(e_j1) e_j2(z^(N^d)) m0^(d) h_q.
    """
    weight = _poly(h if h_q is None else h_q)
    residual = (apply_ruelle(filter, weight) - weight).norm2()
    if residual > HARMONIC_TOL:
        raise NotHarmonicError(f"Gram weight is not a fixed vector (residual {residual:.3e})")
    scale = filter.scale
    powers: Dict[int, LaurentPoly] = {}
    gram = np.zeros((len(index), len(index)), dtype=np.complex128)
    for a, (n1, j1) in enumerate(index):
        for b, (n2, j2) in enumerate(index):
            d = abs(n2 - n1)
            if d not in powers:
                powers[d] = filter_power(filter, d)
            if n2 >= n1:
                left = conj_reflect(LaurentPoly.monomial(j1 * scale ** d))
                integrand = left * LaurentPoly.monomial(j2) * conj_reflect(powers[d])
            else:
                left = conj_reflect(LaurentPoly.monomial(j1))
                integrand = left * LaurentPoly.monomial(j2 * scale ** d) * powers[d]
            gram[a, b] = haar_integral(integrand * weight)
    return GramReport(matrix=gram, psd=_psd_report(gram))


@dataclass(frozen=True)
class DominationReport:
    constant: float
    nonnegative: bool
    dominated: bool


def domination_check(h_q: Density, h: Density, grid_size: int = 1024, tol: float = 1e-9) -> DominationReport:
    """
    The smallest c with h_q <= c h on the grid, and whether 0 <= h_q holds there
    """
    omega = circle_grid(grid_size)
    upper = np.asarray(evaluate(_poly(h_q), omega)).real
    lower = np.asarray(evaluate(_poly(h), omega)).real
    positive = lower > tol
    constant = float(np.max(upper[positive] / lower[positive])) if np.any(positive) else math.inf
    dominated = bool(np.all(upper[~positive] <= tol)) and math.isfinite(constant)
    return DominationReport(constant=max(constant, 0.0), nonnegative=bool(np.min(upper) >= -tol), dominated=dominated)


def _grid_mean(values: np.ndarray) -> complex:
    return complex(np.mean(values))


def keane_moment(filter: FilterSpec, h: Density, n: int, f: LaurentPoly, grid_size: int = KEANE_GRID) -> complex:
    """
    N^(n/2) times the integral of f sqrt(g^(n)) h with g = |m0|^2 / N, i.e. the integral of f |m0^(n)| h.

    |m0^(n)| is not a polynomial, so the integral uses the grid mean.
    """
    omega = circle_grid(grid_size)
    modulus = np.abs(values_at(filter_power(filter, n), omega))
    return _grid_mean(values_at(f, omega) * modulus * values_at(_poly(h), omega))


def keane_mixed_moment(
    filter: FilterSpec, h: Density, k: int, n: int, f: LaurentPoly, grid_size: int = KEANE_GRID
) -> complex:
    """
    The integral of |m0^(n-k)| R^k(f h)
    """
    if not 0 <= k <= n:
        raise ContractViolation(f"keane_mixed_moment needs 0 <= k <= n, got k={k}, n={n}")
    omega = circle_grid(grid_size)
    pushed = apply_ruelle_power(filter, mul(f, _poly(h)), k)
    modulus = np.abs(values_at(filter_power(filter, n - k), omega))
    return _grid_mean(modulus * values_at(pushed, omega))


def phase_discrepancy(filter: FilterSpec, h: Density, n: int, f: LaurentPoly, grid_size: int = KEANE_GRID) -> float:
    """
    |keane_moment - moment| for k = 0; zero when m0 >= 0 on the circle
    """
    return abs(keane_moment(filter, h, n, f, grid_size) - moment(filter, h, 0, n, f))
