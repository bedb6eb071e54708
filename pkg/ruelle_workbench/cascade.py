"""
The cascade refinement operator (M phi)(x) = sqrt(N) * sum_k a_k phi(Nx - k) on piecewise-constant functions of an
N-adic grid, correlation densities H(phi, psi) and the Mallat partial products.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import ContractViolation
from .laurent import FilterSpec, LaurentPoly, add, distance, evaluate
from .transfer import HarmonicDensity, apply_ruelle

logger = logging.getLogger(__name__)

LEVEL_CAP = 20
DIVERGENCE_BOUND = 1e6
MALLAT_POINTS_PER_BAND = 4096


@dataclass(frozen=True)
class GridFunction:
    """
    A function constant on the cells [(start + t) / N^level, (start + t + 1) / N^level), t = 0..len(values)-1,
    and zero elsewhere
    """

    scale: int
    level: int
    start: int
    values: np.ndarray

    @classmethod
    def indicator(
        cls, left: int, right: int, scale: int, height: complex = 1.0, level: int = 0
    ) -> "GridFunction":
        """
        height * chi_[left, right) for integers left < right, sampled at the given level
        """
        if right <= left:
            raise ValueError(f"Empty interval [{left}, {right})")
        cells = scale ** level
        values = np.full((right - left) * cells, height, dtype=np.complex128)
        return cls(scale=scale, level=level, start=left * cells, values=values)

    @property
    def cell_width(self) -> float:
        return float(self.scale) ** (-self.level)

    @property
    def x0(self) -> Fraction:
        return Fraction(self.start, self.scale ** self.level)

    def integral(self) -> complex:
        return complex(np.sum(self.values)) * self.cell_width

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def l2_norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.cell_width)

    def scaled(self, factor: complex) -> "GridFunction":
        return GridFunction(self.scale, self.level, self.start, self.values * factor)


def refine(phi: GridFunction, level: int) -> GridFunction:
    """
    Re-samples phi at a finer level by duplicating every cell value
    """
    if level < phi.level:
        raise ValueError(f"Cannot refine level {phi.level} down to {level}")
    repeat = phi.scale ** (level - phi.level)
    return GridFunction(phi.scale, level, phi.start * repeat, np.repeat(phi.values, repeat))


def align(phi: GridFunction, psi: GridFunction) -> Tuple[GridFunction, GridFunction]:
    if phi.scale != psi.scale:
        raise ContractViolation(f"Grid functions have different scales {phi.scale} and {psi.scale}")
    level = max(phi.level, psi.level)
    return refine(phi, level), refine(psi, level)


def _on_common_support(phi: GridFunction, psi: GridFunction) -> Tuple[np.ndarray, np.ndarray]:
    first = min(phi.start, psi.start)
    last = max(phi.start + phi.values.size, psi.start + psi.values.size)
    left = np.zeros(last - first, dtype=np.complex128)
    right = np.zeros(last - first, dtype=np.complex128)
    left[phi.start - first : phi.start - first + phi.values.size] = phi.values
    right[psi.start - first : psi.start - first + psi.values.size] = psi.values
    return left, right


def cascade_step(filter: FilterSpec, phi: GridFunction) -> GridFunction:
    """
    Applies M once. The result lives at level j + 1, where new[u] = sqrt(N) * sum_k a_k phi[u - k N^j] exactly.
    """
    if phi.scale != filter.scale:
        raise ContractViolation(f"Grid scale {phi.scale} does not match filter scale {filter.scale}")
    m0 = filter.m0
    stride = phi.scale ** phi.level
    length = phi.values.size + (m0.hi - m0.lo) * stride
    values = np.zeros(length, dtype=np.complex128)
    for k, a_k in zip(m0.exponents, m0.coeffs):
        if a_k == 0:
            continue
        offset = (int(k) - m0.lo) * stride
        values[offset : offset + phi.values.size] += math.sqrt(phi.scale) * a_k * phi.values
    return GridFunction(phi.scale, phi.level + 1, phi.start + m0.lo * stride, values)


def refinement_residual(filter: FilterSpec, phi: GridFunction) -> float:
    """
    Sup norm of phi - M phi once both sit on the same level
    """
    left, right = _on_common_support(*align(phi, cascade_step(filter, phi)))
    return float(np.max(np.abs(left - right)))


@dataclass(frozen=True)
class CascadeRun:
    phi: GridFunction
    iterations: int
    capped: bool
    diverged: bool


def cascade_iterate(filter: FilterSpec, phi0: GridFunction, iterations: int) -> CascadeRun:
    """
    Iterates M from phi0, normalized so that the integral of phi is 1 whenever it is nonzero.

    Stops early at level 20 or when the sup norm exceeds 1e6.
    """
    total = phi0.integral()
    phi = phi0.scaled(1.0 / total) if abs(total) > 1e-12 else phi0
    done = 0
    while done < iterations:
        if phi.level >= LEVEL_CAP:
            logger.info("cascade stopped at level cap %d after %d iterations", LEVEL_CAP, done)
            return CascadeRun(phi=phi, iterations=done, capped=True, diverged=False)
        phi = cascade_step(filter, phi)
        done += 1
        if phi.sup_norm() > DIVERGENCE_BOUND:
            logger.warning("cascade diverged after %d iterations (sup norm %.3e)", done, phi.sup_norm())
            return CascadeRun(phi=phi, iterations=done, capped=False, diverged=True)
    return CascadeRun(phi=phi, iterations=done, capped=False, diverged=False)


def correlation_density(phi: GridFunction, psi: GridFunction) -> LaurentPoly:
    """
    H(phi, psi)(z) = sum_n z^n <pi(e_n) phi, psi> with (pi(e_n) phi)(x) = phi(x - n).

    The inner product is conjugate linear in its first slot, so coefficient n is
    N^-j * sum_u conj(phi[u - n N^j]) psi[u]; piecewise-constant quadrature makes this exact.
    """
    phi, psi = align(phi, psi)
    stride = phi.scale ** phi.level
    # numpy conjugates its second argument: corr[i] = sum_s psi[s + i - (len(phi) - 1)] conj(phi[s])
    corr = np.correlate(psi.values, phi.values, mode="full")
    shifts = psi.start - phi.start + np.arange(corr.size) - (phi.values.size - 1)
    terms = {}
    for shift, value in zip(shifts, corr):
        if shift % stride == 0 and value != 0:
            terms[int(shift // stride)] = value * phi.cell_width
    return LaurentPoly.from_dict(terms)


def direct_sum_correlation(functions: Iterable[GridFunction]) -> LaurentPoly:
    """
    sum_i H(phi_i, phi_i), the correlation density of a vector of scaling functions
    """
    total = LaurentPoly.zero()
    for phi in functions:
        total = add(total, correlation_density(phi, phi))
    return total


def transfer_intertwine_residual(filter: FilterSpec, phi: GridFunction, psi: GridFunction) -> float:
    """
    Coefficient sup norm of R(H(phi, psi)) - H(M phi, M psi)
    """
    lhs = apply_ruelle(filter, correlation_density(phi, psi))
    rhs = correlation_density(cascade_step(filter, phi), cascade_step(filter, psi))
    return distance(lhs, rhs)


@dataclass(frozen=True)
class MallatSample:
    omega: np.ndarray
    values: np.ndarray
    norm: float
    norm_squared: float


def mallat_partial(
    filter: FilterSpec,
    n: int,
    h: Optional[Union[HarmonicDensity, LaurentPoly]] = None,
    points_per_band: int = MALLAT_POINTS_PER_BAND,
) -> MallatSample:
    """
    Samples F_n(omega) = chi(omega / N^n) h(omega / N^n)^(1/2) prod_{k=1..n} m0(omega / N^k) / sqrt(N) on
    [-pi N^n, pi N^n], chi being the indicator of [-pi, pi).

    The L2 norm carries the 1/(2 pi) normalization and uses the composite trapezoid rule; the integrand is
    periodic over the window, so the rule converges spectrally.
    """
    if n < 1:
        raise ValueError(f"mallat_partial needs n >= 1, got {n}")
    span = filter.scale ** n
    omega = np.linspace(-np.pi * span, np.pi * span, points_per_band * span + 1)
    values = np.ones(omega.shape, dtype=np.complex128)
    for k in range(1, n + 1):
        values *= np.asarray(evaluate(filter.m0, omega / filter.scale ** k)) / math.sqrt(filter.scale)
    if h is not None:
        density = h.h if isinstance(h, HarmonicDensity) else h
        weight = np.asarray(evaluate(density, omega / span)).real
        if float(np.min(weight)) < -1e-9:
            raise ContractViolation("mallat_partial needs h >= 0")
        values *= np.sqrt(np.maximum(weight, 0.0))
    norm_squared = float(trapezoid(np.abs(values) ** 2, omega)) / (2.0 * np.pi)
    return MallatSample(omega=omega, values=values, norm=math.sqrt(norm_squared), norm_squared=norm_squared)


def grid_rows(phi: GridFunction) -> List[Tuple[float, float, float]]:
    """
    (x, re, im) rows at the left end of every cell, for CSV export
    """
    width = phi.cell_width
    return [
        (float((phi.start + t) * width), float(value.real), float(value.imag))
        for t, value in enumerate(phi.values)
    ]


def box_functions(count: int, scale: int, height: complex) -> Sequence[GridFunction]:
    """
    height * chi_[i, i+1) for i = 0..count-1
    """
    return [GridFunction.indicator(i, i + 1, scale, height) for i in range(count)]
