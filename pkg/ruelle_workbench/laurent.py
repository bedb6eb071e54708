"""
Laurent (two-sided trigonometric) polynomials on the circle.

A `LaurentPoly` stores the coefficients of f(z) = sum_k a_k z^k for k in [lo, lo + len - 1]. Points of the
circle are parametrized by z = exp(-i*omega) everywhere in this package.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

TRIM_TOL = 1e-14
HERMITIAN_TOL = 1e-12

ComplexLike = Union[complex, float, int]
Omega = Union[float, np.ndarray]


class LaurentPoly:
    """
    An immutable, finitely supported two-sided complex coefficient sequence.

    Leading and trailing coefficients with modulus <= 1e-14 are trimmed on construction. The zero
    polynomial has the canonical form lo=0, coeffs=[0].
    """

    __slots__ = ("_lo", "_coeffs")

    def __init__(self, lo: int, coeffs: Union[Sequence[ComplexLike], np.ndarray]) -> None:
        values = np.array(coeffs, dtype=np.complex128).reshape(-1)
        if values.size == 0:
            raise ValueError("LaurentPoly needs at least one coefficient")
        if not np.all(np.isfinite(values)):
            raise ValueError("LaurentPoly coefficients must be finite")
        keep = np.flatnonzero(np.abs(values) > TRIM_TOL)
        if keep.size == 0:
            lo, values = 0, np.zeros(1, dtype=np.complex128)
        else:
            lo, values = int(lo) + int(keep[0]), values[keep[0] : keep[-1] + 1].copy()
        values.setflags(write=False)
        self._lo = lo
        self._coeffs = values

    @classmethod
    def constant(cls, value: ComplexLike) -> "LaurentPoly":
        return cls(0, [value])

    @classmethod
    def monomial(cls, n: int, value: ComplexLike = 1.0) -> "LaurentPoly":
        """
        The function value * z^n, written e_n in the docs when value is 1
        """
        return cls(n, [value])

    @classmethod
    def from_dict(cls, terms: Dict[int, ComplexLike]) -> "LaurentPoly":
        if not terms:
            return cls.zero()
        lo, hi = min(terms), max(terms)
        values = np.zeros(hi - lo + 1, dtype=np.complex128)
        for exponent, value in terms.items():
            values[exponent - lo] += value
        return cls(lo, values)

    @classmethod
    def from_window(cls, vector: np.ndarray, window: int) -> "LaurentPoly":
        """
        Builds a polynomial from a coefficient vector indexed by the exponents -window..window
        """
        return cls(-window, vector)

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls(0, [0.0])

    @property
    def lo(self) -> int:
        return self._lo

    @property
    def hi(self) -> int:
        return self._lo + self._coeffs.size - 1

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def is_zero(self) -> bool:
        return self._coeffs.size == 1 and self._coeffs[0] == 0

    def coefficient(self, k: int) -> complex:
        if self.lo <= k <= self.hi:
            return complex(self._coeffs[k - self.lo])
        return 0j

    def window(self, size: int) -> np.ndarray:
        """
        The coefficient vector over exponents -size..size; the support must fit inside the window
        """
        if not self.is_zero() and (self.lo < -size or self.hi > size):
            raise ValueError(f"Support [{self.lo}, {self.hi}] does not fit in window {size}")
        vector = np.zeros(2 * size + 1, dtype=np.complex128)
        if not self.is_zero():
            vector[self.lo + size : self.hi + size + 1] = self._coeffs
        return vector

    def terms(self) -> List[Tuple[int, complex]]:
        return [(int(k), complex(c)) for k, c in zip(self.exponents, self._coeffs) if c != 0]

    def norm2(self) -> float:
        """
        The l2 norm of the coefficient sequence (equal to the L2 norm on the circle)
        """
        return float(np.linalg.norm(self._coeffs))

    def max_abs_coefficient(self) -> float:
        return float(np.max(np.abs(self._coeffs)))

    def scale(self, factor: ComplexLike) -> "LaurentPoly":
        return LaurentPoly(self.lo, self._coeffs * factor)

    def __call__(self, omega: Omega) -> Union[complex, np.ndarray]:
        return evaluate(self, omega)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        return add(self, other)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return add(self, other.scale(-1.0))

    def __neg__(self) -> "LaurentPoly":
        return self.scale(-1.0)

    def __mul__(self, other: Union["LaurentPoly", complex, float, int]) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.lo == other.lo and np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self) -> int:
        return hash((self.lo, self._coeffs.tobytes()))

    def allclose(self, other: "LaurentPoly", atol: float = 1e-12) -> bool:
        return distance(self, other) <= atol

    def __repr__(self) -> str:
        return f"LaurentPoly(lo={self.lo}, coeffs={self._coeffs.tolist()!r})"


@dataclass(frozen=True)
class FilterSpec:
    """
    A scale-N filter m0.

    `quadrature` and `lowpass` stay False until `transfer.validate_filter` has checked them.
    """

    scale: int
    m0: LaurentPoly
    quadrature: bool = False
    lowpass: bool = False

    def __post_init__(self) -> None:
        if self.scale < 2:
            raise ValueError(f"Filter scale must be at least 2, got {self.scale}")


def add(f: LaurentPoly, g: LaurentPoly) -> LaurentPoly:
    lo = min(f.lo, g.lo)
    hi = max(f.hi, g.hi)
    values = np.zeros(hi - lo + 1, dtype=np.complex128)
    values[f.lo - lo : f.hi - lo + 1] += f.coeffs
    values[g.lo - lo : g.hi - lo + 1] += g.coeffs
    return LaurentPoly(lo, values)


def mul(f: LaurentPoly, g: LaurentPoly) -> LaurentPoly:
    return LaurentPoly(f.lo + g.lo, np.convolve(f.coeffs, g.coeffs))


def conj_reflect(f: LaurentPoly) -> LaurentPoly:
    """
    The function z -> conj(f(z)) on the circle: coefficients conjugated, exponents negated
    """
    return LaurentPoly(-f.hi, np.conj(f.coeffs[::-1]))


def autocorrelation(m: LaurentPoly) -> LaurentPoly:
    """
    Returns m * conj_reflect(m), the trigonometric polynomial |m(z)|^2
    """
    return mul(m, conj_reflect(m))


def compose_power(f: LaurentPoly, p: int) -> LaurentPoly:
    """
    Returns f(z^p), i.e. the exponents of f dilated by p
    """
    if p < 1:
        raise ValueError(f"compose_power needs p >= 1, got {p}")
    if p == 1 or f.is_zero():
        return f
    values = np.zeros((f.coeffs.size - 1) * p + 1, dtype=np.complex128)
    values[::p] = f.coeffs
    return LaurentPoly(f.lo * p, values)


def downsample_average(f: LaurentPoly, n: int) -> LaurentPoly:
    """
    Returns g with g~(k) = f~(Nk), which is (1/N) * sum over w^N = z of f(w)
    """
    if n < 2:
        raise ValueError(f"downsample_average needs N >= 2, got {n}")
    first = -(-f.lo // n)
    last = f.hi // n
    if first > last:
        return LaurentPoly.zero()
    indices = np.arange(first, last + 1) * n - f.lo
    return LaurentPoly(first, f.coeffs[indices])


def root_of_unity_power(r: int, p: int) -> complex:
    """
    exp(2*pi*i*r/p), exact at multiples of a quarter turn
    """
    r %= p
    if (4 * r) % p == 0:
        return (1.0 + 0j, 1j, -1.0 + 0j, -1j)[(4 * r) // p]
    return complex(np.exp(2j * np.pi * r / p))


def rotate(f: LaurentPoly, j: int, p: int) -> LaurentPoly:
    """
    Returns z -> f(rho^j z) with rho = exp(2*pi*i/p), so that g~(n) = f~(n) * rho^(j*n)
    """
    if p < 1:
        raise ValueError(f"rotate needs p >= 1, got {p}")
    phases = np.array([root_of_unity_power(j * int(n), p) for n in f.exponents])
    return LaurentPoly(f.lo, f.coeffs * phases)


def evaluate(f: LaurentPoly, omega: Omega) -> Union[complex, np.ndarray]:
    """
    f at z = exp(-i*omega); accepts a scalar or an array of angles
    """
    angles = np.asarray(omega, dtype=np.float64)
    powers = np.exp(-1j * np.multiply.outer(angles, f.exponents.astype(np.float64)))
    values = powers @ f.coeffs
    if np.ndim(values) == 0:
        return complex(values)
    return values


def evaluate_at(f: LaurentPoly, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """
    f at arbitrary nonzero complex points z (used for root fibers w^N = z)
    """
    points = np.asarray(z, dtype=np.complex128)
    powers = np.power.outer(points, f.exponents.astype(np.float64))
    values = powers @ f.coeffs
    if np.ndim(values) == 0:
        return complex(values)
    return values


def haar_integral(f: LaurentPoly) -> complex:
    """
    Integral of f against normalized Haar measure on the circle, i.e. the constant coefficient
    """
    return f.coefficient(0)


def circle_grid(grid_size: int) -> np.ndarray:
    """
    The uniform angle grid 2*pi*j/grid_size, j = 0..grid_size-1
    """
    if grid_size < 1:
        raise ValueError(f"grid_size must be positive, got {grid_size}")
    return 2.0 * np.pi * np.arange(grid_size) / grid_size


def sample(f: LaurentPoly, grid_size: int) -> np.ndarray:
    return np.asarray(evaluate(f, circle_grid(grid_size)))


def is_hermitian(f: LaurentPoly, tol: float = HERMITIAN_TOL) -> bool:
    """
    True when f~(-k) = conj(f~(k)) for all k, i.e. f is real valued on the circle
    """
    return distance(f, conj_reflect(f)) <= tol * max(1.0, f.max_abs_coefficient())


def is_real_nonneg(f: LaurentPoly, grid_size: int = 256, tol: float = 1e-9) -> bool:
    if not is_hermitian(f):
        return False
    return float(np.min(sample(f, grid_size).real)) >= -tol


def distance(f: LaurentPoly, g: LaurentPoly) -> float:
    """
    Sup norm of the coefficient difference
    """
    return (f - g).max_abs_coefficient()


def linear_combination(terms: Iterable[Tuple[ComplexLike, LaurentPoly]]) -> LaurentPoly:
    total = LaurentPoly.zero()
    for weight, poly in terms:
        total = add(total, poly.scale(weight))
    return total
