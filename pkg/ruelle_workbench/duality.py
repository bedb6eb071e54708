"""
Scale-N against scale-p duality for coprime N and p: orbits of j -> N j on Z_p, the splitting of fixed vectors of
the upsampled filter m0(z^p) into components z^k H_k(z^p), and dimension against orbit-count checks.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import ContractViolation, NotHarmonicError
from .laurent import FilterSpec, LaurentPoly, compose_power, distance
from .transfer import apply_ruelle, fixed_space, orthonormal_columns

logger = logging.getLogger(__name__)

FIXED_VECTOR_TOL = 1e-8
SPAN_TOL = 1e-8


def _require_coprime(n: int, p: int) -> None:
    if p < 1:
        raise ContractViolation(f"p must be positive, got {p}")
    if math.gcd(n, p) != 1:
        raise ContractViolation(f"N = {n} and p = {p} are not coprime")


@dataclass(frozen=True)
class OrbitDecomposition:
    scale: int
    p: int
    orbits: List[List[int]]

    @property
    def periods(self) -> List[int]:
        return [len(orbit) for orbit in self.orbits]

    @property
    def count(self) -> int:
        return len(self.orbits)


def orbits(n: int, p: int) -> OrbitDecomposition:
    """
    Cycles of j -> N j mod p on {0, .., p-1}, starting each cycle at the smallest unvisited j
    """
    _require_coprime(n, p)
    visited = [False] * p
    cycles: List[List[int]] = []
    for j in range(p):
        if visited[j]:
            continue
        cycle = []
        current = j
        while not visited[current]:
            visited[current] = True
            cycle.append(current)
            current = (n * current) % p
        cycles.append(cycle)
    return OrbitDecomposition(scale=n, p=p, orbits=cycles)


def orbit_period(n: int, p: int, j: int) -> int:
    _require_coprime(n, p)
    start = j % p
    current, period = (n * start) % p, 1
    while current != start:
        current, period = (n * current) % p, period + 1
    return period


def multiplicative_order(a: int, m: int) -> int:
    """
    The smallest e >= 1 with a^e = 1 mod m (1 when m = 1)
    """
    if m == 1:
        return 1
    if math.gcd(a, m) != 1:
        raise ValueError(f"{a} is not invertible modulo {m}")
    value, order = a % m, 1
    while value != 1:
        value, order = (value * a) % m, order + 1
    return order


def symmetrize(f: LaurentPoly, p: int, k: int) -> Tuple[LaurentPoly, LaurentPoly]:
    """
    Returns (F_k, H_k) with F_k the part of f on exponents congruent to k mod p and F_k(z) = z^k H_k(z^p).

    k is an integer index, not a residue: H_k~(m) = f~(k + p m), so H_{k+p}(u) = u^-1 H_k(u).
    """
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    part = {}
    compressed = {}
    for exponent, value in f.terms():
        if (exponent - k) % p == 0:
            part[exponent] = value
            compressed[(exponent - k) // p] = value
    return LaurentPoly.from_dict(part), LaurentPoly.from_dict(compressed)


def upsampled(base: FilterSpec, p: int) -> FilterSpec:
    """
    The filter m0(z^p) at the same scale
    """
    return FilterSpec(scale=base.scale, m0=compose_power(base.m0, p))


def _require_fixed_vector(base: FilterSpec, f: LaurentPoly, p: int) -> None:
    residual = (apply_ruelle(upsampled(base, p), f) - f).norm2()
    if residual > FIXED_VECTOR_TOL:
        raise NotHarmonicError(f"f is not fixed by the upsampled Ruelle operator (residual {residual:.3e})")


def intertwine_residual(base: FilterSpec, f: LaurentPoly, p: int, k: int) -> float:
    """
    Coefficient sup norm of R0(H_{N k}) - H_k, H taken at the integer index N k (the twisted form)
    """
    _require_coprime(base.scale, p)
    _require_fixed_vector(base, f, p)
    _, target = symmetrize(f, p, k)
    _, source = symmetrize(f, p, base.scale * k)
    return distance(apply_ruelle(base, source), target)


def literal_intertwine_residual(base: FilterSpec, f: LaurentPoly, p: int, k: int) -> float:
    """
    The same comparison with the index N k reduced mod p and no monomial twist; nonzero in general
    """
    _require_coprime(base.scale, p)
    _require_fixed_vector(base, f, p)
    _, target = symmetrize(f, p, k)
    _, source = symmetrize(f, p, (base.scale * k) % p)
    return distance(apply_ruelle(base, source), target)


def _projection_residual(source: np.ndarray, onto: np.ndarray) -> float:
    if source.shape[1] == 0:
        return 0.0
    leftover = source - onto @ (np.conj(onto.T) @ source)
    return float(np.max(np.linalg.norm(leftover, axis=0)))


@dataclass(frozen=True)
class ReciprocityReport:
    holds: bool
    invariant_dimension: int
    lifted_dimension: int
    forward_residual: float
    backward_residual: float


def reciprocity_check(base: FilterSpec, p: int) -> ReciprocityReport:
    """
    Compares the rotation-invariant part of the upsampled fixed space with the base fixed space composed with z^p
    """
    _require_coprime(base.scale, p)
    invariant_parts = [symmetrize(v, p, 0)[0] for v in fixed_space(upsampled(base, p)).basis]
    lifted = [compose_power(h, p) for h in fixed_space(base).basis]
    vectors = invariant_parts + lifted
    size = max([max(abs(v.lo), abs(v.hi)) for v in vectors] + [0])
    invariant = orthonormal_columns(invariant_parts, size)
    lifted_span = orthonormal_columns(lifted, size)
    forward = _projection_residual(invariant, lifted_span)
    backward = _projection_residual(lifted_span, invariant)
    holds = invariant.shape[1] == lifted_span.shape[1] and max(forward, backward) < SPAN_TOL
    return ReciprocityReport(
        holds=holds,
        invariant_dimension=invariant.shape[1],
        lifted_dimension=lifted_span.shape[1],
        forward_residual=forward,
        backward_residual=backward,
    )


@dataclass(frozen=True)
class DimensionComparison:
    dimension: int
    orbit_count: int
    equal: Optional[bool]
    base_pure: bool


def dimension_vs_orbits(base: FilterSpec, p: int) -> DimensionComparison:
    """
    Compares dim {f : R_p f = f} with the number of orbits of j -> N j on Z_p.

    The comparison is only meaningful for a pure base filter; otherwise `equal` is None.
    """
    decomposition = orbits(base.scale, p)
    dimension = fixed_space(upsampled(base, p)).dimension
    base_pure = fixed_space(base).pure
    if not base_pure:
        logger.warning("base filter is not pure; dimension %d is reported without comparison", dimension)
        return DimensionComparison(dimension, decomposition.count, None, False)
    return DimensionComparison(dimension, decomposition.count, dimension == decomposition.count, True)
