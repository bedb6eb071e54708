"""
Transfer operators (R_g f)(x) = sum over T y = x of g(y) f(y) for N-to-1 maps.

Three kinds of systems share the same `degree` / `forward` / `branches` surface:

* `JuliaSystem`: a monic real polynomial restricted to its real Julia interval [a, b];
* `CircleMap`: z -> z^N on the circle, in angle coordinates (z = exp(-i*omega));
* `MarkovMap`: a piecewise expanding Markov map of [0, 1], with the 1/|T'| operator and Ulam discretization.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .enums import JuliaCase, ReferenceMeasure
from .exceptions import ContractViolation, ConvergenceError, JuliaIntervalError, NotMarkovError
from .laurent import FilterSpec, LaurentPoly, autocorrelation, compose_power, downsample_average, haar_integral
from .rng import make_rng
from .settings import get_settings
from .transfer import FunctionLike, apply_ruelle, root_fiber, values_at

logger = logging.getLogger(__name__)

CASE_TOL = 1e-8
WEIGHT_TOL = 1e-9
CYCLE_TOL = 1e-10
MARKOV_TOL = 1e-10
BISECTION_STEPS = 60
SCAN_POINTS = 20001
PREIMAGE_GRID = 257
ULAM_SUBSAMPLES = 32
ULAM_TOL = 1e-12
ULAM_MAX_STEPS = 10_000

Evaluator = Callable[[np.ndarray], np.ndarray]


def _bisect_monotone(
    func: Evaluator, lo: np.ndarray, hi: np.ndarray, target: np.ndarray, steps: int = BISECTION_STEPS
) -> np.ndarray:
    """
    Solves func(y) = target on [lo, hi] elementwise for func monotone on every bracket
    """
    lo, hi, target = np.broadcast_arrays(
        np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64), np.asarray(target, dtype=np.float64)
    )
    lo, hi = lo.copy(), hi.copy()
    increasing = func(hi) >= func(lo)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        value = func(mid)
        below = np.where(increasing, value < target, value > target)
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _newton_polish(
    func: Evaluator, deriv: Evaluator, y: np.ndarray, target: np.ndarray, lo: np.ndarray, hi: np.ndarray
) -> np.ndarray:
    for _ in range(2):
        slope = deriv(y)
        safe = np.where(slope == 0, 1.0, slope)
        candidate = np.clip(y - (func(y) - target) / safe, lo, hi)
        better = np.abs(func(candidate) - target) < np.abs(func(y) - target)
        y = np.where(better & (slope != 0), candidate, y)
    return y


# --- real polynomial Julia systems ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class RealPolynomial:
    """
    A monic real polynomial, coefficients listed from the highest degree down
    """

    coefficients: Tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(c) for c in self.coefficients)
        if not all(math.isfinite(c) for c in values):
            raise ContractViolation("Polynomial coefficients must be finite")
        if len(values) < 3:
            raise ContractViolation(f"Polynomial degree must be at least 2, got {len(values) - 1}")
        if abs(values[0] - 1.0) > 1e-12:
            raise ContractViolation(f"Leading coefficient must be 1, got {values[0]}")
        object.__setattr__(self, "coefficients", values)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @cached_property
    def derivative(self) -> np.ndarray:
        return np.polyder(np.array(self.coefficients))

    @cached_property
    def critical_points(self) -> Tuple[float, ...]:
        roots = np.roots(self.derivative)
        real = sorted(float(r.real) for r in roots if abs(r.imag) < 1e-9)
        return tuple(real)

    def __call__(self, x: Union[float, np.ndarray]) -> np.ndarray:
        return np.polyval(self.coefficients, x)

    def slope(self, x: Union[float, np.ndarray]) -> np.ndarray:
        return np.polyval(self.derivative, x)

    def shifted(self, linear: float = 0.0, constant: float = 0.0) -> np.ndarray:
        """
        Coefficients of p(t) - linear * t - constant
        """
        values = np.array(self.coefficients)
        values[-2] -= linear
        values[-1] -= constant
        return values


def _real_roots(coefficients: np.ndarray, points: int = SCAN_POINTS) -> List[float]:
    """
    Real roots of a monic polynomial from sign changes on [-B, B], B = 1 + sum of the non-leading |coefficients|
    """
    bound = 1.0 + float(np.sum(np.abs(coefficients[1:])))

    def func(t: np.ndarray) -> np.ndarray:
        return np.polyval(coefficients, t)

    grid = np.linspace(-bound, bound, points)
    values = func(grid)
    roots = [float(t) for t, v in zip(grid, values) if v == 0.0]
    changes = np.flatnonzero(values[:-1] * values[1:] < 0)
    for index in changes:
        roots.append(float(brentq(func, grid[index], grid[index + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)))
    return sorted(roots)


@dataclass(frozen=True)
class JuliaSystem:
    """
    A real Julia system: p maps [a, b] N-to-1 onto itself, b is an unstable fixed point and the N inverse
    branches satisfy a <= sigma_N(x) < ... < sigma_1(x) <= b
    """

    poly: RealPolynomial
    a: float
    b: float
    case: JuliaCase
    branch_tol: float

    @property
    def degree(self) -> int:
        return self.poly.degree

    @cached_property
    def pieces(self) -> np.ndarray:
        """
        Endpoints of the monotone pieces of p on [a, b]
        """
        inner = [c for c in self.poly.critical_points if self.a < c < self.b]
        return np.array([self.a] + inner + [self.b])

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.poly(np.asarray(x, dtype=np.float64))

    def branches(self, x: Union[float, np.ndarray]) -> np.ndarray:
        return inverse_branches(self, x)

    def separation(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(x) - np.asarray(y))


def julia_bracket(poly: RealPolynomial) -> JuliaSystem:
    """
    Locates the real Julia interval [a, b] of a monic real polynomial.

    b is the largest real fixed point and must be repelling; a is the smaller of the smallest real fixed point
    and the smallest real preimage of b. Exactly one of p(a) = a and p(a) = b holds for a real Julia polynomial,
    and every interior point of [a, b] must have N real preimages inside [a, b].
    """
    fixed_points = _real_roots(poly.shifted(linear=1.0))
    if not fixed_points:
        raise JuliaIntervalError("Polynomial has no real fixed point")
    b = fixed_points[-1]
    if abs(poly.slope(b)) <= 1.0:
        raise JuliaIntervalError(f"Largest fixed point {b:.12g} is not repelling (|p'(b)| = {abs(poly.slope(b)):.3g})")
    preimages = _real_roots(poly.shifted(constant=b))
    a = min(fixed_points[0], preimages[0]) if preimages else fixed_points[0]

    scale = max(1.0, abs(b))
    tol = CASE_TOL * scale
    if abs(poly(a) - a) <= tol:
        case = JuliaCase.fixed_a
    elif abs(poly(a) - b) <= tol:
        case = JuliaCase.mapped_a
    else:
        raise JuliaIntervalError(f"p(a) is neither a nor b for a = {a:.12g}, b = {b:.12g}")

    imag_tol = 1e-7 * scale
    for x in np.linspace(a, b, PREIMAGE_GRID)[1:-1]:
        roots = np.roots(poly.shifted(constant=x))
        real = roots[np.abs(roots.imag) <= imag_tol].real
        count = int(np.sum((real >= a - imag_tol) & (real <= b + imag_tol)))
        if count != poly.degree:
            raise JuliaIntervalError(
                f"x = {x:.6g} has {count} real preimages in [{a:.6g}, {b:.6g}], expected {poly.degree}"
            )

    system = JuliaSystem(poly=poly, a=a, b=b, case=case, branch_tol=1e-11 * max(1.0, abs(b) ** poly.degree))
    if len(system.pieces) - 1 != poly.degree:
        raise JuliaIntervalError(f"p has {len(system.pieces) - 1} monotone pieces on [a, b], expected {poly.degree}")
    logger.debug("julia interval [%.12g, %.12g], case %s", a, b, case)
    return system


def _solve_on_pieces(system: JuliaSystem, points: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    target = np.broadcast_to(points, lo.shape)
    roots = _bisect_monotone(system.poly, lo, hi, target)
    roots = _newton_polish(system.poly, system.poly.slope, roots, target, lo, hi)
    residual = float(np.max(np.abs(system.poly(roots) - target))) if roots.size else 0.0
    if residual > system.branch_tol:
        raise ConvergenceError(f"Inverse branch residual {residual:.3e} exceeds {system.branch_tol:.3e}")
    return roots


def _bracketed(system: JuliaSystem, x: Union[float, np.ndarray]) -> np.ndarray:
    points = np.asarray(x, dtype=np.float64)
    slack = 1e-12 * max(1.0, abs(system.b))
    if np.any(points < system.a - slack) or np.any(points > system.b + slack):
        raise JuliaIntervalError(f"Points must lie in [{system.a:.12g}, {system.b:.12g}]")
    return np.clip(points, system.a, system.b)


def inverse_branches(system: JuliaSystem, x: Union[float, np.ndarray]) -> np.ndarray:
    """
    The N preimages of x in [a, b], one per monotone piece, along a trailing axis in decreasing order
    """
    points = _bracketed(system, x)
    ends = system.pieces
    lo = np.broadcast_to(ends[:-1], points.shape + (ends.size - 1,))
    hi = np.broadcast_to(ends[1:], lo.shape)
    return _solve_on_pieces(system, points[..., None], lo, hi)[..., ::-1]


def inverse_branch(system: JuliaSystem, x: Union[float, np.ndarray], index: np.ndarray) -> np.ndarray:
    """
    sigma_{index + 1}(x) elementwise: `inverse_branches(system, x)[..., index]` solved on the chosen pieces only
    """
    points = _bracketed(system, x)
    count = system.pieces.size - 1
    pieces = count - 1 - np.broadcast_to(np.asarray(index, dtype=np.int64), points.shape)
    if np.any(pieces < 0) or np.any(pieces >= count):
        raise ValueError(f"Branch indices must lie in [0, {count})")
    return _solve_on_pieces(system, points, system.pieces[:-1][pieces], system.pieces[1:][pieces])


# --- circle ----------------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class CircleMap:
    """
    z -> z^N on the circle in angle coordinates; the branches are the N angles of the root fiber
    """

    scale: int

    @property
    def degree(self) -> int:
        return self.scale

    def forward(self, omega: np.ndarray) -> np.ndarray:
        return np.mod(self.scale * np.asarray(omega, dtype=np.float64), 2.0 * np.pi)

    def branches(self, omega: Union[float, np.ndarray]) -> np.ndarray:
        return root_fiber(omega, self.scale)

    def separation(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        gap = np.mod(np.asarray(x) - np.asarray(y), 2.0 * np.pi)
        return np.minimum(gap, 2.0 * np.pi - gap)


# --- Markov maps -------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovPiece:
    left: float
    right: float
    forward: Evaluator
    derivative: Evaluator
    slope: Optional[float] = None
    intercept: Optional[float] = None

    @classmethod
    def linear(cls, left: float, right: float, slope: float, intercept: float) -> "MarkovPiece":
        def forward(x: np.ndarray) -> np.ndarray:
            return slope * np.asarray(x, dtype=np.float64) + intercept

        def derivative(x: np.ndarray) -> np.ndarray:
            return np.full(np.shape(x), float(slope))

        return cls(left, right, forward, derivative, float(slope), float(intercept))

    @property
    def is_linear(self) -> bool:
        return self.slope is not None

    def image(self) -> Tuple[float, float]:
        ends = self.forward(np.array([self.left, self.right]))
        return float(np.min(ends)), float(np.max(ends))

    def inverse(self, x: np.ndarray) -> np.ndarray:
        if self.is_linear:
            return (np.asarray(x, dtype=np.float64) - self.intercept) / self.slope  # type: ignore
        lo = np.full(np.shape(x), self.left)
        hi = np.full(np.shape(x), self.right)
        return _bisect_monotone(self.forward, lo, hi, x)


@dataclass(frozen=True)
class MarkovMap:
    """
    A piecewise monotone map of [0, 1] with contiguous pieces, partition points mapped onto partition points,
    and inf |T'| >= beta > 1
    """

    pieces: Tuple[MarkovPiece, ...]
    name: str = "markov"
    beta: float = field(init=False)

    def __post_init__(self) -> None:
        pieces = tuple(self.pieces)
        if not pieces:
            raise NotMarkovError("A Markov map needs at least one piece")
        object.__setattr__(self, "pieces", pieces)
        if abs(pieces[0].left) > MARKOV_TOL or abs(pieces[-1].right - 1.0) > MARKOV_TOL:
            raise NotMarkovError("Pieces must cover [0, 1]")
        for before, after in zip(pieces, pieces[1:]):
            if abs(before.right - after.left) > MARKOV_TOL:
                raise NotMarkovError(f"Pieces are not contiguous at {before.right}")
        partition = self.partition
        for piece in pieces:
            if piece.right <= piece.left:
                raise NotMarkovError(f"Empty piece [{piece.left}, {piece.right})")
            for end in piece.image():
                if np.min(np.abs(partition - end)) > MARKOV_TOL:
                    raise NotMarkovError(f"Image endpoint {end:.12g} is not a partition point")
        beta = min(self._min_slope(piece) for piece in pieces)
        if beta <= 1.0:
            raise NotMarkovError(f"Map is not expanding: inf |T'| = {beta:.6g}")
        object.__setattr__(self, "beta", beta)

    @staticmethod
    def _min_slope(piece: MarkovPiece) -> float:
        if piece.is_linear:
            return abs(piece.slope)  # type: ignore
        return float(np.min(np.abs(piece.derivative(np.linspace(piece.left, piece.right, 65)))))

    @property
    def partition(self) -> np.ndarray:
        return np.array([piece.left for piece in self.pieces] + [self.pieces[-1].right])

    @property
    def full_branch(self) -> bool:
        return all(
            abs(lo) <= MARKOV_TOL and abs(hi - 1.0) <= MARKOV_TOL for lo, hi in (p.image() for p in self.pieces)
        )

    @property
    def degree(self) -> int:
        if not self.full_branch:
            raise ContractViolation(f"{self.name} is not a full-branch map")
        return len(self.pieces)

    def piece_index(self, x: np.ndarray) -> np.ndarray:
        rights = self.partition[1:-1]
        return np.searchsorted(rights, np.asarray(x, dtype=np.float64), side="right")

    def forward(self, x: np.ndarray) -> np.ndarray:
        points = np.asarray(x, dtype=np.float64)
        index = self.piece_index(points)
        result = np.empty(points.shape)
        for i, piece in enumerate(self.pieces):
            mask = index == i
            result[mask] = piece.forward(points[mask])
        return result

    def slope_at(self, x: np.ndarray) -> np.ndarray:
        points = np.asarray(x, dtype=np.float64)
        index = self.piece_index(points)
        result = np.empty(points.shape)
        for i, piece in enumerate(self.pieces):
            mask = index == i
            result[mask] = piece.derivative(points[mask])
        return result

    def preimages(self, x: Union[float, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        """
        Returns (y, valid) with one column per piece; y is NaN where x is outside that piece's image
        """
        points = np.asarray(x, dtype=np.float64)
        ys, valid = [], []
        for piece in self.pieces:
            lo, hi = piece.image()
            inside = (points >= lo - MARKOV_TOL) & (points <= hi + MARKOV_TOL)
            clipped = np.clip(points, lo, hi)
            ys.append(np.where(inside, piece.inverse(clipped), np.nan))
            valid.append(inside)
        return np.stack(ys, axis=-1), np.stack(valid, axis=-1)

    def preimage_slopes(self, ys: np.ndarray) -> np.ndarray:
        """
        T' at the columns returned by `preimages`, each column read from the piece that produced it
        """
        points = np.asarray(ys, dtype=np.float64)
        return np.stack([piece.derivative(points[..., i]) for i, piece in enumerate(self.pieces)], axis=-1)

    def branches(self, x: Union[float, np.ndarray]) -> np.ndarray:
        if not self.full_branch:
            raise ContractViolation(f"{self.name} is not a full-branch map")
        return self.preimages(x)[0]

    def separation(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(x) - np.asarray(y))


def _uniform_linear_map(slopes: int, name: str) -> MarkovMap:
    width = 1.0 / slopes
    pieces = [MarkovPiece.linear(i * width, (i + 1) * width, float(slopes), -float(i)) for i in range(slopes)]
    return MarkovMap(tuple(pieces), name=name)


def doubling_map() -> MarkovMap:
    return _uniform_linear_map(2, "doubling")


def tripling_map() -> MarkovMap:
    return _uniform_linear_map(3, "tripling")


def two_branch_map(gamma: float = 0.4) -> MarkovMap:
    """
    T x = x / gamma on [0, gamma), (x - gamma) / (1 - gamma) on [gamma, 1); Lebesgue measure is invariant
    """
    if not 0.0 < gamma < 1.0:
        raise NotMarkovError(f"gamma must lie in (0, 1), got {gamma}")
    pieces = (
        MarkovPiece.linear(0.0, gamma, 1.0 / gamma, 0.0),
        MarkovPiece.linear(gamma, 1.0, 1.0 / (1.0 - gamma), -gamma / (1.0 - gamma)),
    )
    return MarkovMap(pieces, name=f"two_branch({gamma:g})")


def sine_perturbed_doubling(eps: float = 0.1) -> MarkovMap:
    """
    T y = 2y + eps / (2 pi) * sin(4 pi y) on each half of [0, 1], shifted on the right half; expanding for |eps| < 1/2
    """

    def left_forward(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        return 2.0 * y + eps / (2.0 * np.pi) * np.sin(4.0 * np.pi * y)

    def right_forward(y: np.ndarray) -> np.ndarray:
        return left_forward(np.asarray(y, dtype=np.float64) - 0.5)

    def left_derivative(y: np.ndarray) -> np.ndarray:
        return 2.0 + 2.0 * eps * np.cos(4.0 * np.pi * np.asarray(y, dtype=np.float64))

    def right_derivative(y: np.ndarray) -> np.ndarray:
        return left_derivative(np.asarray(y, dtype=np.float64) - 0.5)

    pieces = (
        MarkovPiece(0.0, 0.5, left_forward, left_derivative),
        MarkovPiece(0.5, 1.0, right_forward, right_derivative),
    )
    return MarkovMap(pieces, name=f"sine_doubling({eps:g})")


MARKOV_CATALOG: Dict[str, Callable[..., MarkovMap]] = {
    "doubling": doubling_map,
    "tripling": tripling_map,
    "two_branch": two_branch_map,
    "sine_doubling": sine_perturbed_doubling,
}


def py_transfer_apply(markov: MarkovMap, f: FunctionLike, x: Union[float, np.ndarray]) -> np.ndarray:
    """
    (Pf)(x) = sum over T y = x of f(y) / |T'(y)|
    """
    ys, valid = markov.preimages(x)
    safe = np.where(valid, ys, 0.5)
    terms = values_at(f, safe) / np.abs(markov.preimage_slopes(safe))
    return np.sum(np.where(valid, terms, 0.0), axis=-1)


@dataclass(frozen=True)
class UlamResult:
    density: np.ndarray
    residual: float
    iterations: int
    bins: int


def _ulam_row(markov: MarkovMap, bins: int, i: int) -> np.ndarray:
    left, right = i / bins, (i + 1) / bins
    piece = markov.pieces[int(markov.piece_index(np.array([0.5 * (left + right)]))[0])]
    row = np.zeros(bins)
    if piece.is_linear:
        ends = piece.forward(np.array([left, right]))
        lo, hi = float(np.min(ends)), float(np.max(ends))
        edges = np.arange(bins + 1) / bins
        overlap = np.clip(np.minimum(hi, edges[1:]) - np.maximum(lo, edges[:-1]), 0.0, None)
        row = overlap / (hi - lo)
    else:
        midpoints = left + (np.arange(ULAM_SUBSAMPLES) + 0.5) * (right - left) / ULAM_SUBSAMPLES
        images = np.clip(piece.forward(midpoints), 0.0, np.nextafter(1.0, 0.0))
        np.add.at(row, (images * bins).astype(int), 1.0 / ULAM_SUBSAMPLES)
    return row


def ulam_matrix(markov: MarkovMap, bins: int) -> np.ndarray:
    """
    P[i, j] = share of cell i carried into cell j by T; cells must refine the Markov partition
    """
    if bins < 2:
        raise ContractViolation(f"bins must be at least 2, got {bins}")
    scaled = markov.partition * bins
    if np.max(np.abs(scaled - np.round(scaled))) > 1e-9:
        raise ContractViolation(f"{bins} bins do not refine the partition of {markov.name}")
    with ThreadPoolExecutor(max_workers=get_settings().threads) as pool:
        rows = list(pool.map(lambda i: _ulam_row(markov, bins, i), range(bins)))
    return np.vstack(rows)


def ulam_fixed_density(markov: MarkovMap, bins: int) -> UlamResult:
    """
    The fixed density of the 1/|T'| transfer operator on the Ulam grid, by power iteration, normalized to mean 1
    """
    transition = ulam_matrix(markov, bins)
    density = np.ones(bins)
    for step in range(1, ULAM_MAX_STEPS + 1):
        updated = transition.T @ density
        updated *= bins / np.sum(updated)
        change = float(np.max(np.abs(updated - density)))
        density = updated
        if change < ULAM_TOL:
            residual = float(np.max(np.abs(transition.T @ density - density)))
            logger.debug("ulam converged for %s after %d steps", markov.name, step)
            return UlamResult(density=density, residual=residual, iterations=step, bins=bins)
    raise ConvergenceError(f"Ulam power iteration did not converge in {ULAM_MAX_STEPS} steps")


def orbit_histogram(markov: MarkovMap, bins: int, steps: int, seed: int, chains: int = 1000) -> np.ndarray:
    """
    Histogram density (mean 1) of `steps` orbit points spread over parallel chains started uniformly.

    Floating point orbits can land on a fixed point or leave [0, 1); those chains restart at a fresh uniform point.
    """
    rng = make_rng(seed)
    x = rng.random(chains)
    counts = np.zeros(bins)
    for _ in range(max(1, math.ceil(steps / chains))):
        moved = markov.forward(x)
        stuck = (moved <= 0.0) | (moved >= 1.0) | (moved == x)
        moved[stuck] = rng.random(int(np.sum(stuck)))
        x = moved
        counts += np.histogram(x, bins=bins, range=(0.0, 1.0))[0]
    return counts * bins / np.sum(counts)


# --- weights and measures ----------------------------------------------------------------------------------------

BranchSystem = Union[JuliaSystem, CircleMap, MarkovMap]


@dataclass(frozen=True)
class GWeight:
    """
    A weight g >= 0 with sum over T y = x of g(y) = 1
    """

    function: Evaluator
    name: str = "g"

    @classmethod
    def uniform(cls, degree: int) -> "GWeight":
        def constant(x: np.ndarray) -> np.ndarray:
            return np.full(np.shape(x), 1.0 / degree)

        return cls(constant, name=f"1/{degree}")

    @classmethod
    def from_filter(cls, filter: FilterSpec) -> "GWeight":
        """
        g = |m0|^2 / N on the circle
        """

        def weight(omega: np.ndarray) -> np.ndarray:
            return np.abs(values_at(filter.m0, omega)) ** 2 / filter.scale

        return cls(weight, name="|m0|^2/N")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.function(x))

    def check(self, system: BranchSystem, points: np.ndarray) -> float:
        totals = np.sum(self(system.branches(points)), axis=-1)
        defect = float(np.max(np.abs(totals - 1.0)))
        if defect > WEIGHT_TOL:
            raise ContractViolation(f"Weight {self.name} is not normalized (defect {defect:.3e})")
        return defect


def keane_apply(system: BranchSystem, g: GWeight, f: FunctionLike, x: Union[float, np.ndarray]) -> np.ndarray:
    branches = system.branches(x)
    return np.sum(g(branches) * values_at(f, branches), axis=-1)


def backward_sample(system: BranchSystem, x0: float, depth: int, count: int, seed: int) -> np.ndarray:
    """
    `count` points, each the image of x0 under a uniformly random word of `depth` inverse branches.

    The last branch applied is the outermost; uniform words sample the balanced measure, which gives every
    depth-k cylinder mass N^-k.
    """
    if depth < 1:
        raise ValueError(f"depth must be at least 1, got {depth}")
    rng = make_rng(seed)
    words = rng.integers(0, system.degree, size=(count, depth))
    x = np.full(count, float(x0))
    rows = np.arange(count)
    for letter in words.T:
        if isinstance(system, JuliaSystem):
            x = inverse_branch(system, x, letter)
        else:
            x = system.branches(x)[rows, letter]
    return x


def branch_image(system: JuliaSystem, word: Sequence[int]) -> Tuple[float, float]:
    """
    sigma_{w_0} o sigma_{w_1} o ... ([a, b]) with 0-based branch indices (0 is sigma_1, the largest)
    """
    ends = np.array([system.a, system.b])
    for letter in reversed(list(word)):
        ends = system.branches(ends)[:, letter]
    return float(np.min(ends)), float(np.max(ends))


@dataclass(frozen=True)
class CylinderMass:
    word: Tuple[int, ...]
    mass: float
    expected: float
    stderr: float

    @property
    def z_score(self) -> float:
        return abs(self.mass - self.expected) / self.stderr if self.stderr > 0 else 0.0


def cylinder_masses(system: JuliaSystem, points: np.ndarray, depth: int = 2) -> List[CylinderMass]:
    expected = float(system.degree) ** (-depth)
    stderr = math.sqrt(expected * (1.0 - expected) / points.size)
    words = np.array(np.meshgrid(*[np.arange(system.degree)] * depth, indexing="ij")).reshape(depth, -1).T
    masses = []
    for word in words:
        lo, hi = branch_image(system, word)
        inside = np.mean((points >= lo) & (points <= hi))
        masses.append(CylinderMass(tuple(int(w) for w in word), float(inside), expected, stderr))
    return masses


def gap_fraction(points: np.ndarray, lo: float, hi: float) -> float:
    """
    Share of the points strictly inside (lo, hi)
    """
    return float(np.mean((points > lo) & (points < hi)))


@dataclass(frozen=True)
class CycleMeasure:
    """
    The uniform measure on a cycle x_1 -> x_2 -> ... -> x_k -> x_1
    """

    points: Tuple[float, ...]
    system: BranchSystem

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64)
        if points.size == 0:
            raise ContractViolation("A cycle needs at least one point")
        images = self.system.forward(points)
        gaps = self.system.separation(images, np.roll(points, -1))
        if float(np.max(gaps)) > CYCLE_TOL:
            raise ContractViolation(f"Points do not form a cycle (mismatch {float(np.max(gaps)):.3e})")
        object.__setattr__(self, "points", tuple(float(p) for p in points))


@dataclass(frozen=True)
class CycleResidual:
    residual: float
    g_on_cycle: bool


def cycle_measure_residual(
    system: BranchSystem, g: GWeight, cycle: CycleMeasure, f: FunctionLike, strict: bool = False
) -> CycleResidual:
    """
    |nu(R_g f) - nu(f)| for the cycle measure nu; zero when g = 1 on the cycle, which `strict` enforces
    """
    points = np.asarray(cycle.points)
    g_on_cycle = bool(np.max(np.abs(g(points) - 1.0)) <= WEIGHT_TOL)
    if strict and not g_on_cycle:
        raise ContractViolation("g is not 1 on the cycle")
    lhs = np.mean(keane_apply(system, g, f, points))
    rhs = np.mean(values_at(f, points))
    return CycleResidual(residual=float(abs(lhs - rhs)), g_on_cycle=g_on_cycle)


# --- Monte Carlo identities ----------------------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    residual: float
    stderr: float
    lhs: complex
    rhs: complex

    def within(self, sigmas: float = 4.0) -> bool:
        return self.residual <= sigmas * self.stderr + 1e-12


def _paired(lhs: np.ndarray, rhs: np.ndarray) -> MonteCarloResult:
    difference = lhs - rhs
    stderr = float(np.std(difference, ddof=1) / math.sqrt(difference.size)) if difference.size > 1 else 0.0
    return MonteCarloResult(
        residual=float(abs(np.mean(difference))),
        stderr=stderr,
        lhs=complex(np.mean(lhs)),
        rhs=complex(np.mean(rhs)),
    )


def reference_sample(
    system: BranchSystem,
    samples: int,
    seed: int,
    depth: int = 25,
    x0: Optional[float] = None,
    reference: ReferenceMeasure = ReferenceMeasure.balanced,
) -> np.ndarray:
    """
    Draws from the balanced measure by backward iteration, or from Lebesgue measure on [0, 1)
    """
    if reference == ReferenceMeasure.lebesgue:
        if not isinstance(system, MarkovMap):
            raise ContractViolation("Lebesgue sampling is only defined for Markov maps of [0, 1]")
        return make_rng(seed).random(samples)
    if x0 is None:
        x0 = system.b if isinstance(system, JuliaSystem) else 0.0
    return backward_sample(system, x0, depth, samples, seed)


def invariance_residual(
    system: BranchSystem,
    f: FunctionLike,
    samples: int,
    seed: int,
    depth: int = 25,
    x0: Optional[float] = None,
) -> MonteCarloResult:
    """
    Monte Carlo estimate of |int f dmu - (1/N) sum_i int f o sigma_i dmu| for the balanced measure mu; for a
    Markov map, |int Pf dx - int f dx| under Lebesgue measure instead
    """
    if isinstance(system, MarkovMap):
        x = reference_sample(system, samples, seed, reference=ReferenceMeasure.lebesgue)
        return _paired(py_transfer_apply(system, f, x), values_at(f, x))
    x = reference_sample(system, samples, seed, depth, x0)
    averaged = np.mean(values_at(f, system.branches(x)), axis=-1)
    return _paired(values_at(f, x), averaged)


def circle_invariance_residual(f: LaurentPoly, n: int) -> float:
    """
    The exact circle case: the Haar integral of f against that of the branch average
    """
    return abs(haar_integral(f) - haar_integral(downsample_average(f, n)))


def duality_residual(
    system: BranchSystem,
    g: Optional[GWeight],
    xi: FunctionLike,
    f: FunctionLike,
    samples: int,
    seed: int,
    depth: int = 25,
    reference: ReferenceMeasure = ReferenceMeasure.balanced,
) -> MonteCarloResult:
    """
    Both sides of N int g(x) xi(Tx) f(x) dmu = int xi (R_g f) dmu by Monte Carlo; with Lebesgue reference on a
    Markov map, int xi(Tx) f(x) dx = int xi (Pf) dx instead and `g` is unused
    """
    if reference == ReferenceMeasure.lebesgue:
        if not isinstance(system, MarkovMap):
            raise ContractViolation("Lebesgue duality needs a Markov map")
        x = reference_sample(system, samples, seed, reference=reference)
        lhs = values_at(xi, system.forward(x)) * values_at(f, x)
        return _paired(lhs, values_at(xi, x) * py_transfer_apply(system, f, x))
    if g is None:
        raise ContractViolation("The balanced duality needs a weight g")
    x = reference_sample(system, samples, seed, depth)
    lhs = system.degree * g(x) * values_at(xi, system.forward(x)) * values_at(f, x)
    return _paired(lhs, values_at(xi, x) * keane_apply(system, g, f, x))


@dataclass(frozen=True)
class CircleDuality:
    lhs: complex
    rhs: complex

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def circle_duality(filter: FilterSpec, xi: LaurentPoly, f: LaurentPoly) -> CircleDuality:
    """
    The circle case of the duality computed on coefficients: int |m0|^2 xi(z^N) f against int xi R(f)
    """
    weight = autocorrelation(filter.m0)
    lhs = haar_integral(weight * compose_power(xi, filter.scale) * f)
    rhs = haar_integral(xi * apply_ruelle(filter, f))
    return CircleDuality(lhs=lhs, rhs=rhs)
