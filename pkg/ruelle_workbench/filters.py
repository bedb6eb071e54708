"""
Built-in filters and densities, addressable by name from the command line and the HTTP service
"""
import math
from pathlib import Path
from typing import Callable, Dict, Union

from .cascade import GridFunction
from .laurent import FilterSpec, LaurentPoly, rotate
from .models import FilterSpecModel, LaurentPolyModel
from .transfer import validate_filter

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def stretched_haar(p: int) -> FilterSpec:
    """
    (1 + z^p) / sqrt(2) at scale 2; p = 1 is the Haar filter
    """
    if p < 1:
        raise ValueError(f"stretched_haar needs p >= 1, got {p}")
    return validate_filter(FilterSpec(scale=2, m0=LaurentPoly.from_dict({0: 1 / SQRT2, p: 1 / SQRT2})))


def haar() -> FilterSpec:
    return stretched_haar(1)


def example31() -> FilterSpec:
    """
    (1 + z^3) / sqrt(2): a quadrature low-pass filter with a two-dimensional fixed space
    """
    return stretched_haar(3)


def daubechies4() -> FilterSpec:
    taps = [1 + SQRT3, 3 + SQRT3, 3 - SQRT3, 1 - SQRT3]
    return validate_filter(FilterSpec(scale=2, m0=LaurentPoly(0, [t / (4 * SQRT2) for t in taps])))


def trivial(scale: int = 2) -> FilterSpec:
    """
    m0 = 1: a quadrature filter that is not low-pass
    """
    return validate_filter(FilterSpec(scale=scale, m0=LaurentPoly.constant(1.0)))


def h_phi() -> LaurentPoly:
    """
    (1/9)(z^-2 + 2 z^-1 + 3 + 2 z + z^2), the correlation density of (1/3) chi_[0,3) under `example31`
    """
    return LaurentPoly(-2, [v / 9 for v in (1, 2, 3, 2, 1)])


def h_phi_reflected() -> LaurentPoly:
    """
    h_phi(-z), the density paired with the second Cuntz isometry; not a fixed vector of `example31`
    """
    return rotate(h_phi(), 1, 2)


def unit_box(scale: int = 2) -> GridFunction:
    return GridFunction.indicator(0, 1, scale)


def example31_scaling_function() -> GridFunction:
    """
    (1/3) chi_[0,3), the scaling function of `example31`
    """
    return GridFunction.indicator(0, 3, 2, height=1.0 / 3.0)


CATALOG: Dict[str, Callable[[], FilterSpec]] = {
    "haar": haar,
    "example31": example31,
    "daubechies4": daubechies4,
    "trivial": trivial,
}

DENSITIES: Dict[str, Callable[[], LaurentPoly]] = {
    "h_phi": h_phi,
    "one": lambda: LaurentPoly.constant(1.0),
}


def load_filter(source: Union[str, Path]) -> FilterSpec:
    """
    Resolves a catalog name, `stretched_haar:p`, or the path of a JSON file holding {"N": ..., "m0": {...}}
    """
    name = str(source)
    if name in CATALOG:
        return CATALOG[name]()
    if name.startswith("stretched_haar:"):
        return stretched_haar(int(name.split(":", 1)[1]))
    return FilterSpecModel.parse_file(Path(name)).to_filter()


def load_density(source: Union[str, Path]) -> LaurentPoly:
    """
    Resolves a density name or the path of a JSON file holding {"lo": ..., "coeffs": [...]}
    """
    name = str(source)
    if name in DENSITIES:
        return DENSITIES[name]()
    return LaurentPolyModel.parse_file(Path(name)).to_laurent()
