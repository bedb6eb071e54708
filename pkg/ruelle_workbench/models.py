import math
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseConfig, BaseModel, Extra, Field, root_validator, validator

from .keane import MARKOV_CATALOG, MarkovMap, MarkovPiece
from .laurent import FilterSpec, LaurentPoly
from .transfer import EigenReport, validate_filter


class WorkbenchModel(BaseModel):
    """
    Intended for use as a base class for every JSON document the workbench reads or writes.

    Any models that inherit from this class will:
    * reject unknown keys
    * accept fields by name as well as by alias
    """

    class Config(BaseConfig):
        extra = Extra.forbid
        allow_population_by_field_name = True


Coefficient = Union[float, Tuple[float, float]]


class LaurentPolyModel(WorkbenchModel):
    """
    {"lo": -2, "coeffs": [[re, im], ...]}; a bare number is read as a real coefficient
    """

    lo: int
    coeffs: List[Coefficient]

    @validator("coeffs")
    def check_coeffs(cls, value: List[Coefficient]) -> List[Coefficient]:
        if not value:
            raise ValueError("coeffs must not be empty")
        for entry in value:
            parts = entry if isinstance(entry, tuple) else (entry,)
            if not all(math.isfinite(part) for part in parts):
                raise ValueError("coeffs must be finite")
        return value

    def to_laurent(self) -> LaurentPoly:
        values = [complex(*entry) if isinstance(entry, tuple) else complex(entry) for entry in self.coeffs]
        return LaurentPoly(self.lo, values)

    @classmethod
    def from_laurent(cls, f: LaurentPoly) -> "LaurentPolyModel":
        return cls(lo=f.lo, coeffs=[(float(c.real), float(c.imag)) for c in f.coeffs])


class FilterSpecModel(WorkbenchModel):
    scale: int = Field(..., alias="N", ge=2)
    m0: LaurentPolyModel

    def to_filter(self) -> FilterSpec:
        return validate_filter(FilterSpec(scale=self.scale, m0=self.m0.to_laurent()))

    @classmethod
    def from_filter(cls, filter: FilterSpec) -> "FilterSpecModel":
        return cls(scale=filter.scale, m0=LaurentPolyModel.from_laurent(filter.m0))


class MarkovPieceModel(WorkbenchModel):
    left: float
    right: float
    slope: float
    intercept: float


class MarkovMapModel(WorkbenchModel):
    """
    Either a catalog map {"name": "two_branch", "params": {"gamma": 0.4}} or explicit linear pieces
    """

    name: Optional[str] = None
    params: Dict[str, float] = {}
    pieces: Optional[List[MarkovPieceModel]] = None

    @root_validator(skip_on_failure=True)
    def check_source(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if (values.get("name") is None) == (values.get("pieces") is None):
            raise ValueError("exactly one of name and pieces must be given")
        if values.get("name") is not None and values["name"] not in MARKOV_CATALOG:
            raise ValueError(f"unknown map {values['name']!r}; choose from {sorted(MARKOV_CATALOG)}")
        return values

    def to_map(self) -> MarkovMap:
        if self.name is not None:
            return MARKOV_CATALOG[self.name](**self.params)
        pieces = tuple(MarkovPiece.linear(p.left, p.right, p.slope, p.intercept) for p in self.pieces or [])
        return MarkovMap(pieces, name="custom")


# --- results ---------------------------------------------------------------------------------------------------------


class CheckReportModel(WorkbenchModel):
    scale: int = Field(..., alias="N")
    quadrature: bool
    lowpass: bool


class EigenReportModel(WorkbenchModel):
    dimension: int
    pure: bool
    residuals: List[float]
    spectral_radius_estimate: float
    basis: List[LaurentPolyModel]

    @classmethod
    def from_report(cls, report: EigenReport) -> "EigenReportModel":
        return cls(
            dimension=report.dimension,
            pure=report.pure,
            residuals=[float(r) for r in report.residuals],
            spectral_radius_estimate=report.spectral_radius_estimate,
            basis=[LaurentPolyModel.from_laurent(v) for v in report.basis],
        )


class MomentRowModel(WorkbenchModel):
    k: int
    n: int
    f: int
    re: float
    im: float


class DualityReportModel(WorkbenchModel):
    p: int
    orbits: List[List[int]]
    orbit_count: int
    dimension: int
    equal: Optional[bool]
    base_pure: bool
    reciprocity: bool


class PsdReportModel(WorkbenchModel):
    min_eigenvalue: Optional[float]
    passed: bool
    hermitian_discrepancy: float
    size: int


# --- requests --------------------------------------------------------------------------------------------------------


class FilterRequest(WorkbenchModel):
    filter: FilterSpecModel


class MomentsRequest(FilterRequest):
    h: Optional[LaurentPolyModel] = None
    nmax: int = Field(2, ge=0, le=12)
    fmax: int = Field(2, ge=0, le=32)


class DualityRequest(FilterRequest):
    p: int = Field(..., ge=1)


class PsdRequest(FilterRequest):
    h: Optional[LaurentPolyModel] = None
    nmax: int = Field(4, ge=0, le=16)
    kmax: int = Field(2, ge=0, le=6)
