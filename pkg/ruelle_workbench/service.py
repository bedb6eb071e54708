"""
An optional HTTP surface over the workbench.

Request bodies use the JSON models of `ruelle_workbench.models`; malformed bodies answer 422 and inputs that fail
a precondition (not quadrature, not harmonic, ...) answer 400.
"""
import logging
from typing import List, Optional

from fastapi import FastAPI
from fastapi.routing import APIRoute
from starlette.requests import Request
from starlette.responses import JSONResponse

from .bohr import MomentKernel, nadic_grid, psd_check
from .duality import dimension_vs_orbits, orbits, reciprocity_check
from .exceptions import ContractViolation, WorkbenchError
from .laurent import FilterSpec, LaurentPoly
from .models import (
    CheckReportModel,
    DualityReportModel,
    DualityRequest,
    EigenReportModel,
    FilterRequest,
    LaurentPolyModel,
    MomentRowModel,
    MomentsRequest,
    PsdReportModel,
    PsdRequest,
)
from .settings import WorkbenchSettings, get_settings
from .timing import add_timing_middleware, record_timing
from .transfer import HarmonicDensity, fixed_space, harmonic_density, moment

logger = logging.getLogger(__name__)


def simplify_operation_ids(app: FastAPI) -> None:
    """
    Uses the endpoint function names as operation IDs so that generated clients get short method names
    """
    for route in app.routes:
        if isinstance(route, APIRoute):
            route.operation_id = route.name


def _density(filter: FilterSpec, h: Optional[LaurentPolyModel]) -> HarmonicDensity:
    if h is not None:
        return harmonic_density(filter, h.to_laurent())
    report = fixed_space(filter)
    if not report.pure:
        raise ContractViolation(f"The fixed space has dimension {report.dimension}; send a density h")
    return harmonic_density(filter, report.basis[0])


def get_app(settings: Optional[WorkbenchSettings] = None) -> FastAPI:
    settings = settings or get_settings()
    app = FastAPI(**settings.fastapi_kwargs)
    add_timing_middleware(app, record=logger.info, prefix="ruelle")

    @app.exception_handler(WorkbenchError)
    async def workbench_error_handler(request: Request, exc: WorkbenchError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc), "type": type(exc).__name__})

    @app.post("/check", response_model=CheckReportModel)
    def check(body: FilterRequest) -> CheckReportModel:
        filter = body.filter.to_filter()
        return CheckReportModel(scale=filter.scale, quadrature=filter.quadrature, lowpass=filter.lowpass)

    @app.post("/eigenspace", response_model=EigenReportModel)
    def eigenspace(body: FilterRequest, request: Request) -> EigenReportModel:
        report = fixed_space(body.filter.to_filter())
        record_timing(request, note="fixed space")
        return EigenReportModel.from_report(report)

    @app.post("/moments", response_model=List[MomentRowModel])
    def moments(body: MomentsRequest) -> List[MomentRowModel]:
        filter = body.filter.to_filter()
        density = _density(filter, body.h)
        rows = []
        for n in range(body.nmax + 1):
            for k in range(n + 1):
                for j in range(body.fmax + 1):
                    value = moment(filter, density, k, n, LaurentPoly.monomial(j))
                    rows.append(MomentRowModel(k=k, n=n, f=j, re=value.real, im=value.imag))
        return rows

    @app.post("/duality", response_model=DualityReportModel)
    def duality(body: DualityRequest) -> DualityReportModel:
        filter = body.filter.to_filter()
        decomposition = orbits(filter.scale, body.p)
        comparison = dimension_vs_orbits(filter, body.p)
        return DualityReportModel(
            p=body.p,
            orbits=decomposition.orbits,
            orbit_count=decomposition.count,
            dimension=comparison.dimension,
            equal=comparison.equal,
            base_pure=comparison.base_pure,
            reciprocity=reciprocity_check(filter, body.p).holds,
        )

    @app.post("/bohr/psd", response_model=PsdReportModel)
    def bohr_psd(body: PsdRequest) -> PsdReportModel:
        filter = body.filter.to_filter()
        kernel = MomentKernel(filter, _density(filter, body.h))
        report = psd_check(kernel, nadic_grid(filter.scale, body.nmax, body.kmax))
        return PsdReportModel(
            min_eigenvalue=report.min_eigenvalue,
            passed=report.passed,
            hermitian_discrepancy=report.hermitian_discrepancy,
            size=report.size,
        )

    simplify_operation_ids(app)
    return app
