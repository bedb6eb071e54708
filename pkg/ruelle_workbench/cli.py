"""
Command-line front end.

Every subcommand prints a short `key=value` summary on stdout and, with `--out`, writes its full result as JSON or
CSV. Floats are printed with 12 significant digits. Exit codes: 0 on success, 2 on invalid input or a failed
precondition, 1 on any other error or a failed reproduction check.
"""
import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import Field, ValidationError, root_validator

from .acceptance import format_table, run_acceptance
from .bohr import MomentKernel, nadic_grid, psd_check
from .cascade import GridFunction, cascade_iterate, grid_rows, refinement_residual
from .duality import dimension_vs_orbits, orbits, reciprocity_check
from .enums import CascadeInit, OutputFormat
from .exceptions import ContractViolation, WorkbenchError
from .filters import load_density, load_filter, unit_box
from .keane import (
    MARKOV_CATALOG,
    MarkovMap,
    RealPolynomial,
    backward_sample,
    julia_bracket,
    orbit_histogram,
    ulam_fixed_density,
)
from .laurent import FilterSpec, LaurentPoly, distance
from .models import (
    CheckReportModel,
    DualityReportModel,
    EigenReportModel,
    MarkovMapModel,
    MomentRowModel,
    PsdReportModel,
    WorkbenchModel,
)
from .settings import get_settings
from .transfer import (
    HarmonicDensity,
    cocycle_transform,
    cuntz_s,
    cuntz_s_adjoint,
    fixed_space,
    harmonic_density,
    isometry_defect,
    moment,
)

logger = logging.getLogger(__name__)

COMMANDS = (
    "check",
    "eigenspace",
    "cascade",
    "moments",
    "cocycle",
    "cuntz",
    "duality",
    "julia",
    "ulam",
    "bohr",
    "reproduce-paper",
)
FILTER_COMMANDS = {"check", "eigenspace", "cascade", "moments", "cocycle", "cuntz", "duality", "bohr"}


class RunConfig(WorkbenchModel):
    """
    The validated arguments of one invocation; sampling subcommands must carry an explicit seed
    """

    command: str
    filter: Optional[str] = None
    h: Optional[str] = None
    poly: Optional[str] = None
    map: Optional[str] = None
    p: Optional[int] = Field(None, ge=1)
    n: int = Field(2, ge=0, le=16)
    k: Optional[int] = Field(None, ge=0)
    grid: int = Field(256, ge=8)
    bins: int = Field(64, ge=2)
    depth: int = Field(25, ge=1)
    samples: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)
    iters: int = Field(8, ge=0)
    init: CascadeInit = CascadeInit.unitbox
    kmax: int = Field(2, ge=0, le=8)
    fmax: int = Field(2, ge=0, le=32)
    eig_tol: Optional[float] = Field(None, gt=0)
    rank_rtol: Optional[float] = Field(None, gt=0)
    out: Optional[Path] = None
    format: OutputFormat = OutputFormat.json

    @root_validator(skip_on_failure=True)
    def check_command(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        command = values["command"]
        if command not in COMMANDS:
            raise ValueError(f"unknown command {command!r}")
        if command in FILTER_COMMANDS and values.get("filter") is None:
            raise ValueError(f"{command} needs --filter")
        if command == "duality" and values.get("p") is None:
            raise ValueError("duality needs --p")
        if command == "julia" and values.get("poly") is None:
            raise ValueError("julia needs --poly")
        if command == "ulam" and values.get("map") is None:
            raise ValueError("ulam needs --map")
        sampling = command == "julia" or (command == "ulam" and values.get("samples") is not None)
        if sampling and values.get("seed") is None:
            raise ValueError(f"{command} draws random samples and needs an explicit --seed")
        return values


INITIAL_FUNCTIONS: Dict[CascadeInit, Callable[[int], GridFunction]] = {CascadeInit.unitbox: unit_box}


@dataclass
class Output:
    summary: Dict[str, Any]
    document: Any = None
    header: Sequence[str] = ()
    rows: List[Sequence[Any]] = field(default_factory=list)


# --- formatting ------------------------------------------------------------------------------------------------------


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    if value is None:
        return "none"
    return str(value)


def _rounded(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return float(f"{number:.12g}") if math.isfinite(number) else str(number)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {key: _rounded(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(item) for item in value]
    if hasattr(value, "value"):
        return value.value
    return value


def render(output: Output, fmt: OutputFormat) -> str:
    if fmt == OutputFormat.csv:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(output.header)
        for row in output.rows:
            writer.writerow([format_value(item) for item in row])
        return buffer.getvalue()
    return json.dumps(_rounded(output.document), indent=2) + "\n"


def _summary_line(summary: Dict[str, Any]) -> str:
    return " ".join(f"{key}={format_value(value)}" for key, value in summary.items())


# --- inputs ----------------------------------------------------------------------------------------------------------


def parse_poly(text: str) -> RealPolynomial:
    try:
        coefficients = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise ContractViolation(f"--poly must be a comma separated list of numbers, got {text!r}")
    return RealPolynomial(coefficients)


def load_map(source: str) -> MarkovMap:
    if source in MARKOV_CATALOG:
        return MARKOV_CATALOG[source]()
    return MarkovMapModel.parse_file(Path(source)).to_map()


def _density(config: RunConfig, filter: FilterSpec) -> HarmonicDensity:
    """
    The density given by --h, or the normalized fixed vector of a pure filter
    """
    if config.h is not None:
        return harmonic_density(filter, load_density(config.h))
    report = fixed_space(filter)
    if not report.pure:
        raise ContractViolation(f"The fixed space has dimension {report.dimension}; choose a density with --h")
    return harmonic_density(filter, report.basis[0])


# --- subcommands -----------------------------------------------------------------------------------------------------


def run_check(config: RunConfig) -> Output:
    filter = load_filter(config.filter)  # type: ignore
    report = CheckReportModel(scale=filter.scale, quadrature=filter.quadrature, lowpass=filter.lowpass)
    return Output(
        summary={"quadrature": filter.quadrature, "lowpass": filter.lowpass},
        document=report.dict(by_alias=True),
        header=("N", "quadrature", "lowpass"),
        rows=[(filter.scale, filter.quadrature, filter.lowpass)],
    )


def run_eigenspace(config: RunConfig) -> Output:
    report = fixed_space(load_filter(config.filter))  # type: ignore
    rows = [
        (index, exponent, value.real, value.imag)
        for index, vector in enumerate(report.basis)
        for exponent, value in zip(vector.exponents, vector.coeffs)
    ]
    return Output(
        summary={
            "dimension": report.dimension,
            "pure": report.pure,
            "spectral_radius": report.spectral_radius_estimate,
        },
        document=EigenReportModel.from_report(report).dict(),
        header=("vector", "exponent", "re", "im"),
        rows=rows,
    )


def run_cascade(config: RunConfig) -> Output:
    filter = load_filter(config.filter)  # type: ignore
    result = cascade_iterate(filter, INITIAL_FUNCTIONS[config.init](filter.scale), config.iters)
    rows = grid_rows(result.phi)
    integral = result.phi.integral()
    return Output(
        summary={
            "iterations": result.iterations,
            "level": result.phi.level,
            "capped": result.capped,
            "diverged": result.diverged,
            "integral": integral.real,
            "refinement_residual": refinement_residual(filter, result.phi),
        },
        document={
            "level": result.phi.level,
            "x": [row[0] for row in rows],
            "re": [row[1] for row in rows],
            "im": [row[2] for row in rows],
        },
        header=("x", "re", "im"),
        rows=list(rows),
    )


def run_moments(config: RunConfig) -> Output:
    filter = load_filter(config.filter)  # type: ignore
    density = _density(config, filter)
    kmax = config.n if config.k is None else config.k
    rows = []
    for n in range(config.n + 1):
        for k in range(min(n, kmax) + 1):
            for j in range(config.fmax + 1):
                value = moment(filter, density, k, n, LaurentPoly.monomial(j))
                rows.append(MomentRowModel(k=k, n=n, f=j, re=value.real, im=value.imag))
    return Output(
        summary={"rows": len(rows), "normalization": density.normalization.value},
        document=[row.dict() for row in rows],
        header=("k", "n", "f", "re", "im"),
        rows=[(row.k, row.n, row.f, row.re, row.im) for row in rows],
    )


def run_cocycle(config: RunConfig) -> Output:
    filter = load_filter(config.filter)  # type: ignore
    density = load_density(config.h) if config.h is not None else _density(config, filter).h
    result = cocycle_transform(filter, density, config.grid)
    rows = [
        (omega, value.real, value.imag, bool(ok))
        for omega, value, ok in zip(result.omega, result.values, result.admissible)
    ]
    return Output(
        summary={
            "admissible": int(np.sum(result.admissible)),
            "grid": config.grid,
            "quadrature_residual": result.quadrature_residual,
            "lowpass_residual": result.lowpass_residual,
        },
        document={
            "quadrature_residual": result.quadrature_residual,
            "lowpass_residual": result.lowpass_residual,
            "omega": [row[0] for row in rows],
            "re": [row[1] for row in rows],
            "im": [row[2] for row in rows],
            "admissible": [row[3] for row in rows],
        },
        header=("omega", "re", "im", "admissible"),
        rows=rows,
    )


def run_cuntz(config: RunConfig) -> Output:
    """
    Checks S_i* S_j = delta_ij and S_0 S_0* + S_1 S_1* = 1 on the monomials e_n, |n| <= 10
    """
    filter = load_filter(config.filter)  # type: ignore
    rows = []
    for exponent in range(-10, 11):
        f = LaurentPoly.monomial(exponent)
        relations = max(
            distance(cuntz_s_adjoint(filter, i, cuntz_s(filter, j, f)), f if i == j else LaurentPoly.zero())
            for i in (0, 1)
            for j in (0, 1)
        )
        total = cuntz_s(filter, 0, cuntz_s_adjoint(filter, 0, f)) + cuntz_s(filter, 1, cuntz_s_adjoint(filter, 1, f))
        rows.append((exponent, relations, distance(total, f)))
    summary: Dict[str, Any] = {
        "relations": max(row[1] for row in rows),
        "completeness": max(row[2] for row in rows),
    }
    if config.h is not None:
        density = load_density(config.h)
        summary["isometry_defect_s1"] = isometry_defect(filter, density, LaurentPoly(0, [1.0, 0.0, 1.0]), branch=1)
    return Output(
        summary=summary,
        document={"exponents": [row[0] for row in rows], "relations": [row[1] for row in rows]},
        header=("exponent", "relations", "completeness"),
        rows=rows,
    )


def run_duality(config: RunConfig) -> Output:
    filter = load_filter(config.filter)  # type: ignore
    p = config.p or 1
    decomposition = orbits(filter.scale, p)
    comparison = dimension_vs_orbits(filter, p)
    reciprocity = reciprocity_check(filter, p)
    report = DualityReportModel(
        p=p,
        orbits=decomposition.orbits,
        orbit_count=decomposition.count,
        dimension=comparison.dimension,
        equal=comparison.equal,
        base_pure=comparison.base_pure,
        reciprocity=reciprocity.holds,
    )
    return Output(
        summary={
            "p": p,
            "orbits": decomposition.count,
            "dimension": comparison.dimension,
            "equal": comparison.equal,
            "reciprocity": reciprocity.holds,
        },
        document=report.dict(),
        header=("orbit", "period", "members"),
        rows=[(i, len(o), " ".join(str(j) for j in o)) for i, o in enumerate(decomposition.orbits)],
    )


def run_julia(config: RunConfig) -> Output:
    system = julia_bracket(parse_poly(config.poly))  # type: ignore
    count = config.samples or 10_000
    points = backward_sample(system, system.b, config.depth, count, config.seed)  # type: ignore
    weight = 1.0 / count
    return Output(
        summary={"a": system.a, "b": system.b, "case": system.case.value, "degree": system.degree, "samples": count},
        document={
            "a": system.a,
            "b": system.b,
            "case": system.case.value,
            "critical_points": list(system.poly.critical_points),
            "points": points.tolist(),
        },
        header=("x", "weight"),
        rows=[(x, weight) for x in points],
    )


def run_ulam(config: RunConfig) -> Output:
    markov = load_map(config.map)  # type: ignore
    result = ulam_fixed_density(markov, config.bins)
    summary: Dict[str, Any] = {
        "map": markov.name,
        "bins": config.bins,
        "iterations": result.iterations,
        "residual": result.residual,
        "min_density": float(np.min(result.density)),
    }
    if config.samples is not None:
        histogram = orbit_histogram(markov, config.bins, config.samples, config.seed)  # type: ignore
        summary["orbit_l1"] = float(np.mean(np.abs(histogram - result.density)))
    edges = np.arange(config.bins + 1) / config.bins
    return Output(
        summary=summary,
        document={"map": markov.name, "residual": result.residual, "density": result.density.tolist()},
        header=("left", "right", "density"),
        rows=[(edges[i], edges[i + 1], result.density[i]) for i in range(config.bins)],
    )


def run_bohr(config: RunConfig) -> Output:
    filter = load_filter(config.filter)  # type: ignore
    kernel = MomentKernel(filter, _density(config, filter))
    points = nadic_grid(filter.scale, config.n, config.kmax)
    report = psd_check(kernel, points)
    rows = []
    for point in points:
        value = kernel.value(point)
        rows.append((point.numerator, point.depth, value.real, value.imag))
    verdict = PsdReportModel(
        min_eigenvalue=report.min_eigenvalue,
        passed=report.passed,
        hermitian_discrepancy=report.hermitian_discrepancy,
        size=report.size,
    )
    return Output(
        summary={"points": len(points), "min_eigenvalue": report.min_eigenvalue, "psd": report.passed},
        document={"table": [list(row) for row in rows], "psd": verdict.dict()},
        header=("n", "k", "re", "im"),
        rows=rows,
    )


HANDLERS: Dict[str, Callable[[RunConfig], Output]] = {
    "check": run_check,
    "eigenspace": run_eigenspace,
    "cascade": run_cascade,
    "moments": run_moments,
    "cocycle": run_cocycle,
    "cuntz": run_cuntz,
    "duality": run_duality,
    "julia": run_julia,
    "ulam": run_ulam,
    "bohr": run_bohr,
}


# --- entry points ----------------------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the full result to this path")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.json.value)
    common.add_argument("--grid", type=int, default=256)
    common.add_argument("--seed", type=int)
    common.add_argument("--eig-tol", dest="eig_tol", type=float)
    common.add_argument("--rank-rtol", dest="rank_rtol", type=float)

    parser = argparse.ArgumentParser(prog="ruelle-workbench", description="Ruelle transfer operator workbench")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return commands.add_parser(name, parents=[common], help=help)

    for name, help in (
        ("check", "quadrature and low-pass predicates of a filter"),
        ("eigenspace", "fixed space of the Ruelle operator"),
        ("cuntz", "Cuntz relations of the isometries S_0, S_1"),
    ):
        sub = add(name, help)
        sub.add_argument("--filter", required=True)
        if name == "cuntz":
            sub.add_argument("--h")

    sub = add("cascade", "iterate the cascade refinement operator from the unit box")
    sub.add_argument("--filter", required=True)
    sub.add_argument("--iters", type=int, default=8)
    sub.add_argument("--init", choices=[i.value for i in CascadeInit], default=CascadeInit.unitbox.value)

    for name, help in (("moments", "representation moment table"), ("cocycle", "cocycle transformed filter")):
        sub = add(name, help)
        sub.add_argument("--filter", required=True)
        sub.add_argument("--h")
        if name == "moments":
            sub.add_argument("--n", type=int, default=2, help="largest power n")
            sub.add_argument("--k", type=int, help="largest Ruelle power k (default n)")
            sub.add_argument("--fmax", type=int, default=2, help="largest exponent j of f = e_j")

    sub = add("duality", "scale-N against scale-p duality")
    sub.add_argument("--filter", required=True)
    sub.add_argument("--p", type=int, required=True)

    sub = add("julia", "real Julia interval and balanced-measure samples")
    sub.add_argument("--poly", required=True, help="coefficients from the highest degree down, comma separated")
    sub.add_argument("--samples", type=int)
    sub.add_argument("--depth", type=int, default=25)

    sub = add("ulam", "Ulam fixed density of a Markov map")
    sub.add_argument("--map", required=True, help=f"one of {sorted(MARKOV_CATALOG)} or a JSON path")
    sub.add_argument("--bins", type=int, default=64)
    sub.add_argument("--samples", type=int, help="also compare against an orbit histogram of this many steps")

    sub = add("bohr", "moment kernel table and positive definiteness")
    sub.add_argument("--filter", required=True)
    sub.add_argument("--h")
    sub.add_argument("--n", "--nmax", dest="n", type=int, default=4)
    sub.add_argument("--kmax", type=int, default=2)

    add("reproduce-paper", "run the full reproduction battery")
    return parser


def _apply_overrides(config: RunConfig) -> None:
    settings = get_settings()
    if config.eig_tol is not None:
        settings.eig_tol = config.eig_tol
    if config.rank_rtol is not None:
        settings.rank_rtol = config.rank_rtol
    settings.grid_size = config.grid


def _reproduce(out: Optional[Path]) -> int:
    outcomes = run_acceptance(record=logger.info)
    table = format_table(outcomes)
    print(table)
    if out is not None:
        out.write_text(table + "\n")
    return 0 if all(outcome.passed for outcome in outcomes) else 1


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        arguments = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        config = RunConfig(**{key: value for key, value in vars(arguments).items() if value is not None})
    except ValidationError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return 2

    try:
        _apply_overrides(config)
        if config.command == "reproduce-paper":
            return _reproduce(config.out)
        output = HANDLERS[config.command](config)
        print(_summary_line(output.summary))
        if config.out is not None:
            config.out.write_text(render(output, config.format))
        return 0
    except (WorkbenchError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        logger.exception("internal error while running %s", config.command)
        return 1


def main() -> None:
    logging.basicConfig(level=get_settings().log_level)
    sys.exit(run(sys.argv[1:]))
