"""Scenario files, parameter sweeps and the reference experiments.

Scenario files are flat JSON objects::

    {"gamma": 0.3, "beta1": 0.27, "beta2": 0.33,
     "lambda1": 10, "mu1": 10, "lambda2": 10, "mu2": 1,
     "N1r": 0.5, "N2r": 0.5, "N1c": 0.5, "N2c": 0.5,
     "sweep": {"p1_points": 201, "p2_points": 201}}

Optional keys: ``name``, ``description``, ``sweep``, ``reported_eta1`` /
``reported_eta2`` (tabulated values of ``lambda_i / (lambda_i + mu_i)``,
compared against the rates on load) and ``reference`` (expected outcomes
used by :func:`reproduce_tables`).
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import svg
from .errors import ValidationError
from .model import EpidemicParams, MobilityParams, PopulationSplit, Scenario
from .ngm import alpha_threshold, perron_root_2x2, q_coefficients
from .threshold_analysis import approx_threshold_grid, classify_monotonicity, eta, minimize_threshold

log = logging.getLogger(__name__)

EPIDEMIC_FIELDS = ("beta1", "beta2", "gamma")
MOBILITY_FIELDS = ("lambda1", "mu1", "lambda2", "mu2")
POPULATION_FIELDS = ("N1r", "N2r", "N1c", "N2c")
OPTIONAL_FIELDS = ("name", "description", "sweep", "reported_eta1", "reported_eta2", "reference")
BUNDLED_CASES = ("A", "B", "C")
ETA_REPORT_TOL = 1e-6
GAP_TOLERANCE = 2e-4
CSV_FORMAT = "{:.12g}"
THREADS_ENV = "COMMUTER_SIR_THREADS"


class ScenarioParseError(ValidationError):
    """The scenario file is not valid JSON."""


@dataclass(frozen=True)
class SweepGrid:
    p1_points: int = 201
    p2_points: int = 201

    def __post_init__(self):
        for name in ("p1_points", "p2_points"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 2:
                raise ValidationError(f"sweep.{name} must be an integer >= 2, got {v!r}")

    @classmethod
    def parse(cls, text: str) -> SweepGrid:
        """Parse ``"201x101"`` (p1 points x p2 points)."""
        try:
            a, b = text.lower().split("x")
            return cls(int(a), int(b))
        except ValueError:
            raise ValidationError(f"grid must look like P1xP2 (e.g. 201x201), got {text!r}") from None


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    name: str = ""
    description: str = ""
    sweep: Optional[SweepGrid] = None
    reported_eta: Optional[tuple[float, float]] = None
    reference: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


def _number(data: dict, key: str, where: str) -> float:
    if key not in data:
        raise ValidationError(f"{where}: missing field {key!r}")
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where}: field {key!r} must be a number, got {v!r}")
    return float(v)


def parse_scenario(data: dict, where: str = "<scenario>") -> ScenarioFile:
    """Validate a decoded scenario object."""
    if not isinstance(data, dict):
        raise ValidationError(f"{where}: top level must be a JSON object")
    known = set(EPIDEMIC_FIELDS + MOBILITY_FIELDS + POPULATION_FIELDS + OPTIONAL_FIELDS)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(f"{where}: unknown field(s) {', '.join(map(repr, unknown))}")

    try:
        scenario = Scenario(
            EpidemicParams(**{k: _number(data, k, where) for k in EPIDEMIC_FIELDS}),
            MobilityParams(**{k: _number(data, k, where) for k in MOBILITY_FIELDS}),
            PopulationSplit(**{k: _number(data, k, where) for k in POPULATION_FIELDS}),
        )
    except ValidationError as exc:
        if str(exc).startswith(where):
            raise
        raise ValidationError(f"{where}: {exc}") from None

    sweep = None
    if "sweep" in data:
        block = data["sweep"]
        if not isinstance(block, dict) or set(block) - {"p1_points", "p2_points"}:
            raise ValidationError(f"{where}: sweep must be an object with p1_points and p2_points")
        try:
            sweep = SweepGrid(**block)
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None

    warnings = []
    reported = None
    if "reported_eta1" in data or "reported_eta2" in data:
        reported = (_number(data, "reported_eta1", where), _number(data, "reported_eta2", where))
        computed = eta(scenario.mobility)
        for i, (rep, comp) in enumerate(zip(reported, (computed.eta1, computed.eta2)), start=1):
            if abs(rep - comp) > ETA_REPORT_TOL:
                warnings.append(
                    f"reported eta{i}={rep:g} differs from lambda{i}/(lambda{i}+mu{i})={comp:.7g}; "
                    f"the value computed from the rates is used")
    for w in warnings:
        log.warning("%s: %s", where, w)

    return ScenarioFile(
        scenario=scenario,
        name=str(data.get("name", "")),
        description=str(data.get("description", "")),
        sweep=sweep,
        reported_eta=reported,
        reference=dict(data.get("reference", {})),
        warnings=tuple(warnings),
    )


def _bundled_path(name: str) -> Optional[Path]:
    stem = Path(name).name
    if not stem.endswith(".json"):
        stem += ".json"
    candidate = resources.files("commuter_sir") / "data" / stem
    return Path(str(candidate)) if candidate.is_file() else None


def load_scenario_file(path) -> ScenarioFile:
    """Read and validate a scenario file.

    A missing path that names a bundled case (``case_A``, ``case_B.json``, ...)
    loads the bundled file instead.
    """
    path = Path(path)
    if not path.exists():
        bundled = _bundled_path(str(path))
        if bundled is None:
            raise FileNotFoundError(f"scenario file not found: {path}")
        path = bundled
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario(data, where=str(path))


def load_scenario(path) -> Scenario:
    return load_scenario_file(path).scenario


def bundled_case(case: str) -> ScenarioFile:
    """One of the reference cases ``"A"``, ``"B"``, ``"C"``."""
    if case not in BUNDLED_CASES:
        raise ValidationError(f"unknown bundled case {case!r}; choose from {BUNDLED_CASES}")
    return load_scenario_file(_bundled_path(f"case_{case}"))


def scenario_to_dict(scenario: Scenario, **extra) -> dict:
    epi, mob, pop = scenario.epidemic, scenario.mobility, scenario.population
    data = {k: getattr(epi, k) for k in EPIDEMIC_FIELDS}
    data.update({k: getattr(mob, k) for k in MOBILITY_FIELDS})
    data.update({k: getattr(pop, k) for k in POPULATION_FIELDS})
    data.update(extra)
    return data


def dump_scenario(scenario: Scenario, path, **extra) -> Path:
    """Write ``scenario`` as a scenario file (floats are written round-trip exact)."""
    path = Path(path)
    path.write_text(json.dumps(scenario_to_dict(scenario, **extra), indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = ("p1", "p2", "r12_exact", "r12_tilde", "q11", "q12", "q21", "q22", "alpha")


@dataclass(frozen=True)
class SweepResult:
    """Thresholds on a ``(p1, p2)`` grid; 2-D arrays are indexed ``[p2_index, p1_index]``."""

    p1: np.ndarray
    p2: np.ndarray
    r12_exact: np.ndarray
    r12_tilde: np.ndarray
    q11: np.ndarray
    q12: np.ndarray
    q21: np.ndarray
    q22: np.ndarray
    alpha: np.ndarray
    R1: float
    R2: float

    def __len__(self):
        return self.r12_exact.size

    @property
    def max_gap(self) -> float:
        """``max |R12~ - R12|`` over the grid."""
        return float(np.abs(self.r12_tilde - self.r12_exact).max())

    def rows(self):
        """Rows in row-major order: ``p2`` outer, ``p1`` inner."""
        for j, p2 in enumerate(self.p2):
            for i, p1 in enumerate(self.p1):
                yield (float(p1), float(p2), float(self.r12_exact[j, i]), float(self.r12_tilde[j, i]),
                       float(self.q11[j, i]), float(self.q12[j, i]), float(self.q21[j, i]),
                       float(self.q22[j, i]), float(self.alpha[j, i]))

    def argmin(self, exact: bool = True) -> tuple[float, float, float]:
        """``(p1, p2, value)`` of the grid minimum; ties go to the first row-major node."""
        values = self.r12_exact if exact else self.r12_tilde
        j, i = np.unravel_index(int(np.argmin(values)), values.shape)
        return float(self.p1[i]), float(self.p2[j]), float(values[j, i])

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            for row in self.rows():
                writer.writerow([CSV_FORMAT.format(v) for v in row])
        return path


def sweep_threads(requested: Optional[int] = None) -> int:
    """Worker count: ``requested``, else ``$COMMUTER_SIR_THREADS``; 0 means all CPUs."""
    if requested is None:
        env = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            requested = int(env)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if requested < 0:
        raise ValidationError("thread count must be >= 0")
    return requested or (os.cpu_count() or 1)


def _sweep_rows(scenario: Scenario, p1: np.ndarray, p2: np.ndarray):
    epi, mob = scenario.epidemic, scenario.mobility
    N1, N2 = scenario.population.N1, scenario.population.N2
    P1, P2 = np.meshgrid(p1, p2)
    N1c = (1.0 - P1) * N1
    N2c = (1.0 - P2) * N2
    N11 = mob.mu1 / (mob.lambda1 + mob.mu1) * N1c
    N21 = mob.lambda2 / (mob.lambda2 + mob.mu2) * N2c
    q11, q12, q21, q22 = q_coefficients(
        epi.R1, epi.R2, epi.gamma, mob.lambda1, mob.mu1, mob.lambda2, mob.mu2,
        P1 * N1, N11, N1c - N11, P2 * N2, N2c - N21, N21)
    exact = perron_root_2x2(q11, q12, q21, q22)
    _, alpha = alpha_threshold(epi.R1, epi.R2, q12, q21)
    tilde = approx_threshold_grid(scenario, N1c, N2c)
    return exact, tilde, q11, q12, q21, q22, alpha


def run_sweep(scenario: Scenario, p1_points: int = 201, p2_points: int = 201,
              threads: Optional[int] = None) -> SweepResult:
    """Exact and approximate thresholds on a uniform ``(p1, p2)`` grid of ``[0, 1]^2``.

    Patch sizes and rates come from ``scenario``; its own resident split is
    ignored. Rows of constant ``p2`` are spread over worker threads and
    reassembled in order, so the result does not depend on the worker count.
    """
    if p1_points < 1 or p2_points < 1:
        raise ValidationError("grid resolutions must be positive")
    p1 = np.linspace(0.0, 1.0, p1_points)
    p2 = np.linspace(0.0, 1.0, p2_points)
    workers = min(sweep_threads(threads), p2_points)
    chunks = np.array_split(np.arange(p2_points), workers)
    if workers == 1:
        parts = [_sweep_rows(scenario, p1, p2)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: _sweep_rows(scenario, p1, p2[idx]), chunks))
    columns = [np.vstack([part[k] for part in parts]) for k in range(7)]
    return SweepResult(p1, p2, *columns, R1=scenario.R1, R2=scenario.R2)


# ---------------------------------------------------------------------------
# figures

def _p2_label(p2: float) -> str:
    return f"{p2:.6g}"


def emit_figure_data(sweep: SweepResult, out_dir, stem: str = "figure",
                     title: str = "") -> list[Path]:
    """Write ``<stem>.csv`` (``p1`` then one ``R12`` column per ``p2``) and ``<stem>.svg``."""
    if len(sweep) == 0:
        raise ValidationError("empty sweep")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    svg_path = out_dir / f"{stem}.svg"

    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p1"] + [f"r12_p2={_p2_label(p2)}" for p2 in sweep.p2])
        for i, p1 in enumerate(sweep.p1):
            writer.writerow([CSV_FORMAT.format(p1)]
                            + [CSV_FORMAT.format(v) for v in sweep.r12_exact[:, i]])

    curves = [(_p2_label(p2), sweep.p1, sweep.r12_exact[j]) for j, p2 in enumerate(sweep.p2)]
    svg_path.write_text(svg.line_chart(
        curves, title=title, x_label="p1 (resident proportion in patch 1)",
        y_label="R12", reference_y=1.0, curve_attr="p2"))
    return [csv_path, svg_path]


# ---------------------------------------------------------------------------
# reference experiments

def _case_report(case: str, grid: int, figure_p2_points: int, threads, out_dir) -> dict:
    sf = bundled_case(case)
    scenario = sf.scenario
    computed_eta = eta(scenario.mobility)
    sweep = run_sweep(scenario, grid, grid, threads=threads)
    shape = classify_monotonicity(scenario, scenario.population.N2)
    best = minimize_threshold(scenario)
    p1_grid, p2_grid, r_grid = sweep.argmin(exact=True)
    ref = sf.reference

    report = {
        "scenario": scenario_to_dict(scenario),
        "eta": [computed_eta.eta1, computed_eta.eta2],
        "reported_eta": list(sf.reported_eta) if sf.reported_eta else None,
        "warnings": list(sf.warnings),
        "grid": [grid, grid],
        "max_gap": sweep.max_gap,
        "reference_max_gap": ref.get("max_gap"),
        "shape_at_N2c_eq_N2": shape.kind.value,
        "reference_shape": ref.get("shape"),
        "minimizer": best.to_dict(),
        "reference_minimizer": [ref.get("p1_star"), ref.get("p2_star")],
        "grid_argmin_exact": {"p1": p1_grid, "p2": p2_grid, "r12": r_grid},
    }
    if ref.get("max_gap") is not None:
        report["gap_within_tolerance"] = abs(sweep.max_gap - ref["max_gap"]) <= GAP_TOLERANCE
    if ref.get("shape"):
        report["shape_matches"] = shape.kind.value == ref["shape"]
    if "p2_star" in ref:
        p1_ok = (0.0 < best.p1_star < 1.0) if ref.get("p1_star") is None \
            else math.isclose(best.p1_star, ref["p1_star"], abs_tol=1e-12)
        report["minimizer_matches"] = p1_ok and math.isclose(best.p2_star, ref["p2_star"], abs_tol=1e-12)

    if out_dir is not None:
        fig = run_sweep(scenario, grid, figure_p2_points, threads=threads)
        paths = emit_figure_data(fig, out_dir, stem=f"figure_case_{case}",
                                 title=f"R12 versus p1, case {case}")
        report["figure_files"] = [p.name for p in paths]
    return report


def reproduce_tables(out_dir=None, grid: int = 201, figure_p2_points: int = 11,
                     threads: Optional[int] = None) -> dict:
    """Run the three reference cases: approximation quality, shape in ``N1c``,
    minimizer location, and (with ``out_dir``) figure data plus ``report.json``."""
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    report = {
        "grid_resolution": grid,
        "gap_tolerance": GAP_TOLERANCE,
        "cases": {c: _case_report(c, grid, figure_p2_points, threads, out_dir) for c in BUNDLED_CASES},
    }
    if out_dir is not None:
        (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
        with open(out_dir / "approximation_quality.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["case", "max_gap", "reference_max_gap", "grid"])
            for c, r in report["cases"].items():
                writer.writerow([c, CSV_FORMAT.format(r["max_gap"]),
                                 r["reference_max_gap"], grid])
    return report
