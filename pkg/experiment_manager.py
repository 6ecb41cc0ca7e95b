"""
Sweep management for fractrans
Run configurations, presets, the (model, s, level) job grid, the worker pool,
and the CSV / manifest / run-log outputs of a session.
"""

import csv
import json
import math
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from config import Config
from convergence_analyzer import ConvergenceAnalyzer, ConvergenceRecord
from error_norms import compute_errors
from errors import (
    ConfigurationError, CriticalContrastError, DomainError, FractransError,
)
from exact_local import build_exact
from lifting import c_tilde, contrast_is_critical
from mesh_interface import RationalInterface, build_mesh
from run_logging import json_safe, log_model_run, log_session_end, log_session_start, log_status
from solvers import COMPUTED_MODELS, ModelKind, ModelSolution, ProblemConfig, run_model
from utils import format_float, format_time, parse_float_list, parse_int_list
from version import DATA_FORMAT_VERSION, get_app_identifier, get_stack_versions


# ============================================================================
# RUN CONFIGURATION
# ============================================================================

@dataclass
class RunConfig:
    """One sweep: a fixed (b, sigma, alpha) and a grid of models, orders and levels"""
    name: str = "run"
    b: RationalInterface = field(default_factory=lambda: RationalInterface(1, 2))
    sigma1: float = 1.0
    sigma2: float = 1.0
    sigma3: str = "average"  # "zero", "average" or a number; applies to the old model
    alpha: float = 0.0
    s_values: List[float] = field(default_factory=list)
    levels: List[int] = field(default_factory=list)
    models: List[ModelKind] = field(default_factory=lambda: list(COMPUTED_MODELS))
    coupled: bool = False
    allow_critical: bool = False

    @property
    def critical(self) -> bool:
        return contrast_is_critical(self.b.value, self.sigma1, self.sigma2)

    def sigma3_for(self, kind: ModelKind) -> Optional[float]:
        """Cross coefficient handed to ProblemConfig (None = the model default)"""
        if kind != ModelKind.OLD:
            return None
        policy = str(self.sigma3).strip().lower()
        if policy == "average":
            return None
        if policy == "zero":
            return 0.0
        try:
            return float(policy)
        except ValueError as exc:
            raise ConfigurationError(
                f"sigma3 must be 'zero', 'average' or a number (got {self.sigma3!r})") from exc

    def validate(self) -> "RunConfig":
        if not self.models:
            raise ConfigurationError(f"[{self.name}] no models requested")
        if not self.levels:
            raise ConfigurationError(f"[{self.name}] no refinement levels requested")
        if self.sigma1 == 0.0 or self.sigma2 == 0.0:
            raise DomainError(f"[{self.name}] sigma1 and sigma2 must be nonzero")
        if self.alpha <= -0.5:
            raise DomainError(f"[{self.name}] source exponent alpha={self.alpha} must exceed -1/2")
        if any(level < 0 for level in self.levels):
            raise DomainError(f"[{self.name}] refinement levels must be >= 0")
        build_mesh(self.b, max(self.levels))  # CapacityError before any run
        self.sigma3_for(ModelKind.OLD)

        if self.critical:
            if not self.allow_critical:
                raise CriticalContrastError(
                    f"[{self.name}] sigma2/sigma1 = {self.sigma2 / self.sigma1:g} is the critical ratio "
                    f"for b={self.b}; pass allow_critical to run the fractional models only")
            self.models = [m for m in self.models if m.fractional]
            if not self.models:
                raise ConfigurationError(f"[{self.name}] critical contrast leaves no model to run")

        if not self.coupled and any(m.fractional for m in self.models) and not self.s_values:
            raise ConfigurationError(f"[{self.name}] fractional models need at least one s value")
        for s in self.orders():
            if not (0.0 < s < 1.0):
                raise DomainError(f"[{self.name}] s={s} outside (0, 1)")
            if s > Config.MAX_ORDER:
                raise DomainError(f"[{self.name}] s={s} exceeds {Config.MAX_ORDER}")
            if any(m.reconstructed for m in self.models) and s <= 0.5:
                raise DomainError(f"[{self.name}] reconstructed models need s in (1/2, 1), got {s}")
        return self

    def orders(self) -> List[float]:
        if self.coupled:
            return [s for _, s in coupled_sequence(self.b, self.levels)]
        return list(self.s_values)

    def jobs(self) -> List["RunJob"]:
        if self.coupled:
            pairs = coupled_sequence(self.b, self.levels)
        else:
            pairs = [(level, s) for s in (self.s_values or [None]) for level in self.levels]
        jobs = []
        for model in self.models:
            if model.fractional:
                jobs.extend(RunJob(self, model, level, s) for level, s in pairs)
            else:
                # local models ignore s: one run per level
                jobs.extend(RunJob(self, model, level, None) for level in dict.fromkeys(lv for lv, _ in pairs))
        return jobs

    def describe(self) -> Dict:
        return {
            "name": self.name, "b": str(self.b), "sigma1": self.sigma1, "sigma2": self.sigma2,
            "sigma3": self.sigma3, "alpha": self.alpha, "s": list(self.s_values),
            "levels": list(self.levels), "models": [m.value for m in self.models],
            "coupled": self.coupled, "allow_critical": self.allow_critical,
        }


def coupled_sequence(b, levels) -> List[Tuple[int, float]]:
    """(level, s) pairs with 1 - s = h / 4"""
    if not isinstance(b, RationalInterface):
        b = RationalInterface.parse(b)
    return [(k, 1.0 - 0.25 / (b.q * 2 ** k)) for k in levels]


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigurationError(f"cannot read boolean {value!r}")


def _as_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [chunk for chunk in str(value).replace(",", " ").split() if chunk]


def run_config_from_mapping(data: Dict, base: Optional[RunConfig] = None) -> RunConfig:
    """Apply the recognised keys of a flat mapping on top of `base` (None values are skipped)"""
    config = replace(base) if base is not None else RunConfig()
    known = {"name", "b", "sigma1", "sigma2", "sigma3", "alpha", "s", "levels", "models",
             "coupled", "allow_critical"}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown run configuration keys: {', '.join(sorted(unknown))}")
    try:
        for key, value in data.items():
            if value is None:
                continue
            if key == "b":
                config.b = value if isinstance(value, RationalInterface) else RationalInterface.parse(value)
            elif key in ("sigma1", "sigma2", "alpha"):
                setattr(config, key, float(value))
            elif key == "sigma3":
                config.sigma3 = str(value)
            elif key == "s":
                config.s_values = parse_float_list(value)
            elif key == "levels":
                config.levels = parse_int_list(value)
            elif key == "models":
                config.models = [ModelKind.parse(m) for m in _as_list(value)]
            elif key in ("coupled", "allow_critical"):
                setattr(config, key, _as_bool(value))
            else:
                config.name = str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid run configuration value: {exc}") from exc
    return config


def load_run_config(path, overrides: Optional[Dict] = None) -> RunConfig:
    """Read a flat YAML mapping; CLI overrides win over file values"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    with path.open("r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a key-value mapping")
    data.setdefault("name", path.stem)
    config = run_config_from_mapping(data)
    if overrides:
        config = run_config_from_mapping(overrides, base=config)
    return config


# ============================================================================
# PRESETS
# ============================================================================

TEST_A_ORDERS = [1.0 - 4e-2, 1.0 - 1e-2, 1.0 - 2.5e-3, 1.0 - 5e-4]

# (b, sigma1, sigma2) with dyadic b; level chosen so that h = 2^-9
TEST_A_SLOPE_CASES = (("1/2", 1.0, 1.0), ("1/2", 1.0, -0.5), ("3/4", 1.0, -1.0), ("3/4", 1.0, -2.0))


def level_for_h(b, h) -> int:
    """Refinement level k with 1/(q 2^k) = h"""
    if not isinstance(b, RationalInterface):
        b = RationalInterface.parse(b)
    k = math.log2(1.0 / (h * b.q))
    if abs(k - round(k)) > 1e-9 or round(k) < 0:
        raise ConfigurationError(f"h={h} is not reachable from b={b} by dyadic refinement")
    return int(round(k))


def _preset_test_a(name, s, alpha):
    b = RationalInterface(1, 2)
    return [RunConfig(name=name, b=b, sigma1=1.0, sigma2=1.0, alpha=alpha, s_values=[s],
                      levels=[level_for_h(b, 2.0 ** -9)])]


def _preset_test_a_slopes():
    configs = []
    for text, s1, s2 in TEST_A_SLOPE_CASES:
        b = RationalInterface.parse(text)
        tag = f"b{b.p}_{b.q}_s2{s2:g}".replace("-", "m").replace(".", "p")
        configs.append(RunConfig(name=f"test_a_slopes_{tag}", b=b, sigma1=s1, sigma2=s2, alpha=0.0,
                                 s_values=list(TEST_A_ORDERS), levels=[level_for_h(b, 2.0 ** -9)],
                                 models=[ModelKind.NEW, ModelKind.SIMPLIFIED]))
    return configs


def _preset_test_b(name, b, s1, s2, alpha):
    return [RunConfig(name=name, b=RationalInterface.parse(b), sigma1=s1, sigma2=s2, alpha=alpha,
                      levels=list(range(4, 10)), coupled=True,
                      models=[ModelKind.NEW, ModelKind.SIMPLIFIED])]


PRESETS = {
    "test_a1": lambda: _preset_test_a("test_a1", 0.75, 0.0),
    "test_a2": lambda: _preset_test_a("test_a2", 0.9, 1.0),
    "test_a_slopes": _preset_test_a_slopes,
    "test_b1": lambda: _preset_test_b("test_b1", "1/2", 1.0, 1.0, 0.0),
    "test_b2": lambda: _preset_test_b("test_b2", "3/4", 1.0, -1.0, 1.0),
}


def preset(name) -> List[RunConfig]:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r} (available: {', '.join(sorted(PRESETS))})")
    return PRESETS[name]()


# ============================================================================
# JOBS
# ============================================================================

@dataclass(frozen=True)
class RunJob:
    config: RunConfig
    model: ModelKind
    level: int
    s: Optional[float]

    def problem(self) -> ProblemConfig:
        c = self.config
        return ProblemConfig(b=c.b, sigma1=c.sigma1, sigma2=c.sigma2, alpha=c.alpha, s=self.s,
                             sigma3=c.sigma3_for(self.model))

    def coordinates(self) -> Dict:
        mesh_h = 1.0 / (self.config.b.q * 2 ** self.level)
        problem = self.problem()
        sigma3 = problem.coefficients(self.model).sigma3 if self.model.fractional else math.nan
        return {
            "h": mesh_h, "s": self.s if self.s is not None else math.nan, "b": self.config.b.value,
            "sigma1": self.config.sigma1, "sigma2": self.config.sigma2, "sigma3": sigma3,
            "alpha": self.config.alpha, "model": self.model.value, "level": self.level,
            "config": self.config.name,
        }


@dataclass
class RunOutcome:
    job: RunJob
    record: Optional[ConvergenceRecord]
    solution: Optional[ModelSolution] = None
    error: Optional[Exception] = None
    walltime_ms: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None


def execute_job(job: RunJob, keep_solution=False) -> RunOutcome:
    """Run one model on one mesh and measure it against the exact local solution"""
    coords = job.coordinates()
    start = time.perf_counter()
    try:
        mesh = build_mesh(job.config.b, job.level)
        problem = job.problem()
        solution = run_model(job.model, problem, mesh)
        walltime = (time.perf_counter() - start) * 1000.0
        if job.config.critical:
            report = None
        else:
            exact = build_exact(mesh.b, problem.sigma1, problem.sigma2, problem.alpha)
            report = compute_errors(solution, exact, mesh, job.s)
    except FractransError as exc:
        return RunOutcome(job, None, error=exc, walltime_ms=(time.perf_counter() - start) * 1000.0)
    except Exception as exc:
        # numpy / scipy failures must not take down the rest of the pool
        log_status("RUN", f"{coords['model']} level={coords['level']}: unexpected "
                          f"{type(exc).__name__}: {exc}", "error")
        return RunOutcome(job, None, error=exc, walltime_ms=(time.perf_counter() - start) * 1000.0)

    record = ConvergenceRecord.from_run(coords, report, walltime, interface_value=solution.interface_value,
                                        c_star=solution.c_star)
    return RunOutcome(job, record, solution if keep_solution else None, walltime_ms=walltime)


# ============================================================================
# OUTPUT
# ============================================================================

def write_results_csv(path, records: Sequence[ConvergenceRecord]) -> Path:
    """Exact column list of Config.CSV_COLUMNS, '%.17g' floats, deterministic order"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = Config.CSV_FLOAT_FORMAT
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(Config.CSV_COLUMNS)
        for rec in sorted(records, key=ConvergenceRecord.sort_key):
            row = rec.as_row()
            writer.writerow([value if isinstance(value, str) else format_float(value, fmt)
                             for value in (row[column] for column in Config.CSV_COLUMNS)])
    return path


def write_profile_csv(path, solutions: Sequence[ModelSolution], oversampling=None) -> Path:
    """x plus one value column per model, on the finest common oversampled grid"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    factor = Config.PROFILE_OVERSAMPLING if oversampling is None else oversampling
    n = max(sol.mesh.n_cells for sol in solutions) * factor
    xs = [i / n for i in range(n + 1)]
    columns = [sol.evaluate(xs) for sol in solutions]
    fmt = Config.CSV_FLOAT_FORMAT
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["x"] + [sol.kind.value for sol in solutions])
        for k, x in enumerate(xs):
            writer.writerow([fmt % x] + [fmt % col[k] for col in columns])
    return path


def write_solution_csv(path, solution: ModelSolution, oversampling=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x, values = solution.profile(oversampling)
    fmt = Config.CSV_FLOAT_FORMAT
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "value"])
        for xi, vi in zip(x, values):
            writer.writerow([fmt % xi, fmt % vi])
    return path


# ============================================================================
# SESSION
# ============================================================================

class ExperimentSession:
    """Runs a list of configurations through a worker pool and writes the session outputs"""

    def __init__(self, configs: Sequence[RunConfig], out_dir=None, name=None, threads=None):
        if not configs:
            raise ConfigurationError("no run configuration given")
        self.configs = [c.validate() for c in configs]
        self.name = name or self.configs[0].name
        self.out_dir = Config.get_output_dir(out_dir)
        self.threads = threads or Config.get_thread_count()
        self.log_file = Config.get_runs_log_file(self.out_dir)

        self.session_id = None
        self.session_start_time = None
        self.outcomes: List[RunOutcome] = []

    @property
    def session_dir(self) -> Path:
        return self.out_dir / self.name

    def start_session(self):
        self.session_id = str(uuid.uuid4())
        self.session_start_time = time.time()
        self.outcomes = []
        log_session_start(self.session_id, self.name, self.log_file,
                          config=[c.describe() for c in self.configs])
        log_status("SESSION", f"{self.name}: {sum(len(c.jobs()) for c in self.configs)} runs "
                              f"on {self.threads} worker(s)")
        return {"session_id": self.session_id, "start_time": self.session_start_time}

    def run_all(self) -> List[RunOutcome]:
        if not self.session_id:
            self.start_session()
        jobs = [job for config in self.configs for job in config.jobs()]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            outcomes = list(pool.map(execute_job, jobs))

        for outcome in outcomes:
            coords = outcome.job.coordinates()
            if outcome.ok:
                log_model_run(coords, outcome.record.error_dict(), outcome.walltime_ms, self.log_file,
                              self.session_id)
            else:
                log_model_run(coords, None, outcome.walltime_ms, self.log_file, self.session_id,
                              error=outcome.error)
                log_status("RUN", f"{coords['model']} level={coords['level']} s={coords['s']:g} failed: "
                                  f"{outcome.error}", "error")
        self.outcomes = outcomes
        return outcomes

    @property
    def records(self) -> List[ConvergenceRecord]:
        return [o.record for o in self.outcomes if o.ok]

    def write_outputs(self) -> Dict[str, Path]:
        csv_path = write_results_csv(self.session_dir / "results.csv", self.records)
        analyzer = ConvergenceAnalyzer(self.records)
        manifest = {
            "app": get_app_identifier(),
            "format_version": DATA_FORMAT_VERSION,
            "session_id": self.session_id,
            "name": self.name,
            "configs": [c.describe() for c in self.configs],
            "versions": get_stack_versions(),
            "csv": csv_path.name,
            "slopes": analyzer.summary(),
            "runs": [self._manifest_entry(o) for o in self.outcomes],
        }
        manifest_path = self.session_dir / Config.MANIFEST_FILE
        manifest_path.parent.mkdir(parents=True, exist_ok=True)
        with manifest_path.open("w", encoding="utf-8") as f:
            json.dump(json_safe(manifest), f, indent=2, ensure_ascii=False, allow_nan=False)
        return {"csv": csv_path, "manifest": manifest_path}

    @staticmethod
    def _manifest_entry(outcome: RunOutcome) -> Dict:
        entry = outcome.job.coordinates()
        entry["status"] = "ok" if outcome.ok else "failed"
        entry["walltime_ms"] = round(outcome.walltime_ms, 3)
        if outcome.ok:
            entry["errors"] = outcome.record.error_dict()
        else:
            entry["error_class"] = getattr(outcome.error, "error_class", type(outcome.error).__name__)
            entry["error_message"] = str(outcome.error)
        return entry

    def end_session(self):
        if not self.session_id:
            return None
        runtime = time.time() - self.session_start_time
        failed = sum(1 for o in self.outcomes if not o.ok)
        log_session_end(self.session_id, self.name, runtime, len(self.outcomes) - failed, failed, self.log_file)
        level = "ok" if failed == 0 else "warn"
        log_status("SESSION", f"{self.name}: {len(self.outcomes) - failed} ok, {failed} failed "
                              f"in {format_time(runtime)}", level)
        summary = {"session_id": self.session_id, "runtime": runtime,
                   "runs_completed": len(self.outcomes) - failed, "runs_failed": failed}
        self.session_id = None
        return summary

    def run(self) -> Dict[str, Path]:
        """start, run every job, write CSV + manifest, end"""
        self.start_session()
        self.run_all()
        paths = self.write_outputs()
        self.end_session()
        return paths


# ============================================================================
# MODEL COMPARISON
# ============================================================================

def compare_models(config: RunConfig, level: int, s: float, models: Optional[Sequence[ModelKind]] = None):
    """
    Run several models on one (b, sigma, alpha, s, level) configuration

    Returns the outcomes in model order; failures are kept as outcomes with an error.
    """
    models = list(models or [ModelKind.LOCAL_EXACT, *COMPUTED_MODELS])
    single = replace(config, s_values=[s], levels=[level], models=models, coupled=False)
    single.validate()
    outcomes = [execute_job(RunJob(single, model, level, s if model.fractional else None), keep_solution=True)
                for model in single.models]
    for outcome in outcomes:
        if not outcome.ok:
            log_status("COMPARE", f"{outcome.job.model.value} failed: {outcome.error}", "error")
    return outcomes


def interface_summary(config: RunConfig, s: Optional[float]) -> Dict[str, float]:
    """c~ and, for s in (1/2, 1), c* of a configuration"""
    from assembly import CoefficientField, interface_scalars

    out = {"c_tilde": c_tilde(config.b.value, config.sigma1, config.sigma2)}
    if s is not None and 0.5 < s < 1.0:
        try:
            _, _, out["c_star"] = interface_scalars(config.b.value, CoefficientField(config.sigma1, config.sigma2), s)
        except FractransError as exc:
            log_status("COMPARE", f"c* unavailable: {exc}", "warn")
    return out
