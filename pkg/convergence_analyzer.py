"""
Convergence Analyzer - slope fitting over sweep results
Loads the results CSV (or takes records directly), groups runs by problem
configuration and fits log-log slopes against (1 - s) and against h.
"""

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from config import Config
from error_norms import fit_slope
from errors import ConfigurationError, DomainError
from run_logging import log_status

SLOPE_METRICS = ("h1", "l2", "interface_abs")


def _float(value) -> float:
    if value is None or value == "":
        return math.nan
    return float(value)


def _order_key(value: float) -> float:
    return -math.inf if math.isnan(value) else value


@dataclass
class ConvergenceRecord:
    """One CSV row: run coordinates, error norms and wall time"""
    h: float
    s: float
    b: float
    sigma1: float
    sigma2: float
    sigma3: float
    alpha: float
    model: str
    l2: float = math.nan
    h1: float = math.nan
    energy: float = math.nan
    interface_abs: float = math.nan
    walltime_ms: float = math.nan

    # Not part of the CSV
    level: Optional[int] = field(default=None, compare=False)
    interface_value: Optional[float] = field(default=None, compare=False)
    c_star: Optional[float] = field(default=None, compare=False)

    @classmethod
    def from_run(cls, coords: Dict, report=None, walltime_ms=math.nan, interface_value=None, c_star=None):
        """Critical-contrast runs have no exact solution; their error columns stay NaN"""
        errors = report.as_dict() if report is not None else {}
        return cls(
            h=coords["h"], s=coords["s"], b=coords["b"], sigma1=coords["sigma1"], sigma2=coords["sigma2"],
            sigma3=coords["sigma3"], alpha=coords["alpha"], model=coords["model"],
            l2=errors.get("l2", math.nan), h1=errors.get("h1", math.nan),
            energy=errors.get("energy", math.nan), interface_abs=errors.get("interface_abs", math.nan),
            walltime_ms=walltime_ms, level=coords.get("level"),
            interface_value=interface_value, c_star=c_star,
        )

    @classmethod
    def from_row(cls, row: Dict[str, str]):
        missing = [c for c in Config.CSV_COLUMNS if c not in row]
        if missing:
            raise ConfigurationError(f"results CSV is missing columns: {', '.join(missing)}")
        values = {c: (row[c] if c == "model" else _float(row[c])) for c in Config.CSV_COLUMNS}
        return cls(**values)

    def as_row(self) -> Dict:
        return {c: getattr(self, c) for c in Config.CSV_COLUMNS}

    def error_dict(self) -> Dict[str, float]:
        return {"l2": self.l2, "h1": self.h1, "energy": self.energy, "interface_abs": self.interface_abs}

    def group_key(self) -> Tuple:
        sigma3 = None if math.isnan(self.sigma3) else self.sigma3
        return (self.model, self.b, self.sigma1, self.sigma2, sigma3, self.alpha)

    def sort_key(self) -> Tuple:
        return (self.model, self.b, self.sigma1, self.sigma2, _order_key(self.sigma3), self.alpha,
                self.h, _order_key(self.s))


def load_records(csv_path) -> List[ConvergenceRecord]:
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise ConfigurationError(f"results CSV not found: {csv_path}")
    with csv_path.open("r", newline="", encoding="utf-8") as f:
        try:
            return [ConvergenceRecord.from_row(row) for row in csv.DictReader(f)]
        except ValueError as exc:
            raise ConfigurationError(f"cannot read {csv_path}: {exc}") from exc


@dataclass
class SlopeFit:
    model: str
    b: float
    sigma1: float
    sigma2: float
    sigma3: Optional[float]  # None for the local models
    alpha: float
    against: str  # "1-s" at fixed h, or "h" along a coupled sequence
    metric: str
    slope: Optional[float]
    points: List[Tuple[float, float]]
    h: Optional[float] = None

    def as_dict(self) -> Dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "points"}
        out["points"] = [list(p) for p in self.points]
        return out


class ConvergenceAnalyzer:
    """Groups records by (model, b, sigma, alpha) and fits error slopes"""

    def __init__(self, records: Iterable[ConvergenceRecord] = (), metrics=SLOPE_METRICS):
        self.records = sorted(records, key=ConvergenceRecord.sort_key)
        self.metrics = tuple(metrics)
        for metric in self.metrics:
            if metric not in ("l2", "h1", "energy", "interface_abs"):
                raise ConfigurationError(f"unknown error metric {metric!r}")

    @classmethod
    def from_csv(cls, csv_path, metrics=SLOPE_METRICS):
        analyzer = cls(load_records(csv_path), metrics)
        log_status("ANALYZE", f"loaded {len(analyzer.records)} records from {csv_path}")
        return analyzer

    def groups(self) -> Dict[Tuple, List[ConvergenceRecord]]:
        grouped = defaultdict(list)
        for rec in self.records:
            grouped[rec.group_key()].append(rec)
        return dict(grouped)

    @staticmethod
    def _fit(key, against, metric, points, h=None) -> SlopeFit:
        try:
            slope = fit_slope(points)
        except DomainError:
            slope = None
        return SlopeFit(*key, against=against, metric=metric, slope=slope, points=points, h=h)

    def fits(self) -> List[SlopeFit]:
        """
        At fixed h, a group with >= 3 distinct s values gives a slope against (1 - s).
        A group with one run per h over >= 3 meshes (the coupled sequence) gives a slope against h.
        """
        out = []
        for key, recs in self.groups().items():
            by_h = defaultdict(list)
            for rec in recs:
                if not math.isnan(rec.s):
                    by_h[rec.h].append(rec)

            for h, at_h in sorted(by_h.items()):
                if len({r.s for r in at_h}) < 3:
                    continue
                for metric in self.metrics:
                    points = [(1.0 - r.s, getattr(r, metric)) for r in sorted(at_h, key=lambda r: r.s)]
                    out.append(self._fit(key, "1-s", metric, points, h=h))

            coupled = len(by_h) >= 3 and all(len(v) == 1 for v in by_h.values())
            if coupled:
                chain = sorted((v[0] for v in by_h.values()), key=lambda r: r.h)
                for metric in self.metrics:
                    out.append(self._fit(key, "h", metric, [(r.h, getattr(r, metric)) for r in chain]))
        return out

    def summary(self) -> List[Dict]:
        return [fit.as_dict() for fit in self.fits()]

    def slope(self, model, metric="h1", against="1-s", **coords) -> Optional[float]:
        """First fitted slope matching model/metric/against and any given b, sigma1, sigma2, alpha, h"""
        for fit in self.fits():
            if (fit.model, fit.metric, fit.against) != (model, metric, against):
                continue
            if all(getattr(fit, k) == v for k, v in coords.items()):
                return fit.slope
        return None

    def print_report(self, reference_slope=1.0):
        fits = self.fits()
        print(f"\n📈 CONVERGENCE SLOPES")
        print("=" * 72)
        if not fits:
            print("⚠️  No group has enough runs for a slope fit (need 3 orders at one h, or 3 coupled meshes)")
            return fits

        current = None
        for fit in fits:
            key = (fit.model, fit.b, fit.sigma1, fit.sigma2, fit.alpha, fit.against, fit.h)
            if key != current:
                current = key
                where = f"h={fit.h:.4g}" if fit.against == "1-s" else "coupled h-s"
                print(f"\n🔹 {fit.model:<11} b={fit.b:g} sigma=({fit.sigma1:g}, {fit.sigma2:g}) "
                      f"alpha={fit.alpha:g}  vs {fit.against} ({where})")
            if fit.slope is None:
                print(f"   ⚪ {fit.metric:<14} n/a ({len(fit.points)} points)")
                continue
            gap = abs(fit.slope - reference_slope)
            icon = "🟢" if gap <= 0.15 else ("🟡" if gap <= 0.3 else "🔴")
            print(f"   {icon} {fit.metric:<14} {fit.slope:7.3f} ({len(fit.points)} points)")
        return fits
