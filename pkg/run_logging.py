import json
import math
import uuid
import datetime as dt
from pathlib import Path

from config import Config
from version import DATA_FORMAT_VERSION, get_app_identifier

_STATUS_ICONS = {
    "info": "🔹",
    "ok": "✅",
    "warn": "⚠️ ",
    "error": "❌",
}


def log_status(tag, message, level="info"):
    """Console status line in the `<icon> [TAG] message` format"""
    if Config.QUIET:
        return
    icon = _STATUS_ICONS.get(level, _STATUS_ICONS["info"])
    print(f"{icon} [{tag}] {message}", flush=True)


def json_safe(value):
    """NaN / inf become null so every record stays strict JSON"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def _timestamp():
    return dt.datetime.now().isoformat(timespec="seconds")


def _append(rec, log_file):
    log_file = Path(log_file)
    log_file.parent.mkdir(parents=True, exist_ok=True)
    with log_file.open("a", encoding="utf-8") as f:
        f.write(json.dumps(json_safe(rec), ensure_ascii=False, allow_nan=False) + "\n")


def log_model_run(coords, report=None, walltime_ms=None, log_file=None, session_id=None,
                  error=None, extra=None):
    """
    Append one record per attempted model run (success or failure)

    coords: dict with h, s, b, sigma1, sigma2, sigma3, alpha, model
    report: dict of error norms (l2, h1, energy, interface_abs) or None on failure
    error: the exception that stopped the run, if any
    """
    rec = {
        "run_id": str(uuid.uuid4()),
        "session_id": session_id,
        "ts": _timestamp(),
        "config": coords,
        "status": "failed" if error is not None else "ok",
        "errors": report,
        "walltime_ms": round(walltime_ms, 3) if walltime_ms is not None else None,
        "error_class": getattr(error, "error_class", type(error).__name__) if error is not None else None,
        "error_message": str(error) if error is not None else None,
        "format_version": DATA_FORMAT_VERSION,
    }
    if extra:
        rec.update(extra)
    if log_file is None:
        log_file = Config.get_runs_log_file()
    _append(rec, log_file)
    return rec


def log_session_start(session_id, name, log_file=None, config=None):
    """Log the start of a sweep"""
    rec = {
        "event_type": "session_start",
        "session_id": session_id,
        "ts": _timestamp(),
        "name": name,
        "app": get_app_identifier(),
        "config": config,
        "format_version": DATA_FORMAT_VERSION,
    }
    if log_file is None:
        log_file = Config.get_runs_log_file()
    _append(rec, log_file)
    return rec


def log_session_end(session_id, name, total_runtime, runs_completed, runs_failed, log_file=None):
    """Log the end of a sweep with summary statistics"""
    rec = {
        "event_type": "session_end",
        "session_id": session_id,
        "ts": _timestamp(),
        "name": name,
        "session_runtime": round(total_runtime, 2) if total_runtime is not None else None,
        "runs_completed": runs_completed,
        "runs_failed": runs_failed,
        "format_version": DATA_FORMAT_VERSION,
    }
    if log_file is None:
        log_file = Config.get_runs_log_file()
    _append(rec, log_file)
    return rec


def read_records(log_file, event_type=None, max_reported_errors=10):
    """Load JSONL records, skipping malformed lines (the first few are reported)"""
    log_file = Path(log_file)
    if not log_file.exists():
        log_status("LOG", f"run log not found: {log_file}", "error")
        return []

    records = []
    with log_file.open("r", encoding="utf-8") as f:
        for line_num, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                if line_num <= max_reported_errors:
                    log_status("LOG", f"JSON decode error on line {line_num}: {e}", "warn")
                continue
            if event_type is None or rec.get("event_type") == event_type:
                records.append(rec)
    return records


def get_session_stats(session_id, log_file=None):
    """Completed/failed counts and total wall time for one session"""
    runs = [r for r in read_records(log_file or Config.get_runs_log_file())
            if r.get("session_id") == session_id and "run_id" in r]
    failed = [r for r in runs if r.get("status") == "failed"]
    return {
        "total_runs": len(runs),
        "failed_runs": len(failed),
        "total_walltime_ms": sum(r.get("walltime_ms") or 0.0 for r in runs),
        "runs": runs,
    }
