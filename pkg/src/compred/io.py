"""Loading, validating and writing the JSON formats used by the command line.

Every format has a versioned schema under ``compred/schemas``.  Errors carry
the file name plus a line/column (syntax errors) or a JSON pointer (schema and
invariant errors).
"""
from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from .machina.machine import MalformedMachine, MultiTapeTM
from .relcore import PartitionSchedule, PreorderTable, validate_schedule
from .stagecraft import REFeed, SegmentFeed

__all__ = [
    "InputError",
    "Issue",
    "KINDS",
    "load_json",
    "detect_kind",
    "check_document",
    "load_document",
    "to_jsonable",
    "dumps_report",
    "write_report",
    "csv_table",
    "read_log",
]

KINDS = ("schedule", "feed", "segments", "machine", "preorder", "scenario", "stagecraft")


@dataclass(frozen=True)
class Issue:
    where: str  # JSON pointer or "line:col"
    message: str

    def render(self, path) -> str:
        return f"{path}:{self.where}: {self.message}"


class InputError(ValueError):
    def __init__(self, path, issues: Iterable[Issue]):
        self.path = str(path)
        self.issues = list(issues)
        super().__init__("\n".join(i.render(self.path) for i in self.issues))


def _pointer(parts) -> str:
    out = "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)
    return out or "/"


@lru_cache(maxsize=None)
def _schemas() -> tuple:
    root = resources.files("compred") / "schemas"
    docs = {}
    for kind in KINDS:
        docs[kind] = json.loads((root / f"{kind}.v1.json").read_text(encoding="utf-8"))
    registry = Registry().with_resources(
        (doc["$id"], Resource.from_contents(doc)) for doc in docs.values())
    return docs, registry


def _validator(kind: str) -> Draft202012Validator:
    docs, registry = _schemas()
    return Draft202012Validator(docs[kind], registry=registry)


def load_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(path, [Issue("-", f"cannot read file: {exc.strerror or exc}")]) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(path, [Issue(f"{exc.lineno}:{exc.colno}", exc.msg)]) from None


def detect_kind(data: Any) -> Optional[str]:
    if not isinstance(data, dict):
        return None
    fmt = data.get("format")
    if isinstance(fmt, str) and fmt.endswith(".v1") and fmt[:-3] in KINDS:
        return fmt[:-3]
    keys = set(data)
    if "stable_from" in keys:
        return "schedule"
    if "depth" in keys and "feeds" in keys:
        return "scenario"
    if "transitions" in keys:
        return "machine"
    if "segments" in keys:
        return "segments"
    if "events" in keys:
        return "feed"
    if keys & {"S", "T", "A", "P", "Wi", "Wj"}:
        return "stagecraft"
    if "n" in keys and keys & {"pairs", "leq"}:
        return "preorder"
    return None


def _schema_issues(data, kind: str) -> list:
    errs = sorted(_validator(kind).iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    return [Issue(_pointer(e.absolute_path), e.message) for e in errs]


def _schedule_issues(data) -> list:
    sched = PartitionSchedule.from_json(data)
    out = []
    for t, msg in validate_schedule(sched).violations:
        out.append(Issue(_pointer(["stages", t]) if t is not None else "/", msg))
    return out


def _feed_issues(data, base=()) -> list:
    try:
        REFeed.from_json(data)
    except ValueError as exc:
        return [Issue(_pointer([*base, "events"]), str(exc))]
    return []


def _segments_issues(data, base=()) -> list:
    try:
        SegmentFeed.from_json(data)
    except ValueError as exc:
        return [Issue(_pointer([*base, "segments"]), str(exc))]
    return []


def _preorder(data) -> PreorderTable:
    n = data["n"]
    if "leq" in data:
        return PreorderTable(np.array(data["leq"], dtype=bool).reshape(n, n))
    return PreorderTable.from_pairs(n, [tuple(p) for p in data["pairs"]])


def _preorder_issues(data) -> list:
    n = data["n"]
    if "leq" in data:
        rows = data["leq"]
        if len(rows) != n or any(len(r) != n for r in rows):
            return [Issue("/leq", f"leq must be an {n}x{n} matrix")]
        return [Issue("/leq", v) for v in _preorder(data).check()]
    for k, (a, b) in enumerate(data["pairs"]):
        if not (a < n and b < n):
            return [Issue(_pointer(["pairs", k]), f"point outside range({n})")]
    return []


def _machine_issues(data) -> list:
    try:
        MultiTapeTM.from_json(data)
    except (MalformedMachine, ValueError) as exc:
        return [Issue("/transitions", str(exc))]
    return []


def _scenario_issues(data) -> list:
    from .injury.scenario import Scenario, ScenarioError, functional_from_json

    out = []
    for k, f in enumerate(data.get("functionals", [])):
        try:
            functional_from_json(f)
        except (ScenarioError, MalformedMachine, KeyError, ValueError) as exc:
            out.append(Issue(_pointer(["functionals", k]), str(exc)))
    if out:
        return out
    try:
        Scenario.from_json(data)
    except ScenarioError as exc:
        return [Issue("/feeds", str(exc))]
    return []


def _stagecraft_issues(data) -> list:
    out = []
    for key in ("S", "T", "A", "Wi", "Wj"):
        if key in data:
            out += _feed_issues(data[key], (key,))
    if "P" in data:
        out += _segments_issues(data["P"], ("P",))
    return out


_SEMANTIC = {
    "schedule": _schedule_issues,
    "feed": _feed_issues,
    "segments": _segments_issues,
    "machine": _machine_issues,
    "preorder": _preorder_issues,
    "scenario": _scenario_issues,
    "stagecraft": _stagecraft_issues,
}


def check_document(data: Any, kind: Optional[str] = None) -> tuple:
    """``(kind, issues)``: schema errors first; invariants only on schema-clean input."""
    kind = kind or detect_kind(data)
    if kind is None:
        return None, [Issue("/", "unrecognised document: cannot tell which format it is")]
    issues = _schema_issues(data, kind)
    if issues:
        return kind, issues
    return kind, _SEMANTIC[kind](data)


def load_document(path, kind: str):
    """Parse, validate and build the in-memory object for ``kind``."""
    data = load_json(path)
    found, issues = check_document(data, kind)
    if issues:
        raise InputError(path, issues)
    if kind == "schedule":
        return PartitionSchedule.from_json(data)
    if kind == "feed":
        return REFeed.from_json(data)
    if kind == "segments":
        return SegmentFeed.from_json(data)
    if kind == "machine":
        return MultiTapeTM.from_json(data)
    if kind == "preorder":
        return _preorder(data)
    if kind == "scenario":
        from .injury.scenario import Scenario

        return Scenario.from_json(data)
    return data


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def csv_table(rows: list, columns: Optional[list] = None) -> str:
    # first-seen key order keeps n0, n1, ..., n10 in sequence
    columns = columns or list(dict.fromkeys(k for r in rows for k in r))
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(to_jsonable(v)) if isinstance(v, (list, dict)) else to_jsonable(v)
                    for k, v in r.items()})
    return buf.getvalue()


def dumps_report(report: dict, fmt: str = "json") -> str:
    """Stable text for a report: sorted keys for JSON; the ``rows`` table for CSV."""
    if fmt == "json":
        return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        rows = report.get("rows")
        if rows is None:
            rows = [{"key": k, "value": v} for k, v in sorted(report.items())
                    if not isinstance(v, (dict, list))]
            return csv_table(rows, ["key", "value"])
        return csv_table(rows)
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(report: dict, path, fmt: str = "json") -> None:
    Path(path).write_text(dumps_report(report, fmt), encoding="utf-8")


def read_log(path) -> list:
    """Events of a JSON-lines run log; a malformed line raises with its line number."""
    path = Path(path)
    out = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(path, [Issue("-", f"cannot read file: {exc.strerror or exc}")]) from None
    for n, line in enumerate(lines, 1):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(path, [Issue(f"{n}:{exc.colno}", exc.msg)]) from None
        missing = {"stage", "kind", "node"} - set(rec)
        if missing:
            raise InputError(path, [Issue(f"{n}:1", f"event lacks {sorted(missing)}")])
        out.append(rec)
    return out
