"""CSV and JSON rendering of bounds, optimizer tables, simulation reports and schedules."""
import csv
import io
import json
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional, Sequence

from jsonschema import Draft202012Validator

from .bound import BoundPoint
from .const import OUTPUT_FORMATS, ROUND_DIGITS, SCHEMA_NAMES
from .construction import EventSchedule
from .exceptions import InvalidParameters
from .optimizer import OptimizationResult
from .rational import format_fraction
from .simulator import BudgetCheck, SimulationReport


def format_value(value: Any, full_precision: bool = False) -> Any:
    """Render a cell: floats and fractions rounded to ROUND_DIGITS unless full precision is asked."""
    if value is None:
        return ""
    if isinstance(value, bool) or isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return format_fraction(value) if full_precision else f"{float(value):.{ROUND_DIGITS}f}"
    if isinstance(value, float):
        return repr(value) if full_precision else f"{value:.{ROUND_DIGITS}f}"
    return value


def _json_default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_fraction(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_csv(rows: Sequence[dict[str, Any]], full_precision: bool = False) -> str:
    """Render rows as comma separated values with a header row."""
    if not rows:
        return ""
    fieldnames: list[str] = []
    for row in rows:
        fieldnames.extend(key for key in row if key not in fieldnames)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n", restval="")
    writer.writeheader()
    writer.writerows({key: format_value(value, full_precision) for key, value in row.items()} for row in rows)
    return buffer.getvalue()


def render_json(document: Any) -> str:
    """Render a document as indented JSON, fractions as "p/q" strings."""
    return json.dumps(document, indent=2, default=_json_default) + "\n"


def render(
    rows: Sequence[dict[str, Any]],
    document: Any,
    fmt: str,
    full_precision: bool = False,
    schema: Optional[str] = None,
) -> str:
    """Render rows as CSV or the document as JSON, validated against the named schema when given."""
    if fmt not in OUTPUT_FORMATS:
        raise InvalidParameters(f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {fmt}")
    if fmt == "csv":
        return render_csv(rows, full_precision)
    text = render_json(document)
    if schema is not None:
        validator(schema).validate(json.loads(text))
    return text


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict[str, Any]:
    """Return the shipped JSON schema of an output: bound, optimize, simulate, export or trace_record."""
    if name not in SCHEMA_NAMES:
        raise InvalidParameters(f"schema must be one of {', '.join(SCHEMA_NAMES)}, got {name}")
    path = Path(__file__).parent / "schemas" / f"{name}.schema.json"
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def validator(name: str) -> Draft202012Validator:
    """Return a validator for the named schema."""
    return Draft202012Validator(load_schema(name))


def validate_document(name: str, document: Any) -> None:
    """Validate a document as it is written, fractions as strings; raises jsonschema.ValidationError."""
    validator(name).validate(json.loads(render_json(document)))


def write_output(text: str, path: Optional[str] = None) -> None:
    """Write text to path, or print it when no path is given."""
    if path is None:
        print(text, end="")
        return
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(text)


def _parameter_row(ell: int, lam: float, gammas: Sequence[float], value: float) -> dict[str, Any]:
    row: dict[str, Any] = {"ell": ell, "lambda": lam}
    for j, gamma in enumerate(gammas, start=1):
        row[f"gamma_{j}"] = gamma
    row["value"] = value
    return row


def bound_rows(points: Sequence[BoundPoint]) -> list[dict[str, Any]]:
    """Return one row per evaluated point."""
    return [_parameter_row(point.ell, point.lam, point.gammas, point.value) for point in points]


def bound_document(point: BoundPoint) -> dict[str, Any]:
    """Return a point with rounded and full precision value."""
    return {**point.to_dict(), "value_rounded": round(point.value, ROUND_DIGITS)}


def table_rows(results: Sequence[OptimizationResult]) -> list[dict[str, Any]]:
    """Return one row per optimum in the column layout ell, lambda, gammas, value."""
    rows = []
    for result in results:
        row = _parameter_row(result.ell, result.point.lam, result.point.gammas, result.point.value)
        row["converged"] = result.converged
        rows.append(row)
    return rows


def table_document(results: Sequence[OptimizationResult]) -> list[dict[str, Any]]:
    """Return optimizer results with rounded values next to the full ones."""
    return [{**result.to_dict(), "value_rounded": round(result.point.value, ROUND_DIGITS)} for result in results]


def simulation_rows(report: SimulationReport, checks: Sequence[BudgetCheck]) -> list[dict[str, Any]]:
    """Return one row per level with its measured values and per-level budget verdicts."""
    by_level: dict[tuple[str, int], BudgetCheck] = {(check.name, check.index): check for check in checks}
    rows = []
    for row in report.level_rows():
        i = row["i"]
        verdicts = []
        for name in ("recurrence", "closed_form", "v_level"):
            check = by_level.get((name, i))
            row[f"{name}_deviation"] = check.deviation if check else None
            row[f"{name}_budget"] = check.budget if check else None
            if check:
                verdicts.append(check.passed)
        row["passed"] = all(verdicts)
        rows.append(row)
    return rows


def simulation_document(
    report: SimulationReport, checks: Sequence[BudgetCheck], prediction: Optional[Fraction] = None
) -> dict[str, Any]:
    """Return the full report together with every budget verdict."""
    document = report.to_dict()
    document["checks"] = [
        {
            "name": check.name,
            "index": check.index,
            "deviation": float(check.deviation),
            "budget": float(check.budget),
            "passed": check.passed,
        }
        for check in checks
    ]
    document["passed"] = all(check.passed for check in checks)
    if prediction is not None:
        document["predicted_ratio"] = format_fraction(prediction)
    return document


def schedule_rows(schedule: EventSchedule) -> list[dict[str, Any]]:
    """Return one row per phase of the schedule."""
    return schedule.to_records()


def schedule_document(schedule: EventSchedule) -> dict[str, Any]:
    """Return the instance and its phases."""
    return {
        "params": schedule.params.to_dict(),
        "sizes": list(schedule.sizes.sizes),
        "vertex_count": schedule.vertex_count,
        "phases": schedule.to_records(),
    }
