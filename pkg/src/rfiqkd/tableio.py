"""Lossless CSV and JSON serialization of sweep rows."""

import csv
import json
import math

from .rates import ProtocolKind
from .sweep import SweepRow

COLUMNS = ("theta", "theta_over_pi", "delta", "delta_over_pi", "p",
           "protocol", "qber", "qber_err", "c_param", "c_param_err",
           "rate_raw", "rate_clamped")


class TableFormatError(ValueError):
    """Raised when a table file does not follow the sweep row schema."""


def _fmt(value: float | None) -> str:
    # 17 significant digits round-trip any double exactly
    return "" if value is None else format(value, ".17g")


def _row_cells(row: SweepRow) -> dict[str, str]:
    return {
        "theta": _fmt(row.theta),
        "theta_over_pi": _fmt(row.theta / math.pi),
        "delta": _fmt(row.delta),
        "delta_over_pi": _fmt(row.delta / math.pi),
        "p": _fmt(row.p),
        "protocol": row.protocol.value,
        "qber": _fmt(row.qber),
        "qber_err": _fmt(row.qber_err),
        "c_param": _fmt(row.c_param),
        "c_param_err": _fmt(row.c_param_err),
        "rate_raw": _fmt(row.rate_raw),
        "rate_clamped": _fmt(row.rate_clamped),
    }


def write_csv(rows: list[SweepRow], path: str) -> None:
    """Header plus one line per row, LF endings, '.' decimals."""
    with open(path, "w", encoding="ascii", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(_row_cells(row))


def write_json(rows: list[SweepRow], path: str) -> None:
    """Array of objects with the CSV's field names; absent values are null."""
    payload = []
    for row in rows:
        cells = _row_cells(row)
        obj = {}
        for name in COLUMNS:
            if name == "protocol":
                obj[name] = cells[name]
            else:
                obj[name] = None if cells[name] == "" else float(cells[name])
        payload.append(obj)
    with open(path, "w", encoding="ascii", newline="") as handle:
        json.dump(payload, handle, indent=1)
        handle.write("\n")


def _parse_protocol(label: str, where: str) -> ProtocolKind:
    try:
        return ProtocolKind(label)
    except ValueError:
        raise TableFormatError(f"{where}: unknown protocol {label!r}") from None


def _build_row(values: dict, where: str) -> SweepRow:
    def num(name, required=False):
        raw = values.get(name)
        if raw is None or raw == "":
            if required:
                raise TableFormatError(f"{where}: missing value for {name!r}")
            return None
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise TableFormatError(
                f"{where}: bad number {raw!r} for {name!r}") from None

    return SweepRow(
        theta=num("theta", required=True),
        delta=num("delta", required=True),
        p=num("p", required=True),
        protocol=_parse_protocol(str(values.get("protocol", "")), where),
        qber=num("qber"), qber_err=num("qber_err"),
        c_param=num("c_param"), c_param_err=num("c_param_err"),
        rate_raw=num("rate_raw"), rate_clamped=num("rate_clamped"))


def read_csv(path: str) -> list[SweepRow]:
    with open(path, "r", encoding="ascii", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise TableFormatError(f"{path}: empty file, expected a header")
        missing = [c for c in COLUMNS if c not in reader.fieldnames]
        if missing:
            raise TableFormatError(f"{path}: header lacks columns {missing}")
        return [_build_row(record, f"{path}:{line}")
                for line, record in enumerate(reader, start=2)]


def read_json(path: str) -> list[SweepRow]:
    with open(path, "r", encoding="ascii") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise TableFormatError(f"{path}: {exc}") from None
    if not isinstance(payload, list):
        raise TableFormatError(f"{path}: expected a JSON array of rows")
    rows = []
    for index, obj in enumerate(payload):
        if not isinstance(obj, dict):
            raise TableFormatError(f"{path}: row {index} is not an object")
        rows.append(_build_row(obj, f"{path}: row {index}"))
    return rows
