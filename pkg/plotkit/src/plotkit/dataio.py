"""Reader for the sweep CSV contract.

Deliberately self-contained: the only coupling to the producer is the
published column layout below.
"""

import csv
from dataclasses import dataclass

REQUIRED_COLUMNS = ("theta", "theta_over_pi", "delta", "delta_over_pi", "p",
                    "protocol", "qber", "qber_err", "c_param", "c_param_err",
                    "rate_raw", "rate_clamped")


class DataError(ValueError):
    """Raised for tables that do not follow the sweep CSV contract."""


@dataclass(frozen=True)
class TableRow:
    theta: float
    theta_over_pi: float
    delta: float
    delta_over_pi: float
    p: float
    protocol: str
    qber: float | None
    qber_err: float | None
    c_param: float | None
    c_param_err: float | None
    rate_raw: float | None
    rate_clamped: float | None


def _number(cells, name, where, required=False):
    raw = cells.get(name, "")
    if raw is None or raw == "":
        if required:
            raise DataError(f"{where}: missing value for column {name!r}")
        return None
    try:
        return float(raw)
    except ValueError:
        raise DataError(f"{where}: bad number {raw!r} in column "
                        f"{name!r}") from None


def read_table(path: str) -> list[TableRow]:
    with open(path, "r", encoding="ascii", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, expected a header")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise DataError(f"{path}: missing column(s) "
                            + ", ".join(repr(c) for c in missing))
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            protocol = cells.get("protocol", "")
            if not protocol:
                raise DataError(f"{where}: missing value for column 'protocol'")
            rows.append(TableRow(
                theta=_number(cells, "theta", where, required=True),
                theta_over_pi=_number(cells, "theta_over_pi", where,
                                      required=True),
                delta=_number(cells, "delta", where, required=True),
                delta_over_pi=_number(cells, "delta_over_pi", where,
                                      required=True),
                p=_number(cells, "p", where, required=True),
                protocol=protocol,
                qber=_number(cells, "qber", where),
                qber_err=_number(cells, "qber_err", where),
                c_param=_number(cells, "c_param", where),
                c_param_err=_number(cells, "c_param_err", where),
                rate_raw=_number(cells, "rate_raw", where),
                rate_clamped=_number(cells, "rate_clamped", where)))
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows
