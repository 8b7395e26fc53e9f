"""Measurement-log records and their CSV serialization.

One record per line after a mandatory header:

    timestamp_s,kind,anchor_id[,anchor_id2],value,variance

RSS lines carry 5 fields (value in dBm), TDOA lines 6 (second anchor id is
the reference; value in seconds).  Floats are written in shortest
round-trip form, so writing and re-reading a log is lossless and
re-writing a read log reproduces it byte for byte.
"""

from __future__ import annotations

import io
from typing import NamedTuple

HEADER = "timestamp_s,kind,anchor_id,anchor_id2,value,variance"


class MalformedLine(ValueError):
    """A log line does not match the record format; carries the line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class RssRecord(NamedTuple):
    timestamp: float
    anchor_id: str
    value: float  # dBm
    variance: float  # dBm^2


class TdoaRecord(NamedTuple):
    timestamp: float
    anchor_id: str
    ref_id: str
    value: float  # seconds
    variance: float  # seconds^2


def _fmt(x):
    return repr(float(x))


def write_log(records, dest):
    """Write records to a path or text stream in the log CSV format."""
    if hasattr(dest, "write"):
        _write_stream(records, dest)
    else:
        with open(dest, "w", newline="") as fh:
            _write_stream(records, fh)


def _write_stream(records, fh):
    fh.write(HEADER + "\n")
    for rec in records:
        if isinstance(rec, RssRecord):
            fh.write(
                f"{_fmt(rec.timestamp)},RSS,{rec.anchor_id},"
                f"{_fmt(rec.value)},{_fmt(rec.variance)}\n"
            )
        elif isinstance(rec, TdoaRecord):
            fh.write(
                f"{_fmt(rec.timestamp)},TDOA,{rec.anchor_id},{rec.ref_id},"
                f"{_fmt(rec.value)},{_fmt(rec.variance)}\n"
            )
        else:
            raise TypeError(f"not a measurement record: {rec!r}")


def read_log(src):
    """Read records from a path or text stream; returns a list of records."""
    if hasattr(src, "read"):
        return _read_stream(src)
    with open(src, "r", newline="") as fh:
        return _read_stream(fh)


def _parse_float(text, lineno, what):
    try:
        return float(text)
    except ValueError:
        raise MalformedLine(lineno, f"bad {what}: {text!r}") from None


def _read_stream(fh):
    records = []
    first = fh.readline()
    if first.strip() != HEADER:
        raise MalformedLine(1, f"missing or wrong header, got {first.strip()!r}")
    for lineno, raw in enumerate(fh, start=2):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",")
        kind = fields[1] if len(fields) > 1 else ""
        if kind == "RSS":
            if len(fields) != 5:
                raise MalformedLine(lineno, f"RSS line needs 5 fields, got {len(fields)}")
            records.append(RssRecord(
                timestamp=_parse_float(fields[0], lineno, "timestamp"),
                anchor_id=fields[2],
                value=_parse_float(fields[3], lineno, "value"),
                variance=_parse_float(fields[4], lineno, "variance"),
            ))
        elif kind == "TDOA":
            if len(fields) != 6:
                raise MalformedLine(lineno, f"TDOA line needs 6 fields, got {len(fields)}")
            records.append(TdoaRecord(
                timestamp=_parse_float(fields[0], lineno, "timestamp"),
                anchor_id=fields[2],
                ref_id=fields[3],
                value=_parse_float(fields[4], lineno, "value"),
                variance=_parse_float(fields[5], lineno, "variance"),
            ))
        else:
            raise MalformedLine(lineno, f"unknown record kind {kind!r}")
    return records


def log_text(records):
    """The log serialized to a string (handy for tests and hashing)."""
    buf = io.StringIO()
    write_log(records, buf)
    return buf.getvalue()
