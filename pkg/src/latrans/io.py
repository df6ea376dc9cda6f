"""Text and JSON encodings of Latin squares.

Text form::

    # generator="cyclic"
    3 0
    0 1 2
    1 2 0
    2 0 1

Optional ``# key=<json value>`` lines come first (sorted by key), then a
header ``<order> <symbol_base>``, then one row per line. Symbols on disk
are internal symbols plus symbol_base.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .latin import LatinSquare, validate_latin


@dataclass(frozen=True, eq=False)
class SquareFile:
    square: LatinSquare
    symbol_base: int = 0
    metadata: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


def _check_latin(square: LatinSquare, strict: bool, first_row_line: int | None) -> tuple[str, ...]:
    rep = validate_latin(square)
    if rep.valid:
        return ()
    msgs = tuple(f"{v.kind} at row {v.row}, column {v.column} (symbol {v.symbol})" for v in rep.violations)
    if strict:
        v = rep.violations[0]
        line = None if first_row_line is None else first_row_line + v.row
        raise ParseError(f"not a Latin square: {msgs[0]}", line=line, column=v.column + 1)
    return msgs


def _build(rows, base, metadata, strict, first_row_line=None) -> SquareFile:
    offset = int(metadata.get("alphabet_offset", 0))
    cells = np.array(rows, dtype=np.int64) - base
    square = LatinSquare(cells, offset)
    return SquareFile(square, base, dict(metadata), _check_latin(square, strict, first_row_line))


def parse_square_text(text: str, *, strict: bool = True) -> SquareFile:
    lines = text.splitlines()
    metadata: dict = {}
    idx = 0
    while idx < len(lines) and (lines[idx].startswith("#") or not lines[idx].strip()):
        line = lines[idx].lstrip("#").strip()
        if line:
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError("metadata line must look like '# key=value'", line=idx + 1)
            try:
                metadata[key.strip()] = json.loads(value)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad metadata value: {exc.msg}", line=idx + 1) from None
        idx += 1
    if idx == len(lines):
        raise ParseError("missing header line '<order> <symbol_base>'", line=idx + 1)
    head = lines[idx].split()
    if len(head) != 2:
        raise ParseError("header must be '<order> <symbol_base>'", line=idx + 1)
    try:
        n, base = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("header values must be integers", line=idx + 1) from None
    if n < 1 or base not in (0, 1):
        raise ParseError("order must be >= 1 and symbol_base 0 or 1", line=idx + 1)
    body = lines[idx + 1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n:
        raise ParseError(f"expected {n} rows, found {len(body)}", line=idx + 2 + min(len(body), n))
    rows = []
    for r, line in enumerate(body):
        lineno = idx + 2 + r
        toks = line.split()
        if len(toks) != n:
            raise ParseError(f"row has {len(toks)} entries, expected {n}", line=lineno)
        row = []
        for c, tok in enumerate(toks):
            try:
                row.append(int(tok))
            except ValueError:
                raise ParseError(f"non-integer cell {tok!r}", line=lineno, column=c + 1) from None
        rows.append(row)
    return _build(rows, base, metadata, strict, first_row_line=idx + 2)


def parse_square_json(text: str, *, strict: bool = True) -> SquareFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(obj, dict) or "rows" not in obj or "order" not in obj:
        raise ParseError("JSON square needs 'order' and 'rows'")
    n = obj["order"]
    base = obj.get("symbol_base", 0)
    rows = obj["rows"]
    if not isinstance(n, int) or n < 1 or base not in (0, 1):
        raise ParseError("order must be a positive integer and symbol_base 0 or 1")
    if not isinstance(rows, list) or len(rows) != n:
        raise ParseError(f"expected {n} rows")
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"row {r} must hold {n} entries")
        for c, v in enumerate(row):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ParseError(f"non-integer cell at row {r}, column {c}")
    return _build(rows, base, obj.get("metadata", {}), strict)


def parse_square_file(text: str, *, strict: bool = True) -> SquareFile:
    """Parse either encoding (JSON is recognized by a leading '{')."""
    if text.lstrip().startswith("{"):
        return parse_square_json(text, strict=strict)
    return parse_square_text(text, strict=strict)


def parse_square(text: str, *, strict: bool = True) -> LatinSquare:
    return parse_square_file(text, strict=strict).square


def _metadata_for(square: LatinSquare, metadata: dict | None) -> dict:
    meta = dict(metadata or {})
    if square.alphabet_offset:
        meta["alphabet_offset"] = square.alphabet_offset
    return meta


def serialize_square(square: LatinSquare, *, symbol_base: int = 0, fmt: str = "txt",
                     metadata: dict | None = None) -> str:
    """Canonical text (no trailing newline) or JSON encoding."""
    meta = _metadata_for(square, metadata)
    rows = (square.cells + symbol_base).tolist()
    if fmt == "json":
        obj = {"order": square.order, "symbol_base": symbol_base, "rows": rows}
        if meta:
            obj["metadata"] = meta
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))
    if fmt != "txt":
        raise ValueError(f"unknown format {fmt!r}")
    out = [f"# {k}={json.dumps(meta[k], sort_keys=True, separators=(',', ':'))}" for k in sorted(meta)]
    out.append(f"{square.order} {symbol_base}")
    out.extend(" ".join(map(str, row)) for row in rows)
    return "\n".join(out)
