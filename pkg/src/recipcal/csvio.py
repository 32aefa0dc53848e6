"""Versioned CSV input/output.

Every file this package writes starts with the version comment line
``# recipcal-csv v1`` followed by ``# key = value`` metadata lines, one
header row naming the columns, then data rows. Writers emit '\n' newlines
and shortest-round-trip float formatting, so a given (config, seed) pair
always produces byte-identical files. Readers fail with the 1-based line
number of the first offending line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel_model import AIR, INTRA, ChannelMatrix
from .errors import CsvFormatError

CSV_VERSION = "recipcal-csv v1"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str, kind: str, columns: list[str], rows, meta: dict | None = None) -> None:
    lines = [f"# {CSV_VERSION}", f"# kind = {kind}"]
    for key in sorted(meta or {}):
        lines.append(f"# {key} = {format_value(meta[key])}")
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} != column count {len(columns)}")
        lines.append(",".join(format_value(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class CsvTable:
    meta: dict[str, str]
    columns: list[str]
    rows: list[list[str]]

    def column(self, name: str) -> list[str]:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no column named {name!r}") from None
        return [row[idx] for row in self.rows]


def read_csv(path: str, expected_kind: str | None = None) -> CsvTable:
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0].strip() != f"# {CSV_VERSION}":
        raise CsvFormatError(path, 1, f"missing version header '# {CSV_VERSION}'")
    meta: dict[str, str] = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    for lineno, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            if columns:
                raise CsvFormatError(path, lineno, "comment after the header row")
            body = line[1:].strip()
            if "=" not in body:
                raise CsvFormatError(path, lineno, "metadata line must look like '# key = value'")
            key, _, value = body.partition("=")
            meta[key.strip()] = value.strip()
            continue
        cells = line.split(",")
        if not columns:
            columns = [c.strip() for c in cells]
            continue
        if len(cells) != len(columns):
            raise CsvFormatError(
                path, lineno, f"expected {len(columns)} fields, found {len(cells)}"
            )
        rows.append(cells)
    if not columns:
        raise CsvFormatError(path, len(raw), "no header row found")
    if expected_kind is not None and meta.get("kind") != expected_kind:
        raise CsvFormatError(
            path, 1, f"expected kind = {expected_kind}, found {meta.get('kind')!r}"
        )
    return CsvTable(meta=meta, columns=columns, rows=rows)


def parse_float(path: str, lineno_hint: int, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise CsvFormatError(path, lineno_hint, f"not a number: {text!r}") from None


# ---------------------------------------------------------------------------
# channel matrices
# ---------------------------------------------------------------------------


def channel_to_csv(channel: ChannelMatrix, path: str) -> None:
    """Write every entry of a channel matrix as (i, j, re, im) rows."""
    n_rows, n_cols = channel.c.shape
    rows = []
    for i in range(n_rows):
        for j in range(n_cols):
            v = channel.c[i, j]
            rows.append((i, j, float(v.real), float(v.imag)))
    write_csv(
        path,
        "channel",
        ["i", "j", "re", "im"],
        rows,
        meta={"matrix-kind": channel.kind, "n-rows": n_rows, "n-cols": n_cols},
    )


def channel_from_csv(path: str) -> ChannelMatrix:
    table = read_csv(path, expected_kind="channel")
    try:
        n_rows = int(table.meta["n-rows"])
        n_cols = int(table.meta["n-cols"])
        kind = table.meta["matrix-kind"]
    except (KeyError, ValueError) as exc:
        raise CsvFormatError(path, 1, f"bad or missing channel metadata ({exc})") from None
    if kind not in (INTRA, AIR):
        raise CsvFormatError(path, 1, f"unknown matrix-kind {kind!r}")
    c = np.zeros((n_rows, n_cols), dtype=complex)
    seen = np.zeros((n_rows, n_cols), dtype=bool)
    header_lines = 4 + len(table.meta)  # version + meta + header; hint only
    for k, row in enumerate(table.rows):
        lineno = header_lines + k
        try:
            i, j = int(row[0]), int(row[1])
        except ValueError:
            raise CsvFormatError(path, lineno, f"bad index pair {row[0]!r},{row[1]!r}") from None
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise CsvFormatError(path, lineno, f"index ({i}, {j}) outside the declared shape")
        if seen[i, j]:
            raise CsvFormatError(path, lineno, f"duplicate entry for ({i}, {j})")
        seen[i, j] = True
        c[i, j] = complex(parse_float(path, lineno, row[2]), parse_float(path, lineno, row[3]))
    if not seen.all():
        missing = np.argwhere(~seen)[0]
        raise CsvFormatError(path, 0, f"entry ({missing[0]}, {missing[1]}) missing")
    return ChannelMatrix(c, kind=kind)


def measurements_to_csv(meas, path: str) -> None:
    """Write a measurement set (received grid + stacked weights) for cross-checks."""
    rows = []
    for name, mat in (("y", meas.y_stacked), ("p", meas.p_stacked), ("w", meas.w_stacked)):
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                rows.append((name, i, j, float(mat[i, j].real), float(mat[i, j].imag)))
    write_csv(
        path,
        "measurements",
        ["matrix", "row", "col", "re", "im"],
        rows,
        meta={"n-streams": meas.n_streams},
    )


def solution_to_csv(solution, path: str, extra_meta: dict | None = None) -> None:
    """Write a calibration solution as (index, re, im) with solver diagnostics."""
    f = solution.f.f
    meta = {
        "residual": solution.residual,
        "eigen-gap": solution.eigen_gap,
        "degenerate": solution.degenerate,
    }
    meta.update(extra_meta or {})
    rows = [(m, float(f[m].real), float(f[m].imag)) for m in range(f.size)]
    write_csv(path, "calibration-solution", ["index", "re", "im"], rows, meta=meta)
