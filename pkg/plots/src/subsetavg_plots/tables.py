"""Readers for the experiment CSV tables.

The tables are plain CSV with an optional leading `# generated: ...` comment
line. Candidate tables carry one row per (model, t_min) fit; average tables
one row per (N, criterion) grand average. Both may carry a trailing
`replication` column when the producing run was replicated. Every figure in
this package draws numbers straight from these rows; nothing is recomputed.
"""

import csv

CANDIDATE_COLUMNS = ("model", "t_min", "d_K", "k", "chi2", "q_value",
                     "a0", "a0_err", "ic_subspace", "ic_perfect",
                     "w_subspace", "w_perfect")
AVERAGE_COLUMNS = ("N", "criterion", "mean", "err", "stat_err", "spread_err")

_INT_COLUMNS = frozenset({"t_min", "d_K", "k", "N", "replication"})
_STR_COLUMNS = frozenset({"model", "criterion"})


class SchemaError(ValueError):
    """A CSV file does not match the documented table schema."""


def _convert(name, text, path, line):
    try:
        if name in _STR_COLUMNS:
            return text
        if name in _INT_COLUMNS:
            return int(text)
        return float(text)
    except ValueError:
        raise SchemaError(f"{path}: line {line}: column {name!r} has "
                          f"non-numeric value {text!r}") from None


def read_table(path, required):
    """Rows of a schema-checked CSV table as a list of typed dicts.

    Raises SchemaError naming every missing column, or when the table has
    no data rows, so callers can print one actionable diagnostic.
    """
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    reader = csv.DictReader(lines)
    header = reader.fieldnames or []
    missing = [name for name in required if name not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns: {', '.join(missing)} "
                          f"(found: {', '.join(header) or 'none'})")
    rows = []
    for line, row in enumerate(reader, start=2):
        if None in row or any(value is None for value in row.values()):
            raise SchemaError(f"{path}: line {line}: wrong field count")
        rows.append({name: _convert(name, value, path, line)
                     for name, value in row.items()})
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_candidates(path):
    return read_table(path, CANDIDATE_COLUMNS)


def read_averages(path):
    return read_table(path, AVERAGE_COLUMNS)
