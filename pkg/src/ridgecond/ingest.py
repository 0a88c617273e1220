"""Loading numeric CSV data and forming sample covariance / correlation matrices."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, InvalidInput, MissingData, ParseError
from .spectra import as_symmetric

MISSING_TOKENS = frozenset({"", "NA", "N/A", "NaN", "nan", "NULL", "null", "?"})


@dataclass(frozen=True)
class Dataset:
    """``n`` observations (rows) of ``p`` variables (columns)."""

    values: np.ndarray
    names: tuple

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidInput("dataset values must be a 2-d array")
        n, p = values.shape
        if n < 2 or p < 1:
            raise InvalidInput(f"dataset needs n >= 2 and p >= 1, got {n}x{p}")
        if not np.all(np.isfinite(values)):
            raise InvalidInput("dataset contains non-finite values")
        names = tuple(self.names) if self.names is not None else default_names(p)
        if len(names) != p:
            raise InvalidInput(f"{len(names)} names for {p} columns")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


def default_names(p):
    return tuple(f"V{j + 1}" for j in range(p))


def read_table(path, has_header=True, delimiter=",", missing="error"):
    """Read a rectangular numeric CSV file.

    Non-finite literals such as ``inf`` are accepted. Missing cells raise
    :class:`MissingData` unless ``missing="nan"``.

    Returns
    -------
    values : ndarray, shape (rows, columns)
    names : tuple of str
    """
    if missing not in ("error", "nan"):
        raise InvalidInput(f"missing must be 'error' or 'nan', got {missing!r}")
    with open(path, newline="") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh, delimiter=delimiter))]
    # blank lines carry no data
    rows = [(ln, row) for ln, row in rows if row and any(cell.strip() for cell in row)]
    names = None
    if has_header:
        if not rows:
            raise ParseError("file has no header row", line=1)
        _, header = rows.pop(0)
        names = tuple(cell.strip() for cell in header)
    if not rows:
        raise ParseError("file has no data rows")
    width = len(names) if names is not None else len(rows[0][1])
    values = np.empty((len(rows), width))
    holes = []
    for r, (ln, row) in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", line=ln)
        for c, cell in enumerate(row):
            token = cell.strip()
            if token in MISSING_TOKENS:
                holes.append((ln, c + 1))
                values[r, c] = math.nan
                continue
            try:
                values[r, c] = float(token)
            except ValueError:
                raise ParseError(f"non-numeric value {token!r}", line=ln, column=c + 1) from None
    if holes and missing == "error":
        raise MissingData(holes)
    return values, names if names is not None else default_names(width)


def read_csv(path, has_header=True, delimiter=","):
    """Read an ``n x p`` data matrix into a :class:`Dataset`.

    Headerless files get the names ``V1 .. Vp``.
    """
    values, names = read_table(path, has_header=has_header, delimiter=delimiter)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        r, c = bad[0]
        line = int(r) + (2 if has_header else 1)
        raise ParseError("non-finite value", line=line, column=int(c) + 1)
    if values.shape[0] < 2:
        raise ParseError(f"need at least 2 observations, found {values.shape[0]}")
    return Dataset(values, names)


def read_matrix(path, has_header=True, delimiter=","):
    """Read a square symmetric matrix (for example a precomputed covariance)."""
    values, names = read_table(path, has_header=has_header, delimiter=delimiter)
    if values.shape[0] != values.shape[1]:
        raise ParseError(f"matrix must be square, got {values.shape[0]}x{values.shape[1]}")
    return as_symmetric(values, "input matrix"), names


def format_number(x):
    """Shortest decimal string that round-trips to the same float64."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_table(path, columns, rows, delimiter=","):
    """Write ``rows`` under header ``columns``; ``None`` cells are left empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if v is None else v if isinstance(v, str) else format_number(v) for v in row])


def write_matrix(path, matrix, names, delimiter=","):
    write_table(path, list(names), np.asarray(matrix, dtype=float).tolist(), delimiter=delimiter)


def _values(d):
    return d.values if isinstance(d, Dataset) else np.asarray(d, dtype=float)


def cov_ml(d):
    """Sample covariance with divisor ``n``."""
    y = _values(d)
    n = y.shape[0]
    if n < 2:
        raise InvalidInput("need at least 2 observations")
    centered = y - y.mean(axis=0)
    s = centered.T @ centered / n
    return 0.5 * (s + s.T)


def cov_unbiased(d):
    """Sample covariance with divisor ``n - 1``."""
    y = _values(d)
    n = y.shape[0]
    if n < 2:
        raise InvalidInput("need at least 2 observations")
    return cov_ml(y) * (n / (n - 1))


def to_correlation(s):
    """Scale a covariance matrix to unit diagonal."""
    s = np.asarray(s, dtype=float)
    diag = np.diag(s)
    bad = np.flatnonzero(~(diag > 0.0))
    if bad.size:
        raise DegenerateVariance(int(bad[0]))
    scale = 1.0 / np.sqrt(diag)
    r = s * np.outer(scale, scale)
    r = np.clip(0.5 * (r + r.T), -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r
