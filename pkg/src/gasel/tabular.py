"""Typed columnar datasets: CSV ingestion, missing-data handling, scaling, factor collapsing."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

KINDS = ("binary", "factor", "numeric")
ROLES = ("predictor", "outcome", "category", "ignore")


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class ColumnSpec:
    """Declared type and modeling role of one column."""

    name: str
    kind: str
    role: str = "predictor"
    levels: tuple = ()  # factor/category only; empty means infer from data

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown kind {self.kind!r} for column {self.name!r}")
        if self.role not in ROLES:
            raise DataError(f"unknown role {self.role!r} for column {self.name!r}")
        if self.levels and len(set(self.levels)) != len(self.levels):
            raise DataError(f"duplicate levels declared for {self.name!r}")

    @property
    def is_categorical(self):
        return self.kind == "factor"


@dataclass
class Dataset:
    """Immutable-by-convention column store.

    Numeric and binary columns are float64 arrays; factor columns are object
    arrays of strings. ``missing`` holds a boolean mask per column.  All
    operations return new Dataset values and never mutate their input.
    """

    specs: list
    data: dict
    missing: dict
    scaling_stats: dict = field(default_factory=dict)

    @property
    def n_rows(self):
        if not self.specs:
            return 0
        return len(self.data[self.specs[0].name])

    def spec(self, name):
        for s in self.specs:
            if s.name == name:
                return s
        raise DataError(f"no column named {name!r}")

    @property
    def outcome_name(self):
        names = [s.name for s in self.specs if s.role == "outcome"]
        if len(names) != 1:
            raise DataError(f"expected exactly one outcome column, found {names}")
        return names[0]

    @property
    def category_name(self):
        names = [s.name for s in self.specs if s.role == "category"]
        if len(names) > 1:
            raise DataError(f"more than one category column: {names}")
        return names[0] if names else None

    @property
    def predictor_specs(self):
        return [s for s in self.specs if s.role == "predictor"]

    def has_missing(self):
        return any(m.any() for m in self.missing.values())

    def copy(self):
        return Dataset(
            specs=list(self.specs),
            data={k: v.copy() for k, v in self.data.items()},
            missing={k: v.copy() for k, v in self.missing.items()},
            scaling_stats=dict(self.scaling_stats),
        )

    def take_rows(self, idx):
        """New Dataset containing the rows selected by ``idx`` (in that order)."""
        return Dataset(
            specs=list(self.specs),
            data={k: v[idx] for k, v in self.data.items()},
            missing={k: v[idx] for k, v in self.missing.items()},
            scaling_stats=dict(self.scaling_stats),
        )

    def drop_columns(self, names):
        names = set(names)
        return Dataset(
            specs=[s for s in self.specs if s.name not in names],
            data={k: v for k, v in self.data.items() if k not in names},
            missing={k: v for k, v in self.missing.items() if k not in names},
            scaling_stats={k: v for k, v in self.scaling_stats.items() if k not in names},
        )


def _parse_cell(raw, spec, missing_token):
    value = raw.strip()
    if value == missing_token:
        return None
    if spec.kind == "numeric":
        try:
            return float(value)
        except ValueError:
            raise DataError(f"cannot parse {raw!r} as numeric in column {spec.name!r}")
    if spec.kind == "binary":
        if value == "0":
            return 0.0
        if value == "1":
            return 1.0
        raise DataError(f"binary column {spec.name!r} contains {raw!r} (must be 0 or 1)")
    return value  # factor: trimmed string, case-sensitive


def load_csv(path, schema, missing_token="", delimiter=","):
    """Read a delimited file into a typed Dataset.

    The header must equal the schema names in order.  Missing cells (equal to
    ``missing_token`` after trimming) are flagged, not imputed.  Factor columns
    with pre-declared levels are closed: an unseen level is an error.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        expected = [s.name for s in schema]
        if header != expected:
            raise DataError(f"{path}: header {header} does not match schema {expected}")
        cells = {s.name: [] for s in schema}
        miss = {s.name: [] for s in schema}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(schema):
                raise DataError(f"{path}:{lineno}: expected {len(schema)} fields, got {len(row)}")
            for s, raw in zip(schema, row):
                v = _parse_cell(raw, s, missing_token)
                miss[s.name].append(v is None)
                cells[s.name].append(v)

    data = {}
    missing = {}
    for s in schema:
        m = np.array(miss[s.name], dtype=bool)
        if s.kind == "factor":
            col = np.array([c if c is not None else "" for c in cells[s.name]], dtype=object)
            observed = sorted(set(col[~m]))
            if s.levels:
                unknown = [v for v in observed if v not in s.levels]
                if unknown:
                    raise DataError(
                        f"column {s.name!r} has undeclared levels {unknown} "
                        f"(declared {list(s.levels)})"
                    )
            else:
                s = replace(s, levels=tuple(observed))
        else:
            col = np.array(
                [c if c is not None else np.nan for c in cells[s.name]], dtype=np.float64
            )
        data[s.name] = col
        missing[s.name] = m
    # specs may have been replaced with inferred levels
    specs = []
    for s0 in schema:
        if s0.kind == "factor" and not s0.levels:
            observed = sorted(set(data[s0.name][~missing[s0.name]]))
            specs.append(replace(s0, levels=tuple(observed)))
        else:
            specs.append(s0)
    return Dataset(specs=specs, data=data, missing=missing)


def handle_missing(d):
    """Drop rows with missing categorical/binary/outcome cells, then mean-impute numerics.

    Row removal happens first; imputation means are computed on the surviving
    rows so imputed values describe the modeled population.
    """
    drop = np.zeros(d.n_rows, dtype=bool)
    for s in d.specs:
        if s.kind != "numeric":
            drop |= d.missing[s.name]
    out = d.take_rows(~drop)
    for s in out.specs:
        if s.kind != "numeric":
            continue
        m = out.missing[s.name]
        if not m.any():
            continue
        if m.all():
            raise DataError(f"numeric column {s.name!r} is entirely missing; no mean exists")
        col = out.data[s.name].copy()
        col[m] = col[~m].mean()
        out.data[s.name] = col
        out.missing[s.name] = np.zeros_like(m)
    return out


def standardize(d):
    """Scale numeric predictor columns to mean 0, variance 1 (N-1 denominator).

    Records (mean, sd) per column in ``scaling_stats``.  Outcome, binary and
    factor columns are untouched.  Zero-variance columns are an error.
    """
    if any(d.missing[s.name].any() for s in d.specs if s.kind == "numeric"):
        raise DataError("standardize requires no missing numeric cells")
    out = d.copy()
    for s in d.specs:
        if s.kind != "numeric" or s.role != "predictor":
            continue
        col = out.data[s.name]
        mean = float(col.mean())
        sd = float(col.std(ddof=1)) if len(col) > 1 else 0.0
        if sd == 0.0 or not np.isfinite(sd):
            raise DataError(f"numeric column {s.name!r} has zero variance; cannot scale")
        out.data[s.name] = (col - mean) / sd
        out.scaling_stats[s.name] = (mean, sd)
    return out


def unstandardize(d):
    """Invert standardize() using the recorded scaling_stats."""
    out = d.copy()
    for name, (mean, sd) in d.scaling_stats.items():
        out.data[name] = d.data[name] * sd + mean
    out.scaling_stats = {}
    return out


def collapse_factor(d, column, mapping):
    """Relabel a factor column through ``mapping`` and rebuild its level list.

    The mapping must cover every observed level; levels of the collapsed column
    are the sorted image of the mapping.
    """
    s = d.spec(column)
    if s.kind != "factor":
        raise DataError(f"column {column!r} is not a factor")
    col = d.data[column]
    m = d.missing[column]
    observed = sorted(set(col[~m]))
    unmapped = [lv for lv in observed if lv not in mapping]
    if unmapped:
        raise DataError(f"collapse mapping for {column!r} omits observed levels {unmapped}")
    out = d.copy()
    new_col = col.copy()
    for i in np.flatnonzero(~m):
        new_col[i] = mapping[col[i]]
    out.data[column] = new_col
    new_levels = tuple(sorted(set(mapping[lv] for lv in observed)))
    out.specs = [replace(t, levels=new_levels) if t.name == column else t for t in out.specs]
    return out


def subset_by_category(d):
    """Partition rows by the category column, dropping it from each subset.

    Returns [(label, Dataset)] ordered by label.
    """
    cat = d.category_name
    if cat is None:
        raise DataError("no role=category column in dataset")
    col = d.data[cat]
    labels = sorted(set(col))
    out = []
    for label in labels:
        sub = d.take_rows(col == label).drop_columns([cat])
        out.append((label, sub))
    return out
