"""Synthetic datasets from known logistic ground truth, for oracle verification."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace

import numpy as np

from .design import Expander, VariableSpace
from .tabular import ColumnSpec, DataError, Dataset

_AUC_SEED_OFFSET = 1_000_003  # fresh stream for Monte-Carlo evaluation


@dataclass(frozen=True)
class GenerativeSpec:
    """Ground-truth logistic model over independent predictors.

    ``kinds`` holds one entry per predictor: ("binary", p), ("factor", probs)
    or ("numeric",).  Coefficients are per variable; a factor or interaction
    variable applies its coefficient to every column of its dummy-coded block,
    using the same expansion as the design module.
    """

    kinds: tuple
    true_mains: tuple  # ((variable-index, coefficient), ...)
    true_interactions: tuple  # (((i, j), coefficient), ...)
    intercept: float
    n_rows: int
    seed: int

    def __post_init__(self):
        mains = set(v for v, _ in self.true_mains)
        for (i, j), _ in self.true_interactions:
            if i not in mains or j not in mains:
                raise DataError(f"planted interaction ({i},{j}) lacks a true main effect")
        for _, c in list(self.true_mains) + list(self.true_interactions):
            if not np.isfinite(c):
                raise DataError("non-finite ground-truth coefficient")

    @property
    def n_main(self):
        return len(self.kinds)


def _predictor_specs(spec):
    out = []
    for idx, kind in enumerate(spec.kinds, start=1):
        if kind[0] == "binary":
            out.append(ColumnSpec(name=f"b{idx:02d}", kind="binary"))
        elif kind[0] == "factor":
            levels = tuple(f"l{k}" for k in range(len(kind[1])))
            out.append(ColumnSpec(name=f"f{idx:02d}", kind="factor", levels=levels))
        elif kind[0] == "numeric":
            out.append(ColumnSpec(name=f"x{idx:02d}", kind="numeric"))
        else:
            raise DataError(f"unknown predictor kind {kind!r}")
    return out


def true_variable_set(spec):
    space = VariableSpace(names=tuple(s.name for s in _predictor_specs(spec)))
    sel = [v for v, _ in spec.true_mains]
    sel += [space.index_of_pair(i, j) for (i, j), _ in spec.true_interactions]
    return space, tuple(sorted(sel))


def _linear_predictor(dataset, spec):
    space, selected = true_variable_set(spec)
    if not selected:
        return np.full(dataset.n_rows, spec.intercept)
    coef = {v: c for v, c in spec.true_mains}
    for (i, j), c in spec.true_interactions:
        coef[space.index_of_pair(i, j)] = c
    dm = Expander(dataset, space).design(selected)
    beta = np.empty(dm.n_cols)
    for v, cols in dm.groups.items():
        beta[cols] = coef[v]
    return spec.intercept + dm.X @ beta


def _draw_predictors(spec, n, rng):
    specs = _predictor_specs(spec)
    data = {}
    for s, kind in zip(specs, spec.kinds):
        if kind[0] == "binary":
            data[s.name] = (rng.random(n) < kind[1]).astype(np.float64)
        elif kind[0] == "factor":
            probs = np.asarray(kind[1], dtype=np.float64)
            draws = rng.choice(len(probs), size=n, p=probs / probs.sum())
            data[s.name] = np.array([s.levels[k] for k in draws], dtype=object)
        else:
            data[s.name] = rng.standard_normal(n)
    return specs, data


def generate(spec):
    """Draw predictors per kind, then the outcome Bernoulli(logistic(lp)).

    Deterministic per seed; the returned Dataset carries the outcome column
    "y" and needs no further preprocessing (numerics are standard normal).
    """
    rng = np.random.default_rng(spec.seed)
    specs, data = _draw_predictors(spec, spec.n_rows, rng)
    all_specs = specs + [ColumnSpec(name="y", kind="binary", role="outcome")]
    data["y"] = np.zeros(spec.n_rows)  # placeholder until lp is known
    d = Dataset(
        specs=all_specs,
        data=data,
        missing={s.name: np.zeros(spec.n_rows, dtype=bool) for s in all_specs},
    )
    lp = _linear_predictor(d, spec)
    d.data["y"] = (rng.random(spec.n_rows) < 1.0 / (1.0 + np.exp(-lp))).astype(np.float64)
    return d


def generative_auc(spec, n_mc=100_000):
    """Monte-Carlo AUC of the true linear predictor on a fresh sample — the
    discrimination ceiling for any fitted model of this spec."""
    from .metrics import auc

    if n_mc < 1:
        raise DataError("n_mc must be positive")
    fresh = replace(spec, n_rows=int(n_mc), seed=spec.seed + _AUC_SEED_OFFSET)
    d = generate(fresh)
    lp = _linear_predictor(d, fresh)
    return auc(lp, d.data["y"])


def tune_intercept(spec, target_rate, n_probe=200_000):
    """Spec with the intercept set so the expected event rate matches ``target_rate``.

    Bisection on a fixed probe sample; deterministic given spec.seed.
    """
    probe = replace(spec, intercept=0.0, n_rows=n_probe, seed=spec.seed + 7)
    rng = np.random.default_rng(probe.seed)
    d_specs, data = _draw_predictors(probe, n_probe, rng)
    all_specs = d_specs + [ColumnSpec(name="y", kind="binary", role="outcome")]
    data["y"] = np.zeros(n_probe)
    d = Dataset(
        specs=all_specs,
        data=data,
        missing={s.name: np.zeros(n_probe, dtype=bool) for s in all_specs},
    )
    lp0 = _linear_predictor(d, probe)
    lo, hi = -20.0, 20.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        rate = float(np.mean(1.0 / (1.0 + np.exp(-(lp0 + mid)))))
        if rate < target_rate:
            lo = mid
        else:
            hi = mid
    return replace(spec, intercept=0.5 * (lo + hi))


def default_benchmark(n_rows=20_000, seed=73):
    """Acceptance benchmark: 25 mains (15 binary, 2 three-level factors,
    8 numeric), 8 true mains, 4 planted interactions, ~15% event rate."""
    kinds = (
        tuple(("binary", 0.3) for _ in range(15))
        + (("factor", (0.5, 0.3, 0.2)), ("factor", (0.5, 0.3, 0.2)))
        + tuple(("numeric",) for _ in range(8))
    )
    spec = GenerativeSpec(
        kinds=kinds,
        true_mains=(
            (1, 0.7), (2, 0.6), (3, 0.5), (16, 0.5),
            (18, 0.9), (19, 0.8), (20, 0.6), (21, 0.5),
        ),
        true_interactions=(
            ((18, 19), 0.9), ((1, 20), 1.0), ((2, 18), 1.1), ((20, 21), 0.8),
        ),
        intercept=0.0,
        n_rows=n_rows,
        seed=seed,
    )
    return tune_intercept(spec, target_rate=0.15)


def write_csv(dataset, path, delimiter=","):
    """Serialize a Dataset in the delimited format tabular.load_csv reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        names = [s.name for s in dataset.specs]
        w.writerow(names)
        cols = []
        for s in dataset.specs:
            col = dataset.data[s.name]
            if s.kind == "factor":
                cols.append([str(v) for v in col])
            elif s.kind == "binary":
                cols.append([str(int(v)) for v in col])
            else:
                cols.append([repr(float(v)) for v in col])
        for row in zip(*cols):
            w.writerow(row)


def write_truth(spec, path):
    """Sidecar manifest of the planted ground truth."""
    space, selected = true_variable_set(spec)
    payload = {
        "n_main": spec.n_main,
        "intercept": spec.intercept,
        "n_rows": spec.n_rows,
        "seed": spec.seed,
        "true_mains": [[v, c] for v, c in spec.true_mains],
        "true_interactions": [
            {"pair": [i, j], "index": space.index_of_pair(i, j), "coefficient": c}
            for (i, j), c in spec.true_interactions
        ],
        "true_variable_set": list(selected),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
