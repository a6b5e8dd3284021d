"""End-to-end orchestration: preprocess, per-category GA + baseline, reporting."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from . import ga as ga_mod
from . import logit, stepwise, tabular
from .design import Expander, space_for
from .metrics import make_folds, wilcoxon_signed_rank
from .tabular import ColumnSpec, DataError


@dataclass
class RunConfig:
    data: str
    columns: list
    out: str = "out"
    delimiter: str = ","
    missing_token: str = ""
    seed: int = 1
    threads: int = 1
    alpha: float = 0.05
    stepwise: bool = True
    row_filter: list = field(default_factory=list)  # [{"column":..., "equals":...}]
    collapse: dict = field(default_factory=dict)  # name -> {"map": {...}, "other": lvl?}
    ga: ga_mod.GaConfig = field(default_factory=ga_mod.GaConfig)
    categories: list = None  # restrict to these labels; None = all

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise DataError("alpha must be in (0,1)")


def load_config(path, overrides=None):
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    cols = [
        ColumnSpec(
            name=c["name"],
            kind=c["kind"],
            role=c.get("role", "predictor"),
            levels=tuple(c.get("levels", ())),
        )
        for c in raw["columns"]
    ]
    ga_raw = dict(raw.get("ga", {}))
    ga_raw.setdefault("seed", raw.get("seed", 1))
    cfg = RunConfig(
        data=raw["data"],
        columns=cols,
        out=str(raw.get("out", "out")),
        delimiter=raw.get("delimiter", ","),
        missing_token=raw.get("missing_token", ""),
        seed=int(raw.get("seed", 1)),
        threads=int(raw.get("threads", 1)),
        alpha=float(raw.get("alpha", 0.05)),
        stepwise=bool(raw.get("stepwise", True)),
        row_filter=list(raw.get("row_filter", [])),
        collapse=dict(raw.get("collapse", {})),
        ga=ga_mod.GaConfig(**ga_raw),
        categories=raw.get("categories"),
    )
    return cfg


def preprocess(cfg):
    """Load, filter, clean, collapse, standardize and subset per the config.

    Returns [(label, Dataset)]; a dataset without a category column yields the
    single pair ("all", dataset).  Standardization runs once per subset, after
    subsetting, so each category model sees its own scaling.
    """
    d = tabular.load_csv(cfg.data, cfg.columns, cfg.missing_token, cfg.delimiter)
    import numpy as np

    for rule in cfg.row_filter:
        name = rule["column"]
        col = d.data[name]
        if d.spec(name).kind == "factor":
            match = col == str(rule["equals"])
        else:
            match = col == float(rule["equals"])
        d = d.take_rows(~match)
    ignore = [s.name for s in d.specs if s.role == "ignore"]
    if ignore:
        d = d.drop_columns(ignore)
    d = tabular.handle_missing(d)
    for name, rule in cfg.collapse.items():
        mapping = dict(rule.get("map", {}))
        if "other" in rule:
            observed = sorted(set(d.data[name]))
            for lv in observed:
                mapping.setdefault(lv, rule["other"])
        d = tabular.collapse_factor(d, name, mapping)
    if d.category_name is not None:
        subsets = tabular.subset_by_category(d)
    else:
        subsets = [("all", d)]
    out = []
    for label, sub in subsets:
        if cfg.categories is not None and label not in cfg.categories:
            continue
        out.append((label, tabular.standardize(sub)))
    return out


@dataclass
class ModelSummary:
    """Per-category report: inclusion, Wald significance and interaction
    partners per main effect, plus model-level AUC/SMR and baseline comparison."""

    category: str
    n_rows: int
    alpha: float
    selected: list
    mains: list  # {"index","name","included","wald_p","partners"}
    fold_aucs: list
    mean_auc: float
    smr: float
    smr_ci: list
    stepwise_selected: list = None
    stepwise_fold_aucs: list = None
    stepwise_mean_auc: float = None
    p_vs_stepwise_two_sided: float = None
    p_vs_stepwise_greater: float = None

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def summarize_model(category, dataset, space, report, alpha, stepwise_result=None):
    """Refit the selected set on the full subset and assemble the ModelSummary.

    An interaction pair is significant when any of its expanded design columns
    has Wald p below alpha on that refit; a main's Wald p is the smallest over
    its own columns.
    """
    dm = Expander(dataset, space).design(report.selected)
    model = logit.fit(dm.X, dm.y)
    pvals = logit.wald_p_values(model)[1:]  # skip intercept

    sig_pairs = set()
    for v in report.selected:
        if space.is_interaction(v):
            if min(pvals[c] for c in dm.groups[v]) < alpha:
                sig_pairs.add(space.pair_of(v))
    mains = []
    selected_set = set(report.selected)
    for i in range(1, space.n_main + 1):
        included = i in selected_set
        wald = min((pvals[c] for c in dm.groups[i]), default=None) if included else None
        partners = sorted(
            {j for (a, b) in sig_pairs for j in (a, b) if i in (a, b) and j != i}
        )
        mains.append(
            {
                "index": i,
                "name": space.names[i - 1],
                "included": included,
                "wald_p": wald,
                "partners": partners,
            }
        )

    summary = ModelSummary(
        category=category,
        n_rows=dataset.n_rows,
        alpha=alpha,
        selected=list(report.selected),
        mains=mains,
        fold_aucs=list(report.fold_aucs),
        mean_auc=report.mean_auc,
        smr=report.smr,
        smr_ci=list(report.smr_ci),
    )
    if stepwise_result is not None and stepwise_result.fitness is not None:
        summary.stepwise_selected = list(stepwise_result.selected)
        summary.stepwise_fold_aucs = list(stepwise_result.fitness.fold_aucs)
        summary.stepwise_mean_auc = stepwise_result.fitness.mean_auc
        summary.p_vs_stepwise_two_sided = _wilcoxon_or_one(
            report.fold_aucs, stepwise_result.fitness.fold_aucs
        )
        summary.p_vs_stepwise_greater = _wilcoxon_or_one(
            report.fold_aucs, stepwise_result.fitness.fold_aucs, alternative="greater"
        )
    return summary


def _wilcoxon_or_one(a, b, alternative="two-sided"):
    # identical fold AUCs carry no evidence either way; report p = 1
    if all(x == y for x, y in zip(a, b)):
        return 1.0
    return wilcoxon_signed_rank(a, b, alternative=alternative)


def render_summary(s):
    """Fixed-width human-readable table: one row per main effect, a marker for
    inclusion, and the indices of significant interaction partners."""
    lines = []
    lines.append(f"Model summary: {s.category} (N={s.n_rows})")
    lines.append("")
    lines.append(f"{'#':>3} {'term':<14} {'in':<3} {'Wald p':>10}  partners")
    lines.append("-" * 52)
    for m in s.mains:
        mark = "x" if m["included"] else ""
        wald = f"{m['wald_p']:.4g}" if m["wald_p"] is not None else ""
        partners = ",".join(str(j) for j in m["partners"])
        lines.append(f"{m['index']:>3} {m['name']:<14} {mark:<3} {wald:>10}  {partners}")
    lines.append("-" * 52)
    lines.append(f"mean CV AUC: {s.mean_auc:.4f}")
    lines.append("fold AUCs:   " + " ".join(f"{a:.4f}" for a in s.fold_aucs))
    lines.append(f"SMR: {s.smr:.4f}  95% CI ({s.smr_ci[0]:.4f}, {s.smr_ci[1]:.4f})")
    if s.stepwise_mean_auc is not None:
        lines.append(
            f"stepwise (mains-only) mean CV AUC: {s.stepwise_mean_auc:.4f}  "
            f"Wilcoxon two-sided p={s.p_vs_stepwise_two_sided:.6g}  "
            f"one-sided (GA greater) p={s.p_vs_stepwise_greater:.6g}"
        )
    lines.append("")
    return "\n".join(lines)


def slug(label):
    return re.sub(r"[^A-Za-z0-9]+", "_", str(label)).strip("_").lower() or "category"


def run_pipeline(cfg, do_ga=True, do_stepwise=None):
    """Full run over every category subset; returns 0 on full success.

    A failure in one category records a diagnostic and the others proceed.
    """
    if do_stepwise is None:
        do_stepwise = cfg.stepwise
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    subsets = preprocess(cfg)
    results = []
    failures = {}
    for label, sub in subsets:
        cat_dir = out_dir / slug(label)
        cat_dir.mkdir(parents=True, exist_ok=True)
        try:
            space = space_for(sub)
            folds = make_folds(sub.n_rows, cfg.seed)
            sw = stepwise.stepwise_aic(sub, space, folds) if do_stepwise else None
            if sw is not None:
                (cat_dir / "stepwise_trace.txt").write_text(
                    "\n".join(stepwise.trace_lines(sw)) + "\n", encoding="utf-8"
                )
            if do_ga:
                ga_cfg = replace(cfg.ga, seed=cfg.seed)
                res = ga_mod.multi_start(sub, space, ga_cfg, folds, threads=cfg.threads)
                (cat_dir / "ga_history.jsonl").write_text(
                    "\n".join(ga_mod.history_lines(res)) + "\n", encoding="utf-8"
                )
                summary = summarize_model(
                    label, sub, space, res.best_fitness, cfg.alpha, stepwise_result=sw
                )
                (cat_dir / "summary.json").write_text(
                    json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8",
                )
                (cat_dir / "summary.txt").write_text(
                    render_summary(summary), encoding="utf-8"
                )
                results.append((label, sub.n_rows, summary.mean_auc))
        except Exception as exc:  # keep other categories running
            failures[label] = f"{type(exc).__name__}: {exc}"
            (cat_dir / "error.txt").write_text(failures[label] + "\n", encoding="utf-8")
    overview = {
        "categories": [
            {"label": lab, "n_rows": n, "mean_auc": aucv} for lab, n, aucv in results
        ],
        "failures": failures,
    }
    if results:
        total = sum(n for _, n, _ in results)
        overview["weighted_mean_auc"] = sum(n * a for _, n, a in results) / total
    (out_dir / "overview.json").write_text(
        json.dumps(overview, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return 0 if not failures else 1
