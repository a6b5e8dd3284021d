"""Command-line entry points: preprocess, ga, stepwise, compare, report, synth."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline, synthgen


def _add_common(p):
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", default=None, help="override output directory")
    p.add_argument("--category", default=None, help="restrict to one category label")
    p.add_argument("--threads", type=int, default=None, help="parallel fitness workers")


def _load(args):
    overrides = {"seed": args.seed, "out": args.out, "threads": args.threads}
    cfg = pipeline.load_config(args.config, overrides)
    if args.category is not None:
        cfg.categories = [args.category]
    return cfg


def _cmd_preprocess(args):
    cfg = _load(args)
    out = Path(cfg.out) / "preprocessed"
    out.mkdir(parents=True, exist_ok=True)
    for label, sub in pipeline.preprocess(cfg):
        name = pipeline.slug(label)
        synthgen.write_csv(sub, out / f"{name}.csv", delimiter=cfg.delimiter)
        stats = {k: list(v) for k, v in sub.scaling_stats.items()}
        (out / f"{name}.scaling.json").write_text(
            json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def _cmd_ga(args):
    cfg = _load(args)
    return pipeline.run_pipeline(cfg, do_ga=True, do_stepwise=False)


def _cmd_stepwise(args):
    cfg = _load(args)
    return pipeline.run_pipeline(cfg, do_ga=False, do_stepwise=True)


def _cmd_compare(args):
    cfg = _load(args)
    return pipeline.run_pipeline(cfg, do_ga=True, do_stepwise=True)


def _cmd_report(args):
    out = Path(args.out)
    found = sorted(out.glob("*/summary.json"))
    if not found:
        print(f"no summary.json files under {out}", file=sys.stderr)
        return 1
    for path in found:
        summary = pipeline.ModelSummary.from_dict(json.loads(path.read_text()))
        text = pipeline.render_summary(summary)
        (path.parent / "summary.txt").write_text(text, encoding="utf-8")
        print(text)
    return 0


def _cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = synthgen.default_benchmark(n_rows=args.rows, seed=args.seed)
    d = synthgen.generate(spec)
    synthgen.write_csv(d, out / "data.csv")
    synthgen.write_truth(spec, out / "truth.json")
    config = {
        "data": str(out / "data.csv"),
        "out": str(out / "results"),
        "seed": args.seed,
        "columns": [
            {"name": s.name, "kind": s.kind, "role": s.role} for s in d.specs
        ],
    }
    import yaml

    (out / "config.yaml").write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
    print(f"wrote {out / 'data.csv'} ({d.n_rows} rows), truth.json, config.yaml")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gasel",
        description="GA variable selection with pairwise interactions for "
        "logistic risk models, plus a stepwise-AIC baseline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, doc in [
        ("preprocess", _cmd_preprocess, "clean/standardize and write per-category data"),
        ("ga", _cmd_ga, "run the GA selector per category"),
        ("stepwise", _cmd_stepwise, "run the stepwise-AIC baseline per category"),
        ("compare", _cmd_compare, "run GA and stepwise, with paired-fold Wilcoxon"),
    ]:
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("report", help="re-render tables from saved summary.json files")
    p.add_argument("--out", required=True, help="results directory to scan")
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("synth", help="write the synthetic benchmark dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--rows", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=73)
    p.set_defaults(fn=_cmd_synth)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
