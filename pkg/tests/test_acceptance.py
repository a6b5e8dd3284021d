"""Acceptance suite: one test per release criterion, each printing a verdict line.

The two GA-driven criteria are slow (several minutes each); run with
``pytest tests/test_acceptance.py -v -s`` to watch progress.
"""

import itertools
import json

import numpy as np
import pytest
import yaml
from scipy import stats

from gasel import ga, logit, stepwise, synthgen
from gasel.design import Expander
from gasel.ga import GaConfig, check_chromosome, crossover_prob, mutation_prob
from gasel.metrics import auc, make_folds, smr, wilcoxon_signed_rank
from gasel.pipeline import load_config, run_pipeline

BENCH_SEED = 73
GA_SEED = 11
FOLD_SEED = 1


def verdict(ok, name, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def benchmark():
    spec = synthgen.default_benchmark(n_rows=20_000, seed=BENCH_SEED)
    d = synthgen.generate(spec)
    space, truth = synthgen.true_variable_set(spec)
    folds = make_folds(d.n_rows, FOLD_SEED)
    return spec, d, space, truth, folds


@pytest.fixture(scope="module")
def ga_result(benchmark):
    # max_vars and max_generations reduced from the package defaults to meet
    # the suite's runtime budget; population, tournament and the probability
    # schedules are at their defaults, restarts fixed at the required 3 seeds
    _, d, space, _, folds = benchmark
    cfg = GaConfig(seed=GA_SEED, max_generations=80, max_vars=30, n_restarts=3)
    return ga.multi_start(d, space, cfg, folds)


def test_schedule_exactness():
    cfg = GaConfig()  # maxgen 250
    ok = (
        abs(crossover_prob(cfg, 0) - 0.5) < 1e-12
        and abs(crossover_prob(cfg, 250) - 0.2) < 1e-12
        and abs(mutation_prob(cfg, 0) - 0.01) < 1e-12
        and abs(mutation_prob(cfg, 250) - 0.2) < 1e-12
    )
    pc = [crossover_prob(cfg, i) for i in range(251)]
    pm = [mutation_prob(cfg, i) for i in range(251)]
    ok = ok and all(a >= b for a, b in zip(pc, pc[1:]))
    ok = ok and all(a <= b for a, b in zip(pm, pm[1:]))
    verdict(ok, "schedule exactness", "endpoints to 1e-12, monotone over 0..250")


def test_hierarchy_invariants_full_run():
    # full run at the package defaults; benchmark shrunk to 2,000 rows since the
    # structural invariants under test do not depend on sample size
    spec = synthgen.default_benchmark(n_rows=2_000, seed=BENCH_SEED)
    d = synthgen.generate(spec)
    space, _ = synthgen.true_variable_set(spec)
    folds = make_folds(d.n_rows, FOLD_SEED)
    cfg = GaConfig(seed=GA_SEED)  # all defaults: population 30, 5/100 vars, 250 generations
    checked = [0]

    def assert_population(i, population, reports):
        for ch in population:
            check_chromosome(ch, space, cfg)
            checked[0] += 1

    ga.evolve(d, space, cfg, folds, on_generation=assert_population)
    verdict(
        checked[0] == 251 * 30,
        "hierarchy invariant suite",
        f"{checked[0]} chromosomes checked across 251 generations, zero violations",
    )


def test_auc_oracle_equivalence():
    rng = np.random.default_rng(42)
    worst = 0.0
    n_checked = 0
    while n_checked < 1000:
        n = int(rng.integers(10, 201))
        scores = np.round(rng.random(n), 2)  # rounding injects ties
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            continue
        pos = scores[labels == 1][:, None]
        neg = scores[labels == 0][None, :]
        brute = (np.sum(pos > neg) + 0.5 * np.sum(pos == neg)) / (
            pos.shape[0] * neg.shape[1]
        )
        worst = max(worst, abs(auc(scores, labels) - brute))
        n_checked += 1
    verdict(worst < 1e-12, "AUC oracle equivalence", f"1000 instances, worst |diff|={worst:.2e}")


def test_wilcoxon_exactness():
    p10 = wilcoxon_signed_rank(np.arange(1.0, 11.0), np.zeros(10))
    verdict(
        p10 == 0.001953125 and round(p10, 4) == 0.0020,
        "Wilcoxon all-positive k=10",
        f"p={p10}",
    )
    rng = np.random.default_rng(7)
    worst = 0.0
    n_checked = 0
    while n_checked < 500:
        k = int(rng.integers(5, 13))
        a = rng.normal(size=k)
        b = a + rng.choice([-0.5, -0.25, 0.0, 0.25, 0.5], size=k)
        d = a - b
        d = d[d != 0]
        if len(d) == 0:
            continue
        ranks = stats.rankdata(np.abs(d))
        w_obs = ranks[d > 0].sum()
        lo = hi = total = 0
        for signs in itertools.product([0, 1], repeat=len(d)):
            w = sum(r for s, r in zip(signs, ranks) if s)
            total += 1
            lo += w <= w_obs + 1e-9
            hi += w >= w_obs - 1e-9
        brute = min(1.0, 2 * min(lo / total, hi / total))
        worst = max(worst, abs(wilcoxon_signed_rank(a, b) - brute))
        n_checked += 1
    verdict(worst == 0.0, "Wilcoxon exact enumeration", f"500 instances, worst |diff|={worst}")


def test_fold_rule():
    for n in (20, 23, 100, 1001):
        f = make_folds(n, seed=5)
        sizes = [len(f.test_rows(k)) for k in range(1, 11)]
        base = n // 10
        assert sizes[:9] == [base] * 9, (n, sizes)
        assert sizes[9] == n - 9 * base
        assert sorted(np.concatenate([f.test_rows(k) for k in range(1, 11)])) == list(
            range(n)
        )
    verdict(True, "fold rule", "N in {20,23,100,1001}: floor(N/10) x9 + remainder, clean partition")


def test_fitter_correctness():
    y = np.array([1.0] * 30 + [0.0] * 70)
    m = logit.fit(np.empty((100, 0)), y)
    err_closed = abs(m.coefficients[0] - np.log(0.3 / 0.7))

    rng = np.random.default_rng(31)
    X = rng.standard_normal((3000, 4))
    p_true = 1 / (1 + np.exp(-(0.3 + X @ np.array([0.8, -0.5, 0.3, 0.0]))))
    yy = (rng.random(3000) < p_true).astype(float)
    m2 = logit.fit(X, yy)
    p_hat = logit.predict(m2, X)
    Xd = np.hstack([np.ones((3000, 1)), X])
    score_err = float(np.max(np.abs(Xd.T @ (yy - p_hat))))

    beta = rng.normal(size=5)

    def ll(b):
        eta = Xd @ b
        return float(np.sum(yy * eta - np.logaddexp(0.0, eta)))

    mu = 1 / (1 + np.exp(-(Xd @ beta)))
    analytic = Xd.T @ (yy - mu)
    h = 1e-5
    grad_err = 0.0
    for k in range(5):
        e = np.zeros(5)
        e[k] = h
        fd = (ll(beta + e) - ll(beta - e)) / (2 * h)
        grad_err = max(grad_err, abs(analytic[k] - fd) / max(1.0, abs(fd)))

    verdict(
        err_closed < 1e-8 and score_err < 1e-6 and grad_err < 1e-6,
        "fitter correctness",
        f"closed-form={err_closed:.2e}, score={score_err:.2e}, grad_rel={grad_err:.2e}",
    )


def test_planted_interaction_recovery(benchmark, ga_result):
    spec, d, space, truth, _ = benchmark
    planted = [v for v in truth if space.is_interaction(v)]
    sel = ga_result.best_fitness.selected
    dm = Expander(d, space).design(sel)
    model = logit.fit(dm.X, dm.y)
    pvals = logit.wald_p_values(model)[1:]
    significant = {
        v
        for v in sel
        if space.is_interaction(v) and min(pvals[c] for c in dm.groups[v]) < 0.05
    }
    found = [v for v in planted if v in significant]
    ceiling = synthgen.generative_auc(spec)
    gap = abs(ga_result.best_fitness.mean_auc - ceiling)
    verdict(
        len(found) >= 3 and gap < 0.02,
        "planted-interaction recovery",
        f"{len(found)}/4 planted significant ({found}), "
        f"CV AUC {ga_result.best_fitness.mean_auc:.4f} vs ceiling {ceiling:.4f} "
        f"(gap {gap:.4f})",
    )


def test_ga_beats_stepwise(benchmark, ga_result):
    _, d, space, _, folds = benchmark
    sw = stepwise.stepwise_aic(d, space, folds)
    ga_aucs = ga_result.best_fitness.fold_aucs
    sw_aucs = sw.fitness.fold_aucs
    p = wilcoxon_signed_rank(ga_aucs, sw_aucs, alternative="greater")
    ok = ga_result.best_fitness.mean_auc >= sw.fitness.mean_auc and p < 0.05
    verdict(
        ok,
        "GA vs stepwise",
        f"GA {ga_result.best_fitness.mean_auc:.4f} vs stepwise "
        f"{sw.fitness.mean_auc:.4f}, one-sided Wilcoxon p={p:.6f}",
    )


def test_smr_calibration():
    # fit a model, then repeatedly generate outcomes from its own probabilities
    rng = np.random.default_rng(99)
    X = rng.standard_normal((2000, 3))
    p_true = 1 / (1 + np.exp(-(-1.2 + X @ np.array([0.9, -0.6, 0.4]))))
    y = (rng.random(2000) < p_true).astype(float)
    model = logit.fit(X, y)
    p_hat = logit.predict(model, X)
    hits = 0
    for _ in range(100):
        y_sim = (rng.random(2000) < p_hat).astype(float)
        _, ci = smr(p_hat, y_sim)
        hits += ci[0] < 1.0 < ci[1]
    verdict(hits >= 95, "SMR calibration", f"CI contained 1.0 in {hits}/100 trials")


def test_end_to_end_determinism(tmp_path):
    rng = np.random.default_rng(17)
    rows = []
    for cat in ("one", "two"):
        x1 = rng.standard_normal(250)
        x2 = rng.standard_normal(250)
        x3 = rng.standard_normal(250)
        lp = -0.4 + 1.5 * x1 - 0.8 * x2
        y = (rng.random(250) < 1 / (1 + np.exp(-lp))).astype(int)
        rows += [
            f"{float(a)!r},{float(b)!r},{float(c)!r},{cat},{d}"
            for a, b, c, d in zip(x1, x2, x3, y)
        ]
    data = tmp_path / "data.csv"
    data.write_text("x1,x2,x3,dx,y\n" + "\n".join(rows) + "\n", encoding="utf-8")
    cfg_dict = {
        "data": str(data),
        "seed": 4,
        "columns": [
            {"name": "x1", "kind": "numeric"},
            {"name": "x2", "kind": "numeric"},
            {"name": "x3", "kind": "numeric"},
            {"name": "dx", "kind": "factor", "role": "category"},
            {"name": "y", "kind": "binary", "role": "outcome"},
        ],
        "ga": {
            "population_size": 8,
            "min_vars": 1,
            "max_vars": 4,
            "max_generations": 4,
            "tournament_size": 3,
            "n_restarts": 2,
        },
    }
    cfg_path = tmp_path / "config.yaml"
    cfg_path.write_text(yaml.safe_dump(cfg_dict), encoding="utf-8")

    outputs = {}
    for run, threads in (("a", 1), ("b", 1), ("c", 3)):
        cfg = load_config(cfg_path, {"out": str(tmp_path / run), "threads": threads})
        assert run_pipeline(cfg) == 0
        outputs[run] = {
            str(p.relative_to(tmp_path / run)): p.read_bytes()
            for p in (tmp_path / run).rglob("*")
            if p.is_file()
        }
    same_seed = outputs["a"] == outputs["b"]
    same_threads = outputs["a"] == outputs["c"]
    verdict(
        same_seed and same_threads,
        "end-to-end determinism",
        "byte-identical outputs across reruns and across --threads 1/3",
    )
