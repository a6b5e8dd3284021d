"""Cross-validation folds, rank-based AUC, SMR, and the exact Wilcoxon signed-rank test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import logit
from .design import Expander, check_hierarchy
from .tabular import DataError

N_FOLDS = 10
EXACT_WILCOXON_LIMIT = 25


@dataclass(frozen=True)
class FoldAssignment:
    """Ten-fold partition: folds 1-9 hold floor(n/10) rows, fold 10 the remainder."""

    n: int
    fold_of: np.ndarray  # (n,) ints in 1..10
    seed: int

    def test_rows(self, f):
        return np.flatnonzero(self.fold_of == f)

    def train_rows(self, f):
        return np.flatnonzero(self.fold_of != f)


@dataclass
class FitnessReport:
    selected: tuple  # sorted variable indices
    fold_aucs: tuple  # 10 values
    mean_auc: float
    smr: float
    smr_ci: tuple


def make_folds(n, seed):
    """Uniformly random fold assignment, deterministic per seed."""
    if n < 2 * N_FOLDS:
        raise DataError(f"need at least {2 * N_FOLDS} rows for 10-fold CV, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    base = n // N_FOLDS
    fold_of = np.empty(n, dtype=np.int64)
    for f in range(1, N_FOLDS):
        fold_of[perm[(f - 1) * base : f * base]] = f
    fold_of[perm[(N_FOLDS - 1) * base :]] = N_FOLDS
    return FoldAssignment(n=n, fold_of=fold_of, seed=seed)


def auc(scores, labels):
    """Mann-Whitney AUC with half credit for ties, via average ranks (O(N log N))."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC requires both classes present")
    ranks = stats.rankdata(scores)  # average ranks on ties
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def smr(predicted, labels):
    """Standardized mortality ratio with a Poisson-count 95% CI.

    Returns (observed/expected, (low, high)) with the interval
    (observed +/- 1.96*sqrt(observed)) / expected.
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if len(labels) == 0:
        raise DataError("SMR of an empty sample")
    observed = float(labels.sum())
    expected = float(predicted.sum())
    if expected <= 0.0:
        raise DataError("SMR undefined: zero expected events")
    half = 1.96 * np.sqrt(observed)
    return observed / expected, ((observed - half) / expected, (observed + half) / expected)


def _signed_rank_stat(diffs):
    """(W+, doubled ranks) after dropping zero differences; average ranks on ties."""
    d = np.asarray(diffs, dtype=np.float64)
    d = d[d != 0.0]
    if len(d) == 0:
        raise DataError("Wilcoxon signed-rank: all differences are zero")
    ranks = stats.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    # doubling makes tied (half-integer) average ranks exact integers
    r2 = np.rint(2.0 * ranks).astype(np.int64)
    return w_plus, r2


def _exact_tail_counts(r2, target2):
    """(#assignments with 2*W+ <= target2, #with 2*W+ >= target2) over all 2^m signs.

    Computed by the subset-sum distribution of the doubled ranks, which is
    identical to enumerating every sign assignment.
    """
    total = int(r2.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in r2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    lo = float(counts[: target2 + 1].sum())
    hi = float(counts[target2:].sum())
    return lo, hi, float(counts.sum())


def wilcoxon_signed_rank(a, b, alternative="two-sided"):
    """Paired signed-rank p-value for differences a - b.

    Exact over all sign assignments when at most EXACT_WILCOXON_LIMIT nonzero
    differences remain; otherwise a tie-corrected normal approximation with
    continuity correction.  ``alternative`` is "two-sided", "greater" (a tends
    to exceed b) or "less".
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError("paired samples must have equal length")
    w_plus, r2 = _signed_rank_stat(a - b)
    m = len(r2)
    w2 = int(round(2.0 * w_plus))
    if m <= EXACT_WILCOXON_LIMIT:
        lo, hi, denom = _exact_tail_counts(r2, w2)
        p_lo, p_hi = lo / denom, hi / denom
    else:
        mean = r2.sum() / 4.0  # = m(m+1)/4 in original units, tie-safe
        var = float(np.sum((r2 / 2.0) ** 2)) / 4.0
        sd = np.sqrt(var)
        p_lo = float(stats.norm.cdf((w_plus + 0.5 - mean) / sd))
        p_hi = float(stats.norm.sf((w_plus - 0.5 - mean) / sd))
    if alternative == "greater":
        return p_hi
    if alternative == "less":
        return p_lo
    if alternative == "two-sided":
        return min(1.0, 2.0 * min(p_lo, p_hi))
    raise DataError(f"unknown alternative {alternative!r}")


def cv_fitness(dataset, space, selected, folds, expander=None, threads=1):
    """10-fold cross-validated fitness of one candidate variable set.

    Fits on nine folds, scores the held-out fold, and averages the ten AUCs;
    SMR is computed from the pooled out-of-fold predictions.  Deterministic:
    no randomness is consumed, and fold results are reduced in fold order.
    """
    selected = tuple(sorted(set(selected)))
    if not selected:
        raise DataError("cv_fitness requires a non-empty selection")
    check_hierarchy(space, selected)
    if expander is None:
        expander = Expander(dataset, space)
    dm = expander.design(selected)
    if folds.n != dm.n_rows:
        raise DataError("fold assignment does not match dataset size")
    # warm start per-fold fits from the full-data fit
    full = logit.fit(dm.X, dm.y)

    def one_fold(f):
        tr = folds.train_rows(f)
        te = folds.test_rows(f)
        y_tr = dm.y[tr]
        if y_tr.min() == y_tr.max():
            raise DataError(f"training split for fold {f} has a single outcome class")
        model = logit.fit(dm.X[tr], y_tr, warm_start=full.coefficients)
        p = logit.predict(model, dm.X[te])
        return auc(p, dm.y[te]), p

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one_fold, range(1, N_FOLDS + 1)))
    else:
        results = [one_fold(f) for f in range(1, N_FOLDS + 1)]

    fold_aucs = tuple(r[0] for r in results)
    pooled = np.empty(dm.n_rows, dtype=np.float64)
    for f, (_, p) in zip(range(1, N_FOLDS + 1), results):
        pooled[folds.test_rows(f)] = p
    ratio, ci = smr(pooled, dm.y)
    return FitnessReport(
        selected=selected,
        fold_aucs=fold_aucs,
        mean_auc=float(np.mean(fold_aucs)),
        smr=ratio,
        smr_ci=ci,
    )
