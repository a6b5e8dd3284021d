"""Bidirectional stepwise-AIC baseline over main effects only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import logit
from .design import Expander
from .metrics import cv_fitness


@dataclass
class StepwiseResult:
    selected: tuple  # main-effect variable indices
    aic_trace: list  # (step, action, variable-or-None, aic)
    fitness: object  # FitnessReport, or None if nothing was selected


def _aic_of(expander, selected, y):
    if selected:
        X = expander.design(selected).X
    else:
        X = np.empty((len(y), 0))
    return logit.aic(logit.fit(X, y))


def stepwise_aic(dataset, space, folds):
    """Greedy add-or-drop search from the intercept-only model, committing the
    single move with the lowest full-data AIC until no move improves it.

    Interactions are excluded from the search (435 candidates make
    bidirectional stepwise intractable); the comparison against the GA is
    therefore mains-only stepwise versus interaction-aware GA.
    """
    expander = Expander(dataset, space)
    y = expander.y
    current = set()
    current_aic = _aic_of(expander, current, y)
    trace = [(0, "start", None, current_aic)]
    step = 0
    while True:
        step += 1
        best_move = None
        best_aic = current_aic
        for v in range(1, space.n_main + 1):
            if v in current:
                cand = current - {v}
                action = "drop"
            else:
                cand = current | {v}
                action = "add"
            a = _aic_of(expander, tuple(sorted(cand)), y)
            if a < best_aic - 1e-12:
                best_aic = a
                best_move = (action, v, cand)
        if best_move is None:
            break
        action, v, current = best_move[0], best_move[1], best_move[2]
        current_aic = best_aic
        trace.append((step, action, v, current_aic))
    selected = tuple(sorted(current))
    fitness = (
        cv_fitness(dataset, space, selected, folds, expander=expander) if selected else None
    )
    return StepwiseResult(selected=selected, aic_trace=trace, fitness=fitness)


def trace_lines(result):
    out = []
    for step, action, v, a in result.aic_trace:
        var = "-" if v is None else str(v)
        out.append(f"{step}\t{action}\t{var}\t{a:.6f}")
    return out
