"""Genetic-algorithm variable selection over mains and pairwise interactions.

Chromosomes are fixed-length vectors of variable indices with 0 marking a
dummy (empty) slot.  Selection is tournament-based with elitism, crossover is
single-point at the chromosome midpoint, and mutation is split into deletion
and addition events whose probabilities anneal linearly over the run.  Strong
hierarchy (an interaction only with both parents present) is enforced after
every operator.  Fitness is the 10-fold cross-validated mean AUC.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import Expander
from .metrics import cv_fitness
from .tabular import DataError


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 30
    min_vars: int = 5
    max_vars: int = 100  # chromosome length L
    max_generations: int = 250
    p_c_max: float = 0.5
    p_c_min: float = 0.2
    p_m_min: float = 0.01
    p_m_max: float = 0.2
    tournament_size: int = 10
    seed: int = 0
    n_restarts: int = 5

    def __post_init__(self):
        if not (1 <= self.min_vars <= self.max_vars):
            raise DataError("need 1 <= min_vars <= max_vars")
        if self.p_c_min > self.p_c_max or self.p_m_min > self.p_m_max:
            raise DataError("probability bounds out of order")
        if self.tournament_size > self.population_size:
            raise DataError("tournament_size cannot exceed population_size")


@dataclass
class GenerationRecord:
    generation: int
    best_auc: float
    mean_auc: float
    p_c: float
    p_m: float
    best_vars: tuple


@dataclass
class GaResult:
    best: np.ndarray
    best_fitness: object  # FitnessReport
    history: list
    seed_used: int


def crossover_prob(cfg, i):
    """Linear anneal from p_c_max at generation 0 down to p_c_min at maxgen."""
    if not (0 <= i <= cfg.max_generations):
        raise DataError("generation out of range")
    if cfg.max_generations == 0:
        return cfg.p_c_max
    return cfg.p_c_max - (i / cfg.max_generations) * (cfg.p_c_max - cfg.p_c_min)


def mutation_prob(cfg, i):
    """Linear anneal from p_m_min at generation 0 up to p_m_max at maxgen."""
    if not (0 <= i <= cfg.max_generations):
        raise DataError("generation out of range")
    if cfg.max_generations == 0:
        return cfg.p_m_min
    return cfg.p_m_min + (i / cfg.max_generations) * (cfg.p_m_max - cfg.p_m_min)


def variables_of(chrom):
    """Sorted tuple of the variable indices carried by a chromosome."""
    return tuple(sorted(int(v) for v in chrom[chrom != 0]))


def var_count(chrom):
    return int(np.count_nonzero(chrom))


def repair_hierarchy(chrom, space, rng):
    """Insert missing parent mains into random dummy slots, left-to-right.

    If an interaction's parents cannot all be placed (no dummy slots left),
    that interaction is rolled back to a dummy bit instead.  Mutates and
    returns ``chrom``.
    """
    for pos in range(len(chrom)):
        v = int(chrom[pos])
        if v == 0 or not space.is_interaction(v):
            continue
        present = set(int(x) for x in chrom[chrom != 0])
        needed = [m for m in space.pair_of(v) if m not in present]
        for k, m in enumerate(needed):
            dummies = np.flatnonzero(chrom == 0)
            if len(dummies) == 0:
                # roll back: undo mains inserted for this interaction, drop it
                for mm in needed[:k]:
                    chrom[chrom == mm] = 0
                chrom[pos] = 0
                break
            slot = int(rng.choice(dummies))
            chrom[slot] = m
    return chrom


def check_chromosome(chrom, space, cfg):
    """Raise on duplicate variables, count-bound breach, or hierarchy violation."""
    vals = chrom[chrom != 0]
    if len(vals) != len(set(int(v) for v in vals)):
        raise DataError("duplicate variable in chromosome")
    c = len(vals)
    if not (cfg.min_vars <= c <= cfg.max_vars):
        raise DataError(f"variable count {c} outside [{cfg.min_vars}, {cfg.max_vars}]")
    present = set(int(v) for v in vals)
    for v in present:
        if space.is_interaction(v):
            i, j = space.pair_of(v)
            if i not in present or j not in present:
                raise DataError("hierarchy violation in chromosome")


def init_chromosome(space, cfg, rng, preseed=None):
    """Random chromosome: count drawn uniformly from [min_vars, L], distinct
    variables into distinct random slots, then hierarchy repair.  A repair
    that drops below min_vars (rolled-back interactions) triggers a redraw.
    ``preseed`` replaces the random variable draw."""
    L = cfg.max_vars
    if preseed is not None:
        pre = [int(v) for v in preseed]
        if len(pre) != len(set(pre)) or any(not (1 <= v <= space.total) for v in pre):
            raise DataError("invalid pre-seeded variable list")
        if len(pre) > L:
            raise DataError("pre-seeded variables exceed chromosome length")
        chrom = np.zeros(L, dtype=np.int64)
        positions = rng.choice(L, size=len(pre), replace=False)
        chrom[positions] = pre
        repair_hierarchy(chrom, space, rng)
        if var_count(chrom) < cfg.min_vars or var_count(chrom) > L:
            raise DataError("pre-seeded chromosome violates count bounds after repair")
        return chrom
    while True:
        c = int(rng.integers(cfg.min_vars, L + 1))
        chrom = np.zeros(L, dtype=np.int64)
        positions = rng.choice(L, size=c, replace=False)
        variables = rng.choice(space.total, size=c, replace=False) + 1
        chrom[positions] = variables
        repair_hierarchy(chrom, space, rng)
        if var_count(chrom) >= cfg.min_vars:
            return chrom


def tournament_select(population, fitnesses, cfg, rng):
    """Index of the fittest of tournament_size members drawn without replacement;
    ties go to the lower population index."""
    if len(population) == 0:
        raise DataError("empty population")
    k = min(cfg.tournament_size, len(population))
    entrants = rng.choice(len(population), size=k, replace=False)
    best = None
    for idx in sorted(int(e) for e in entrants):
        if best is None or fitnesses[idx] > fitnesses[best]:
            best = idx
    return best


def _pad_to_min(chrom, space, cfg, rng):
    """Addition draws until the count floor is met (mains only keep it simple
    and never need repair)."""
    while var_count(chrom) < cfg.min_vars:
        dummies = np.flatnonzero(chrom == 0)
        present = set(int(v) for v in chrom[chrom != 0])
        absent_mains = [v for v in range(1, space.n_main + 1) if v not in present]
        if len(dummies) == 0 or not absent_mains:
            break
        slot = int(rng.choice(dummies))
        chrom[slot] = int(rng.choice(absent_mains))
    return chrom


def crossover(a, b, space, cfg, rng):
    """Single-point crossover at floor(L/2), then duplicate removal (first
    occurrence wins), hierarchy repair, and padding up to min_vars."""
    if len(a) != len(b):
        raise DataError("chromosome length mismatch")
    mid = len(a) // 2
    children = (
        np.concatenate([a[:mid], b[mid:]]),
        np.concatenate([b[:mid], a[mid:]]),
    )
    out = []
    for child in children:
        seen = set()
        for pos in range(len(child)):
            v = int(child[pos])
            if v == 0:
                continue
            if v in seen:
                child[pos] = 0
            else:
                seen.add(v)
        repair_hierarchy(child, space, rng)
        _pad_to_min(child, space, cfg, rng)
        out.append(child)
    return tuple(out)


def mutate(chrom, space, cfg, p_add, p_del, rng):
    """Deletion then addition, each firing independently.

    Deletion blanks one random non-dummy slot; deleting a main effect cascades
    to all its interactions, and is skipped entirely if the result would fall
    below min_vars.  Addition writes one absent variable into a random dummy
    slot; an added interaction pulls in missing parents via hierarchy repair
    (rolled back if there is no room).  Returns a new chromosome.
    """
    chrom = chrom.copy()
    do_del = rng.random() < p_del
    do_add = rng.random() < p_add
    if do_del:
        nonzero = np.flatnonzero(chrom != 0)
        if len(nonzero) > 0:
            slot = int(rng.choice(nonzero))
            victim = int(chrom[slot])
            doomed = {victim}
            if not space.is_interaction(victim):
                for v in chrom[chrom != 0]:
                    v = int(v)
                    if space.is_interaction(v) and victim in space.pair_of(v):
                        doomed.add(v)
            if var_count(chrom) - len(doomed) >= cfg.min_vars:
                mask = np.isin(chrom, list(doomed))
                chrom[mask] = 0
    if do_add:
        dummies = np.flatnonzero(chrom == 0)
        present = set(int(v) for v in chrom[chrom != 0])
        absent = [v for v in range(1, space.total + 1) if v not in present]
        if len(dummies) > 0 and absent:
            slot = int(rng.choice(dummies))
            chrom[slot] = int(rng.choice(absent))
            if space.is_interaction(int(chrom[slot])):
                repair_hierarchy(chrom, space, rng)
    return chrom


def evolve(dataset, space, cfg, folds, on_generation=None, threads=1, expander=None):
    """One GA run.  Each generation keeps the elite, adds a forced mutation of
    the elite (guaranteed deletion and addition), and fills the rest by
    tournament-selected parents that cross over with probability p_c(i) or are
    copied through, all non-elite members then mutating at p_m(i).  Fitness is
    memoized by variable set; evaluation consumes no randomness, so threaded
    evaluation cannot perturb results."""
    rng = np.random.default_rng(cfg.seed)
    if expander is None:
        expander = Expander(dataset, space)
    cache = {}

    def evaluate(pop):
        keys = [variables_of(ch) for ch in pop]
        todo = sorted(set(k for k in keys if k not in cache))
        if threads > 1 and len(todo) > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as ex:
                for k, rep in zip(
                    todo,
                    ex.map(lambda k: cv_fitness(dataset, space, k, folds, expander), todo),
                ):
                    cache[k] = rep
        else:
            for k in todo:
                cache[k] = cv_fitness(dataset, space, k, folds, expander)
        return [cache[k] for k in keys]

    population = [init_chromosome(space, cfg, rng) for _ in range(cfg.population_size)]
    history = []
    best_idx = 0
    reports = []
    for i in range(cfg.max_generations + 1):
        reports = evaluate(population)
        fits = [r.mean_auc for r in reports]
        best_idx = int(np.argmax(fits))  # argmax takes the first on ties
        history.append(
            GenerationRecord(
                generation=i,
                best_auc=fits[best_idx],
                mean_auc=float(np.mean(fits)),
                p_c=crossover_prob(cfg, i),
                p_m=mutation_prob(cfg, i),
                best_vars=variables_of(population[best_idx]),
            )
        )
        if on_generation is not None:
            on_generation(i, population, reports)
        if i == cfg.max_generations:
            break
        p_c = crossover_prob(cfg, i)
        p_m = mutation_prob(cfg, i)
        elite = population[best_idx]
        nxt = [elite.copy(), mutate(elite, space, cfg, 1.0, 1.0, rng)]
        while len(nxt) < cfg.population_size:
            p1 = tournament_select(population, fits, cfg, rng)
            p2 = tournament_select(population, fits, cfg, rng)
            if p2 == p1:
                p2 = tournament_select(population, fits, cfg, rng)  # one redraw
            pa, pb = population[p1], population[p2]
            if rng.random() < p_c:
                c1, c2 = crossover(pa, pb, space, cfg, rng)
            else:
                c1, c2 = pa.copy(), pb.copy()
            nxt.append(mutate(c1, space, cfg, p_m, p_m, rng))
            if len(nxt) < cfg.population_size:
                nxt.append(mutate(c2, space, cfg, p_m, p_m, rng))
        population = nxt

    return GaResult(
        best=population[best_idx].copy(),
        best_fitness=reports[best_idx],
        history=history,
        seed_used=cfg.seed,
    )


def multi_start(dataset, space, cfg, folds, on_generation=None, threads=1):
    """Restart evolve() with seeds seed, seed+1, ... and keep the best result.

    Folds are held fixed across restarts so restart fitnesses are comparable.
    """
    if cfg.n_restarts < 1:
        raise DataError("n_restarts must be at least 1")
    from dataclasses import replace as dc_replace

    expander = Expander(dataset, space)
    best = None
    for r in range(cfg.n_restarts):
        run_cfg = dc_replace(cfg, seed=cfg.seed + r)
        res = evolve(
            dataset, space, run_cfg, folds,
            on_generation=on_generation, threads=threads, expander=expander,
        )
        if best is None or res.best_fitness.mean_auc > best.best_fitness.mean_auc:
            best = res
    return best


def history_lines(result):
    """Per-generation history as line-delimited JSON for monitoring/plotting."""
    import json

    lines = []
    for rec in result.history:
        lines.append(
            json.dumps(
                {
                    "generation": rec.generation,
                    "best_auc": rec.best_auc,
                    "mean_auc": rec.mean_auc,
                    "p_c": rec.p_c,
                    "p_m": rec.p_m,
                    "best_vars": list(rec.best_vars),
                },
                sort_keys=True,
            )
        )
    return lines
