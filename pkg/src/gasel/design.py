"""Variable space (main effects + pairwise interactions) and design-matrix expansion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tabular import DataError


@dataclass(frozen=True)
class VariableSpace:
    """Canonical 1-based indexing of n main effects plus all C(n,2) pairs.

    Mains occupy indices 1..n_main; pair (i, j) with i < j occupies
    n_main + (i-1)*n_main - i*(i-1)/2 + (j - i), i.e. row-major order over
    the upper triangle.
    """

    names: tuple

    @property
    def n_main(self):
        return len(self.names)

    @property
    def total(self):
        n = self.n_main
        return n + n * (n - 1) // 2

    def is_interaction(self, v):
        return v > self.n_main

    def index_of_pair(self, i, j):
        n = self.n_main
        if not (1 <= i < j <= n):
            raise DataError(f"invalid pair ({i},{j}) for n_main={n}")
        return n + (i - 1) * n - i * (i - 1) // 2 + (j - i)

    def pair_of(self, v):
        n = self.n_main
        if not (n < v <= self.total):
            raise DataError(f"index {v} is not an interaction (n_main={n}, total={self.total})")
        k = v - n
        i = 1
        while k > n - i:
            k -= n - i
            i += 1
        return (i, i + k)

    def parents(self, v):
        """Main-effect indices a variable depends on (itself if a main)."""
        if self.is_interaction(v):
            return self.pair_of(v)
        return (v,)

    def label(self, v):
        if self.is_interaction(v):
            i, j = self.pair_of(v)
            return f"{self.names[i - 1]}:{self.names[j - 1]}"
        return self.names[v - 1]


def space_for(dataset):
    """VariableSpace over the dataset's predictor columns, in schema order."""
    return VariableSpace(names=tuple(s.name for s in dataset.predictor_specs))


def check_hierarchy(space, selected):
    """Raise unless every interaction in ``selected`` has both parents selected."""
    sel = set(selected)
    for v in sel:
        if v < 1 or v > space.total:
            raise DataError(f"variable index {v} outside 1..{space.total}")
        if space.is_interaction(v):
            i, j = space.pair_of(v)
            if i not in sel or j not in sel:
                raise DataError(
                    f"strong hierarchy violated: interaction {space.label(v)} "
                    f"selected without both main effects"
                )


@dataclass
class DesignMatrix:
    """Expanded numeric design: one block of columns per selected variable."""

    X: np.ndarray  # (N, p), no intercept column
    y: np.ndarray  # (N,) in {0,1}
    labels: list  # p column labels
    groups: dict  # variable-index -> list of column positions

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def n_cols(self):
        return self.X.shape[1]


class Expander:
    """Caches per-main-effect column blocks of one dataset for repeated expansion.

    Binary/numeric mains give one column; a k-level factor gives k-1 treatment
    dummies against its first level.  Interaction blocks are all pairwise
    products of the two parents' blocks, computed on demand.
    """

    def __init__(self, dataset, space):
        self.space = space
        self.y = np.asarray(dataset.data[dataset.outcome_name], dtype=np.float64)
        self._blocks = {}
        self._labels = {}
        for idx, s in enumerate(dataset.predictor_specs, start=1):
            if s.name != space.names[idx - 1]:
                raise DataError("dataset predictors do not match variable space")
            col = dataset.data[s.name]
            if s.kind == "factor":
                ref, rest = s.levels[0], s.levels[1:]
                block = np.column_stack(
                    [(col == lv).astype(np.float64) for lv in rest]
                ) if rest else np.empty((len(col), 0))
                self._blocks[idx] = block
                self._labels[idx] = [f"{s.name}={lv}" for lv in rest]
            else:
                self._blocks[idx] = np.asarray(col, dtype=np.float64).reshape(-1, 1)
                self._labels[idx] = [s.name]

    def design(self, selected):
        check_hierarchy(self.space, selected)
        if not selected:
            raise DataError("expand requires a non-empty selection")
        order = sorted(set(selected))
        blocks, labels, groups = [], [], {}
        pos = 0
        for v in order:
            if self.space.is_interaction(v):
                i, j = self.space.pair_of(v)
                a, b = self._blocks[i], self._blocks[j]
                block = (a[:, :, None] * b[:, None, :]).reshape(len(a), -1)
                labs = [f"{la}:{lb}" for la in self._labels[i] for lb in self._labels[j]]
            else:
                block = self._blocks[v]
                labs = self._labels[v]
            blocks.append(block)
            labels.extend(labs)
            groups[v] = list(range(pos, pos + block.shape[1]))
            pos += block.shape[1]
        X = np.ascontiguousarray(np.hstack(blocks))
        return DesignMatrix(X=X, y=self.y, labels=labels, groups=groups)


def expand(dataset, space, selected):
    """One-shot expansion; use Expander directly for repeated calls."""
    return Expander(dataset, space).design(selected)
