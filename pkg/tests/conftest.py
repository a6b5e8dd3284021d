import numpy as np
import pytest

from gasel.tabular import ColumnSpec, Dataset


def make_dataset(columns, outcome=None):
    """Build a Dataset from {name: (kind, values)} plus an optional outcome array."""
    specs = []
    data = {}
    missing = {}
    n = None
    for name, (kind, values) in columns.items():
        if kind == "factor":
            arr = np.array([str(v) for v in values], dtype=object)
            specs.append(ColumnSpec(name=name, kind=kind, levels=tuple(sorted(set(arr)))))
        else:
            arr = np.asarray(values, dtype=np.float64)
            specs.append(ColumnSpec(name=name, kind=kind))
        data[name] = arr
        missing[name] = np.zeros(len(arr), dtype=bool)
        n = len(arr)
    if outcome is not None:
        specs.append(ColumnSpec(name="y", kind="binary", role="outcome"))
        data["y"] = np.asarray(outcome, dtype=np.float64)
        missing["y"] = np.zeros(n, dtype=bool)
    return Dataset(specs=specs, data=data, missing=missing)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
