import time

import numpy as np
import pytest
from scipy import stats

from logbranch import ModelParams, SimConfig, estimate_law

BIG_SIM_SEED = 20240817
BIG_SIM_REPLICATES = 1_000_000
BIG_SIM_HORIZONS = (0.5, 1.0, 2.0)


def chi_square_pvalue(data, pmf, start, nbins):
    """Goodness-of-fit p-value with bins {start..start+nbins-1, rest}.

    ``data`` is either an array of draws or a {value: count} histogram.
    """
    if isinstance(data, dict):
        items = data.items()
        total = sum(data.values())
    else:
        values, counts = np.unique(data, return_counts=True)
        items = zip(values.tolist(), counts.tolist())
        total = len(data)
    observed = np.zeros(nbins + 1)
    for value, count in items:
        index = value - start
        if index < 0:
            raise ValueError(f"draw {value} below support start {start}")
        observed[index if index < nbins else nbins] += count
    head = np.array([pmf(n) for n in range(start, start + nbins)])
    expected = np.append(head, 1.0 - head.sum()) * total
    return stats.chisquare(observed, expected).pvalue


@pytest.fixture(scope="session")
def gof_pvalue():
    return chi_square_pvalue


@pytest.fixture(scope="session")
def params_half():
    return ModelParams(0.5, 1.0)


@pytest.fixture(scope="session")
def big_sim(params_half):
    """One million replicates at three horizons, shared by the Monte Carlo
    acceptance gate and the three-way agreement checks.  Returns
    (config, laws-per-horizon, wall seconds)."""
    cfg = SimConfig(params_half, BIG_SIM_HORIZONS, BIG_SIM_REPLICATES, BIG_SIM_SEED)
    start = time.perf_counter()
    laws = estimate_law(cfg)
    elapsed = time.perf_counter() - start
    return cfg, laws, elapsed
