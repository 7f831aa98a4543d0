import os

import numpy as np
import pytest

from peclab import worlds
from peclab.datagen import generate_table2_world
from peclab.exchprob import empirical_table
from peclab.harness import reproduce

ACCEPT_N = 1_000_000
JOBS = min(os.cpu_count() or 1, 2)


@pytest.fixture(scope="session")
def table2_dataset():
    return generate_table2_world(ACCEPT_N, worlds.DEFAULT_SEED)


@pytest.fixture(scope="session")
def table2_table(table2_dataset):
    return empirical_table(table2_dataset)


@pytest.fixture(scope="session")
def table3_report():
    return reproduce("table3", seed=worlds.DEFAULT_SEED, jobs=JOBS)


@pytest.fixture(scope="session")
def table4_report():
    return reproduce("table4", seed=worlds.DEFAULT_SEED, jobs=JOBS)


@pytest.fixture(scope="session")
def table5_report():
    return reproduce("table5", seed=worlds.DEFAULT_SEED, jobs=JOBS)


def two_sample_ks(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(a)
    b = np.sort(b)
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical(n: int, m: int, alpha_coeff: float = 1.628) -> float:
    """Two-sample KS critical value; 1.628 is the 1% coefficient."""
    return alpha_coeff * np.sqrt((n + m) / (n * m))
