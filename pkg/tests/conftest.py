import numpy as np
import pytest

from llmfs.data import Dataset, SynthSpec, generate_synthetic


@pytest.fixture(scope="session")
def synth_recovery():
    """The informative-feature recovery set: 1000 x 50, 5 informative, shift 2."""
    return generate_synthetic(SynthSpec(1000, 50, 5, 2.0, 7))


@pytest.fixture(scope="session")
def synth_small():
    return generate_synthetic(SynthSpec(200, 10, 3, 4.0, 3))


def make_dataset(X, y, names=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = names or [f"c{j}" for j in range(X.shape[1])]
    return Dataset(X, np.asarray(y), tuple(names))


def random_dataset(rng, n, d):
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    return make_dataset(rng.standard_normal((n, d)) * rng.uniform(0.5, 3, d), y)


ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[n])
