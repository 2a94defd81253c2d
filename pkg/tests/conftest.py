import numpy as np
import pytest


class CountingModel:
    """Wraps a model and records every row it is asked to predict."""

    def __init__(self, inner, batch=True):
        self.inner = inner
        self.schema = getattr(inner, "schema", None)
        self.calls = 0
        self.rows = 0
        self.probes = []
        if batch and hasattr(inner, "predict_batch"):
            self.predict_batch = self._predict_batch

    def predict(self, x):
        self.calls += 1
        self.rows += 1
        self.probes.append(dict(x))
        return self.inner.predict(x)

    def _predict_batch(self, X):
        self.calls += 1
        self.rows += len(X)
        self.probes.extend(dict(zip(self.schema, row)) for row in np.asarray(X).tolist())
        return self.inner.predict_batch(X)

    def learn_one(self, x, y):
        self.inner.learn_one(x, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def _report(name, ok, detail):
        line = f"{name}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
