import numpy as np
import pytest

from pairshape.curves import PlanarCurve, preprocess, to_srvf


def blob(rng, m=100, amp=0.1, harmonics=(2, 3, 4), closed=True, n_dense=400):
    """Random smooth star-shaped outline (or an open arc of one)."""
    t = np.arange(n_dense) / n_dense if closed else np.linspace(0, 0.75, n_dense)
    r = np.ones_like(t)
    for k in harmonics:
        r += rng.normal(0, amp) * np.cos(2 * np.pi * k * t + rng.uniform(0, 2 * np.pi))
    pts = np.column_stack([r * np.cos(2 * np.pi * t), r * np.sin(2 * np.pi * t)])
    return preprocess(PlanarCurve(pts, closed), m)


def blob_srvf(rng, m=100, **kw):
    return to_srvf(blob(rng, m, **kw))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
