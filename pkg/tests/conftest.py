import functools
import zlib

import numpy as np
import pytest


def rel_err(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# registry functions for the up-set suites, each with a sampling box for the
# lower point that straddles its abscissa
UPSET_BOXES = {
    "exp_decay(1)": ((-1.8, 1.0), (-1.8, 1.0)),
    "gkernel(0.5)": ((-0.5, 1.5), (-0.5, 1.5)),
    "poly_exp(k1=1, k2=0, w1=1, w2=0)": ((0.3, 2.5), (-0.5, 1.5)),
    "fresnel2d": ((-0.5, 1.5), (-0.5, 1.5)),
    "ml_pair(0.5, 1, 1)": ((0.6, 2.5), (0.6, 2.5)),
}
UPSET_SUITE = list(UPSET_BOXES)
UPSET_MARGIN = 0.25


def upset_pairs(spec, count=20):
    """``count`` pairs ``(lo, hi)`` with ``hi_j >= lo_j + UPSET_MARGIN`` on every axis."""
    gen = np.random.default_rng(zlib.crc32(spec.encode()))
    pairs = []
    for _ in range(count):
        lo = tuple(round(float(gen.uniform(a, b)), 3) for a, b in UPSET_BOXES[spec])
        hi = tuple(round(x + UPSET_MARGIN + float(gen.uniform(0.0, 1.5)), 3) for x in lo)
        pairs.append((lo, hi))
    return pairs


@functools.lru_cache(maxsize=None)
def cached_verdict(spec, point):
    """classify_point memoised across test modules (the up-set suites share points)."""
    from mdlt import classify_point, get_function

    return classify_point(get_function(spec), point)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
