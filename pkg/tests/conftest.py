import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_sphere_means(f):
    """Oracle: average of f over each Hamming sphere by direct enumeration."""
    size = len(f)
    n = size.bit_length() - 1
    out = np.zeros((size, n + 1))
    cnt = np.zeros((size, n + 1))
    for x in range(size):
        for y in range(size):
            d = bin(x ^ y).count("1")
            out[x, d] += f[y]
            cnt[x, d] += 1
    return out / cnt


_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """Record and print one acceptance line; returns a callable ``(k, passed, detail)``."""
    def record(k, passed, detail):
        line = f"CRITERION {k}: {'PASS' if passed else 'FAIL'} {detail}"
        request.config.stash[_CRITERIA][k] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, {})
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
