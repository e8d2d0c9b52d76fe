import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.optimize import brentq

from listsecrecy import _core_py

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

try:
    from listsecrecy import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = [pytest.param(_core_py, id="numpy")]
if _core is not None:
    BACKENDS.append(pytest.param(_core, id="compiled"))


@pytest.fixture(params=BACKENDS)
def impl(request):
    return request.param


def h2(p):
    """Binary entropy, written out independently of the package."""
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def h2_inv(v):
    """Inverse of the binary entropy on [0, 1/2]."""
    if v <= 0:
        return 0.0
    if v >= 1:
        return 0.5
    return brentq(lambda t: h2(t) - v, 1e-300, 0.5, xtol=1e-15)


def binary_rd(p, D):
    p = min(p, 1 - p)
    return max(h2(p) - h2(D), 0.0) if D < p else 0.0


def random_pmf(rng, k):
    return rng.dirichlet(np.ones(k))


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str):
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[c]
        terminalreporter.write_line(f"criterion {c:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
