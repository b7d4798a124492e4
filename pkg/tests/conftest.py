import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sepsim import apply_two_qubit_gate, measure_z_and_reset, new_product_state

settings.register_profile(
    "sepsim",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
    derandomize=True,
)
settings.load_profile("sepsim")

# criterion number -> list of (outcome, detail) gathered from test reports
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = "; ".join(v for k, v in item.user_properties if k == "detail")
        _CRITERIA.setdefault(int(mark.args[0]), []).append((rep.passed, item.name, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        results = _CRITERIA[num]
        ok = all(p for p, _, _ in results)
        tr.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}")
        for passed, name, detail in results:
            tr.write_line(f"    {'ok  ' if passed else 'FAIL'} {name}: {detail}")


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the acceptance report."""

    def add(text):
        request.node.user_properties.append(("detail", text))

    return add


# --- shared builders -------------------------------------------------------

def graph(n, edges, mode="clifford", log=False, angle=math.pi):
    st = new_product_state(n, mode, log=log)
    for e in edges:
        i, j = e[0], e[1]
        a = e[2] if len(e) > 2 else angle
        apply_two_qubit_gate(st, i, j, a)
    return st


def random_circuit(n, mode, rng, ops=None, p_gate=0.65):
    """Random gate / measure-and-reset sequence with an op log for replay."""
    st = new_product_state(n, mode, log=True)
    ops = ops if ops is not None else int(rng.integers(3 * n, 6 * n + 1))
    for _ in range(ops):
        if n >= 2 and rng.random() < p_gate:
            i, j = (int(v) for v in rng.choice(n, 2, replace=False))
            a = math.pi if mode != "iqp" else float(rng.uniform(0, 2 * math.pi))
            apply_two_qubit_gate(st, i, j, a)
        else:
            measure_z_and_reset(st, int(rng.integers(n)), rng)
    return st


def bipartitions(n):
    """Every non-trivial subset A up to complement (A holds qubit 0)."""
    for mask in range(1, 1 << (n - 1)):
        a = [0] + [i + 1 for i in range(n - 1) if (mask >> i) & 1]
        if len(a) < n:
            yield a
    yield [0]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
