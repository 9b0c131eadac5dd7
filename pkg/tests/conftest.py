import numpy as np
import pytest

from gaugesets.scalar import GaugeSpec

# gauges exercised by the randomized suites
SPECS = [
    GaugeSpec.quantile(0.3),
    GaugeSpec.quantile(1.0),
    GaugeSpec.quantile_upper(0.6),
    GaugeSpec.quantile_upper(0.0),
    GaugeSpec.essinf(),
    GaugeSpec.esssup(),
    GaugeSpec.mean(),
    GaugeSpec.avgq_right(0.0),
    GaugeSpec.avgq_right(0.75),
    GaugeSpec.avgq_left(0.25),
    GaugeSpec.avgq_left(1.0),
    GaugeSpec.expectile(0.2),
    GaugeSpec.expectile(0.5),
    GaugeSpec.expectile(0.9),
    GaugeSpec.norm(1.0, 0.5),
    GaugeSpec.norm(2.0, 1.0),
    GaugeSpec.norm(3.0, 0.3),
    GaugeSpec.dual(GaugeSpec.avgq_right(0.6)),
    GaugeSpec.maxext(2, GaugeSpec.mean()),
    GaugeSpec.minext(3, GaugeSpec.mean()),
    GaugeSpec.maxext(2, GaugeSpec.avgq_right(0.5)),
]


def random_sample(rng, n_max=6, integer=False):
    n = int(rng.integers(1, n_max + 1))
    if integer:
        v = rng.integers(-4, 5, size=n).astype(float)
    else:
        v = rng.normal(size=n) * rng.uniform(0.5, 3.0)
    w = rng.dirichlet(np.ones(n))
    return v, w


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance reporting: one PASS/FAIL line per criterion at the end of the run
_acceptance = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    entry = _acceptance.setdefault(number, {"title": title, "ok": True, "ran": False})
    if call.when == "call" or call.excinfo is not None:
        entry["ran"] = True
        if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
            entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        e = _acceptance[number]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {number:2d}: {e['title']}")
