import pytest

from dangsim.engine import Engine, EngineConfig
from dangsim.logstore import CompressionMode

MODES = [CompressionMode.parse(m) for m in ("off", "block:256", "full")]


@pytest.fixture
def engine():
    return Engine(EngineConfig(oracle_check=True))


@pytest.fixture(params=MODES, ids=str)
def mode(request):
    return request.param


_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.failed and rep.when == "setup"):
        number, title = marker.args
        _acceptance.append((number, title, rep.passed, getattr(item, "detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, passed, detail in sorted(_acceptance, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}" + (f" ({detail})" if detail else ""))
