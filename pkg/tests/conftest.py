import pytest
from hypothesis import settings

from quadspec.precision import parse_real
from quadspec.ritz import ritz_converged
from quadspec.rpm import rpm_converged

settings.register_profile("quadspec", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("quadspec")

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = "PASS" if report.passed else "FAIL"
        if _ACCEPTANCE.get(number, (title, "PASS"))[1] == "FAIL":
            verdict = "FAIL"
        _ACCEPTANCE[number] = (title, verdict)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, verdict = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} [{verdict}] {title}")


@pytest.fixture(scope="session")
def root2():
    return parse_real("sqrt(2)")


@pytest.fixture(scope="session")
def root6():
    return parse_real("sqrt(6)")


@pytest.fixture(scope="session")
def rpm_minus_root2(root2):
    return rpm_converged(0, -root2, 15)


@pytest.fixture(scope="session")
def rpm_plus_root2(root2):
    return rpm_converged(0, root2, 15)


@pytest.fixture(scope="session")
def rpm_s1_root6(root6):
    return rpm_converged(1, root6, 15)


@pytest.fixture(scope="session")
def ritz_cache():
    cache = {}

    def get(s, alpha, levels=8):
        key = (str(s), str(alpha), levels)
        if key not in cache:
            cache[key] = ritz_converged(s, alpha, levels)
        return cache[key]

    return get
