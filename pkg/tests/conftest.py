import mpmath as mp
import pytest

from sicstark.pipeline import Run
from sicstark.reference import load_poly


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("zeta-cache")


def _run(d, P, cache_dir, strategy="search", g=None):
    run = Run(d, P, cache_dir)
    run.stark()
    run.recognize(strategy, g)
    run.build_fiducial()
    return run


@pytest.fixture(scope="session")
def run5(cache_dir):
    return _run(5, 50, cache_dir)


@pytest.fixture(scope="session")
def run5_bruteforce(cache_dir):
    return _run(5, 50, cache_dir, "bruteforce")


@pytest.fixture(scope="session")
def run5_known_g(cache_dir):
    return _run(5, 50, cache_dir, "known_g", load_poly("g5"))


@pytest.fixture(scope="session")
def run11(cache_dir):
    return _run(11, 60, cache_dir, "known_g", load_poly("g11"))


@pytest.fixture(scope="session")
def run17(cache_dir):
    return _run(17, 50, cache_dir)


@pytest.fixture(autouse=True)
def _reset_precision():
    dps = mp.mp.dps
    yield
    mp.mp.dps = dps


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(n, ok, detail):
        ACCEPTANCE[n] = (bool(ok), detail)
        print("criterion %d: %s  %s" % (n, "PASS" if ok else "FAIL", detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line("criterion %d: %s  %s" % (n, "PASS" if ok else "FAIL", detail))
