import pytest

from perfsum.indicators import NormalizedConfusion
from perfsum.summarizer import SourceRecord, SourceSet

V1 = NormalizedConfusion(0.5, 0.1, 0.2, 0.2)
V2 = NormalizedConfusion(0.7, 0.1, 0.05, 0.15)
V1_COUNTS = (50, 10, 20, 20)
V2_COUNTS = (70, 10, 5, 15)


def pytest_addoption(parser):
    parser.addoption(
        "--cdnet-counts",
        default=None,
        help="counts CSV with per-video CDNET 2014 tallies for the 36 unsupervised algorithms",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(ident, title): an acceptance criterion")
    config._acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        item.config._acceptance_results.append((marker.args[0], marker.args[1], status))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for ident, title, status in sorted(results, key=lambda r: int(r[0])):
        terminalreporter.write_line(f"[{status}] AC{ident}: {title}")


@pytest.fixture
def two_videos() -> SourceSet:
    return SourceSet([SourceRecord("v1", V1, "baseline", 100), SourceRecord("v2", V2, "baseline", 100)])


@pytest.fixture
def counts_csv(tmp_path):
    path = tmp_path / "counts.csv"
    path.write_text(
        "algorithm,category,video,tn,fp,fn,tp\n"
        "algoX,baseline,v1,50,10,20,20\n"
        "algoX,baseline,v2,70,10,5,15\n"
    )
    return path
