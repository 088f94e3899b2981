import pytest

from henkin.scheduler import GoalConfig, load_omit, run


# construction runs are deterministic; share them across test modules
_RUNS = {}


def cached_run(provider, **kw):
    key = (provider, tuple(sorted(kw.items(), key=lambda kv: kv[0])))
    if key not in _RUNS:
        omit = [load_omit(o) for o in kw.pop("omit", ())]
        _RUNS[key] = run(provider, GoalConfig(omit=omit, **kw))
    return _RUNS[key]


@pytest.fixture(scope="session")
def pure_log():
    return cached_run("pure-set", rounds=4)


@pytest.fixture(scope="session")
def graph_log():
    return cached_run("random-graph", rounds=4)


@pytest.fixture(scope="session")
def small_graph_log():
    return cached_run("random-graph", rounds=3)


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
