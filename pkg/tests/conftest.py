import numpy as np
import pytest

from irsynth import Document
from irsynth.pipeline import Providers
from irsynth.providers import HashingEmbedder, SyntheticChat, TokenOverlapReranker


def make_corpus(n=200, seed=7, n_topics=10):
    """Topic-clustered random-word documents with ids doc-0..doc-{n-1}."""
    rng = np.random.default_rng(seed)
    topics = [[f"t{t}w{i}" for i in range(30)] for t in range(n_topics)]
    common = [f"c{i}" for i in range(50)]
    docs = []
    for i in range(n):
        words = list(rng.choice(topics[i % n_topics], 25)) + list(rng.choice(common, 15))
        rng.shuffle(words)
        docs.append(Document(f"doc-{i}", " ".join(words)))
    return docs


def mock_providers():
    return Providers(
        SyntheticChat(),
        HashingEmbedder(512),
        [TokenOverlapReranker(f"rr{j}", jitter=0.3) for j in range(3)],
    )


@pytest.fixture
def corpus200():
    return make_corpus(200)


@pytest.fixture
def providers():
    return mock_providers()


# -- acceptance reporting -------------------------------------------------------

_CRITERIA: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    n, title = m.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        ok = rep.passed and _CRITERIA.get(n, (title, True))[1]
        _CRITERIA[n] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok = _CRITERIA[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{n}] {title}")
