from importlib import resources

import pytest

from dtdshred import build_graph, load_document, map_schema, parse_dtd
from dtdshred.schema import Strategy

ACCEPTANCE_KEY = pytest.StashKey[list]()


def data_text(name):
    return resources.files("dtdshred").joinpath("data", name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def univ_dtd():
    return data_text("univ.dtd")


@pytest.fixture(scope="session")
def univ_xml():
    return data_text("univ.xml")


@pytest.fixture(scope="session")
def univ_graph(univ_dtd):
    decls, attlists = parse_dtd(univ_dtd)
    return build_graph(decls, attlists, "univ")


@pytest.fixture(scope="session")
def univ_schema(univ_graph):
    return map_schema(univ_graph, Strategy.DTDMAP)


@pytest.fixture(scope="session")
def univ_shared_schema(univ_graph):
    return map_schema(univ_graph, Strategy.SHARED)


@pytest.fixture
def univ_tree(univ_xml):
    return load_document(univ_xml)


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE_KEY]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE_KEY, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in results:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
