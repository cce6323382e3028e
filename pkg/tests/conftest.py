import os
from importlib import resources

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("ci", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

DATA = resources.files("thaitranslit.data")


@pytest.fixture(scope="session")
def toy_pairs_path():
    return str(DATA / "toy_pairs.tsv")


@pytest.fixture(scope="session")
def toy_labeled_path():
    return str(DATA / "toy_labeled.tsv")


@pytest.fixture(scope="session")
def toy_pairs(toy_pairs_path):
    from thaitranslit.core_data import read_pairs

    return [p for p, _ in read_pairs(toy_pairs_path)]


@pytest.fixture
def tsv(tmp_path):
    """Write a TSV from a header and rows, return its path."""

    def make(header, rows, name="data.tsv"):
        path = tmp_path / name
        lines = ["\t".join(header)] + ["\t".join(str(c) for c in r) for r in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)

    return make


def pytest_report_header(config):
    from thaitranslit import kernels

    return f"thaitranslit kernels: {kernels.BACKEND} (THAITRANSLIT_PURE={os.environ.get('THAITRANSLIT_PURE', '')})"


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
