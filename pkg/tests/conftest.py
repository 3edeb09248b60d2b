import sys

import pytest

import fixture_builder


@pytest.fixture(scope="session")
def ref_fixtures(tmp_path_factory):
    """Replay directory plus corpora recorded from the reference transcripts."""
    return fixture_builder.build(tmp_path_factory.mktemp("transcripts"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "_results", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
