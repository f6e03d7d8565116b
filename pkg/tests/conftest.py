import os

import pytest

from threewell import eig
from threewell.qham import ModelParams

CHAOTIC = ModelParams(0.7, 1.0, 1.5, 100)

# lines appended by the acceptance module, echoed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """Shared spectrum cache; THREEWELL_CACHE reuses one across sessions."""
    env = os.environ.get("THREEWELL_CACHE")
    return env if env else str(tmp_path_factory.mktemp("spectra"))


@pytest.fixture(scope="session")
def chaotic_spectrum(cache_dir):
    return eig.get_spectrum(CHAOTIC, cache_dir)[0]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
