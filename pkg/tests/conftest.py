from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def sample_dir(tmp_path_factory):
    from railcarbon.sample import write_sample_dataset

    d = tmp_path_factory.mktemp("sample")
    conf, data = write_sample_dataset(d)
    return d


@pytest.fixture(scope="session")
def sample_data():
    from railcarbon.sample import sample_config
    from railcarbon.simulate import generate_panel

    return generate_panel(sample_config())


@pytest.fixture(scope="session")
def sample_panel(sample_data):
    from railcarbon.panel import build_balanced_panel

    d = sample_data
    return build_balanced_panel(d.survey, d.factors, d.stations, d.config.run_config())


# -- acceptance summary ---------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    _, _, num, *slug = name.split("_")
    key = int(num)
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        prev = _CRITERIA.get(key, (None, "PASS"))[1]
        _CRITERIA[key] = (" ".join(slug), "FAIL" if failed or prev == "FAIL" else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        slug, status = _CRITERIA[key]
        terminalreporter.write_line(f"criterion {key:2d} {slug}: {status}")
