import pytest

_ACCEPTANCE_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption(
        "--full",
        action="store_true",
        default=False,
        help="run acceptance checks at table-scale replication counts",
    )


@pytest.fixture(scope="session")
def mc_reps(request):
    """Replication-count policy: desk scale by default, 5000+ under --full."""
    if request.config.getoption("--full"):
        return lambda base: max(base, 5000)
    return lambda base: base


@pytest.fixture(scope="session")
def acceptance(request):
    """Collect one pass/fail line per acceptance criterion for the summary."""

    def record(line: str, ok: bool, detail: str = ""):
        suffix = f" ({detail})" if detail else ""
        _ACCEPTANCE_LINES.append(f"{line}: {'PASS' if ok else 'FAIL'}{suffix}")
        assert ok, f"{line}{suffix}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
