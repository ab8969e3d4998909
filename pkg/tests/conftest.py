import pytest

# verdict lines collected by the acceptance suite, echoed after the run
VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    def record(label: str, ok: bool, detail: str) -> bool:
        VERDICTS.append(f"{label}: {'PASS' if ok else 'FAIL'} ({detail})")
        print(VERDICTS[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)
