import numpy as np
import pytest

ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def record_criterion():
    def record(key, label, passed, detail=""):
        ACCEPTANCE[key] = (label, passed, detail)

    return record


def pytest_runtest_makereport(item, call):
    # a criterion whose test raised before recording still gets a FAIL line
    key = getattr(item.function, "criterion", None)
    if key is not None and call.when == "call" and call.excinfo is not None:
        label = getattr(item.function, "criterion_label", key)
        ACCEPTANCE[key] = (label, False, str(call.excinfo.value).splitlines()[0][:120])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.lstrip("AC"))):
        label, passed, detail = ACCEPTANCE[key]
        line = f"{'PASS' if passed else 'FAIL'} {key} {label}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
