import pytest

from specbox.precision import make_context

# criterion id -> (passed, detail); printed in the terminal summary
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def ctx40():
    return make_context(40)


@pytest.fixture(scope="session")
def ctx30():
    return make_context(30)


@pytest.fixture(scope="session")
def ctx120():
    return make_context(120)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    grouped: dict = {}
    for cid in sorted(ACCEPTANCE, key=lambda c: (int(c.split(".")[0][1:]), c)):
        grouped.setdefault(cid.split(".")[0], []).append(cid)
    for crit, parts in grouped.items():
        ok = all(ACCEPTANCE[c][0] for c in parts)
        detail = "; ".join(
            (f"{c}: " if len(parts) > 1 else "") + ACCEPTANCE[c][1] for c in parts
        )
        terminalreporter.write_line(f"{crit:4s} {'PASS' if ok else 'FAIL'}  {detail}")
