import numpy as np
import pytest

from crystalnorm import optimizer

# acceptance results collected by tests/test_acceptance.py: (criterion, check, ok, detail)
ACCEPTANCE: list[tuple[str, str, bool, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fresh_cache():
    optimizer._evaluate.cache_clear()
    yield
    optimizer._evaluate.cache_clear()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by_crit: dict[str, list[bool]] = {}
    for crit, check, ok, detail in ACCEPTANCE:
        by_crit.setdefault(crit, []).append(ok)
        tr.write_line(f"  {'PASS' if ok else 'FAIL'}  {crit}.{check}: {detail}")
    tr.write_line("")
    for crit in sorted(by_crit, key=lambda c: int(c.split("-")[1])):
        oks = by_crit[crit]
        status = "PASS" if all(oks) else "FAIL"
        tr.write_line(f"{status}  {crit} ({sum(oks)}/{len(oks)} checks)")
