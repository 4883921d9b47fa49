"""Shared fixtures and the acceptance summary hook.

The hook prints one PASS/FAIL line per acceptance criterion at the end
of any pytest run that touched tests/test_acceptance.py, so the gate's
outcome is readable without digging through the node list.
"""

import pytest

from entrobound import Geometric, Poisson, Zeta

ACCEPTANCE_LABELS = {
    1: "moment certificates vs closed forms",
    2: "closed-form truncation index",
    3: "entropy intervals",
    4: "MGF envelope dominance",
    5: "bound validity by simulation sweep",
    6: "n=1 exact-law frequencies",
    7: "inversion round trips",
    8: "admissibility enforcement",
    9: "determinism of simulation output",
}


@pytest.fixture(scope="session")
def geom_half():
    return Geometric(0.5)


@pytest.fixture(scope="session")
def poisson_one():
    return Poisson(1.0)


@pytest.fixture(scope="session")
def zeta_two():
    return Zeta(2.0)


def _criterion_of(nodeid: str) -> int | None:
    if "test_acceptance.py" not in nodeid:
        return None
    name = nodeid.rsplit("::", 1)[-1]
    for number in ACCEPTANCE_LABELS:
        if name.startswith(f"test_criterion_{number:02d}"):
            return number
    return None


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[int, str] = {}
    for status, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            number = _criterion_of(getattr(report, "nodeid", ""))
            if number is None:
                continue
            # a FAIL in any phase overrides a PASS from another phase
            if outcomes.get(number) != "FAIL":
                outcomes[number] = verdict
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(ACCEPTANCE_LABELS):
        if number in outcomes:
            label = ACCEPTANCE_LABELS[number]
            terminalreporter.write_line(
                f"criterion {number} ({label}): {outcomes[number]}"
            )
