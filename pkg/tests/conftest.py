import numpy as np
import pytest

from sinrsched.model import Link, PhysicalParams


def make_link(lid, src, dst):
    """Link whose node ids are derived from its own id (sender 2*id, receiver 2*id+1)."""
    return Link(lid, 2 * lid, 2 * lid + 1, src, dst)


def random_links(rng, n, side, r_min=1.0, r_max=5.0):
    """``n`` node-disjoint links with senders uniform in a square and lengths in [r_min, r_max]."""
    links = []
    for i in range(n):
        s = rng.uniform(0, side, 2)
        r = rng.uniform(r_min, r_max)
        a = rng.uniform(0, 2 * np.pi)
        links.append(make_link(i, tuple(s), (s[0] + r * np.cos(a), s[1] + r * np.sin(a))))
    return links


@pytest.fixture
def params():
    return PhysicalParams()


# acceptance PASS/FAIL lines, echoed in the terminal summary
RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
