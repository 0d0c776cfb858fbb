from pathlib import Path

import pytest
from hypothesis import strategies as st

from moocpricing.budget_choice import MultiCourseUser
from moocpricing.market_core import Population

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "moocpricing" / "data"

cents = st.integers(min_value=0, max_value=50_000)


@st.composite
def populations(draw, max_size=30, max_cents=5_000):
    n = draw(st.integers(min_value=1, max_value=max_size))
    wtp = draw(st.lists(st.integers(0, max_cents), min_size=n, max_size=n))
    audit = draw(st.lists(st.integers(0, max_cents // 2), min_size=n, max_size=n))
    return Population.from_values([w / 100 for w in wtp], [a / 100 for a in audit])


@st.composite
def multi_course_users(draw, max_courses=8, max_cents=40_000):
    m = draw(st.integers(min_value=0, max_value=max_courses))
    wtp = draw(st.lists(st.integers(0, max_cents), min_size=m, max_size=m))
    audit = draw(st.lists(st.integers(0, max_cents // 4), min_size=m, max_size=m))
    budget = draw(st.integers(0, 3 * max_cents))
    k = draw(st.integers(0, m))
    return MultiCourseUser("u", tuple(w / 100 for w in wtp), tuple(a / 100 for a in audit), budget / 100, k)


@pytest.fixture
def three_users():
    """Net WTPs 10, 20, 30 with zero audit utility."""
    return Population.from_values([10, 20, 30])


@pytest.fixture
def welfare_users():
    return Population.from_values([300, 150, 80], [0, 100, 50])


@pytest.fixture
def data_dir():
    return DATA_DIR


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
