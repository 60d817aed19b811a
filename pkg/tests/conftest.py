from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from resurgence.diffop import ThetaOperator
from resurgence.exactnum import LaurentPolynomial
from resurgence.models import build_Ek

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
small_rationals = st.fractions(min_value=-3, max_value=3, max_denominator=5)


@st.composite
def laurent_polys(draw, lo=-3, hi=3, max_terms=4):
    exps = draw(st.lists(st.integers(lo, hi), min_size=0, max_size=max_terms, unique=True))
    return LaurentPolynomial({e: draw(rationals) for e in exps})


@st.composite
def theta_ops(draw, max_order=3, lo=-2, hi=2):
    """Random nonzero exact operators."""
    n = draw(st.integers(0, max_order))
    terms = {}
    for i in range(n + 1):
        for e in draw(st.lists(st.integers(lo, hi), max_size=3, unique=True)):
            terms[(i, e)] = draw(st.fractions(min_value=-5, max_value=5, max_denominator=4))
    terms[(n, draw(st.integers(lo, hi)))] = draw(st.sampled_from([Fraction(1), Fraction(-2), Fraction(3, 2)]))
    return ThetaOperator.from_terms(terms)


@pytest.fixture(scope="session")
def e2_model():
    return build_Ek(2, 70)


@pytest.fixture(scope="session")
def euler_op():
    from resurgence.diffop import parse_operator

    return parse_operator("x*theta^2 + theta - 1")
