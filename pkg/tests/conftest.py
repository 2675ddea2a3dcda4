import numpy as np
from hypothesis import strategies as st

from fbiml.polymap import PolynomialMap


def exponents(n, max_degree):
    return st.lists(st.integers(0, max_degree), min_size=n, max_size=n).filter(lambda e: 0 < sum(e) <= max_degree)


@st.composite
def polymaps(draw, n=None, m=None, max_degree=4, max_terms=5):
    n = draw(st.integers(1, 2)) if n is None else n
    m = draw(st.integers(1, 2)) if m is None else m
    coef = st.floats(-2, 2, allow_nan=False).filter(lambda c: abs(c) > 1e-3)
    comps = [draw(st.lists(st.tuples(exponents(n, max_degree), coef), min_size=1, max_size=max_terms))
             for _ in range(m)]
    return PolynomialMap(n, comps)


def points(rng, count, n, radius=1.0):
    return rng.uniform(-radius, radius, size=(count, n))


def rng(seed=0):
    return np.random.default_rng(seed)


# -- acceptance reporting ----------------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
