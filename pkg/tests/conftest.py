import numpy as np
import pytest
from hypothesis import strategies as st

from blaschke import catalog, make_blaschke

# Lines collected by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


EXAMPLE_PRODUCTS = {
    "R1": catalog.R1,
    "R2": catalog.R2,
    "R3": catalog.R3,
    "R4": catalog.R4,
    "P2": lambda: catalog.P(2),
}


@pytest.fixture(params=sorted(EXAMPLE_PRODUCTS))
def example_product(request):
    return request.param, EXAMPLE_PRODUCTS[request.param]()


def random_blaschke(rng, degree, radius=0.8):
    r = radius * np.sqrt(rng.random(degree))
    zeros = r * np.exp(2j * np.pi * rng.random(degree))
    return make_blaschke(np.exp(2j * np.pi * rng.random()), zeros)


def unit_circle(rng, k):
    return np.exp(2j * np.pi * rng.random(k))


def disk_points(rng, k, radius=0.999):
    return radius * np.sqrt(rng.random(k)) * np.exp(2j * np.pi * rng.random(k))


@st.composite
def blaschke_products(draw, min_degree=1, max_degree=5, radius=0.8):
    n = draw(st.integers(min_degree, max_degree))
    rs = draw(st.lists(st.floats(0.0, radius), min_size=n, max_size=n))
    ts = draw(st.lists(st.floats(0.0, 2 * np.pi), min_size=n, max_size=n))
    phi = draw(st.floats(0.0, 2 * np.pi))
    return make_blaschke(np.exp(1j * phi), [r * np.exp(1j * t) for r, t in zip(rs, ts)])


angles = st.floats(0.0, 2 * np.pi, allow_nan=False)
