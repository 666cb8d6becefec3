import os
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from arithdyn.family import quadratic_family
from arithdyn.lattes import legendre_lattes
from arithdyn.plane import Window, discrete_laplacian, potential_grid
from arithdyn.ratfield import Poly, ProjPoint, reduce_point

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TS = sp.Symbol("t")
QUAD_WINDOW = Window(-2.5, 1.5, -1.5, 1.5, 512, 512)


def to_sympy(p: Poly):
    return sp.Poly([sp.Rational(c.numerator, c.denominator) for c in reversed(p.coeffs)] or [0], TS)


def from_sympy(e) -> Poly:
    cs = sp.Poly(e, TS).all_coeffs()[::-1]
    return Poly([Fraction(int(sp.fraction(c)[0]), int(sp.fraction(c)[1])) for c in cs])


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
small_ints = st.integers(-9, 9)


@st.composite
def polys(draw, max_degree=6, nonzero=False, coeffs=rationals):
    cs = draw(st.lists(coeffs, min_size=1, max_size=max_degree + 1))
    p = Poly(cs)
    if nonzero and p.is_zero():
        p = Poly([draw(st.integers(1, 9))])
    return p


@st.composite
def points(draw, max_degree=3):
    a = draw(polys(max_degree, coeffs=small_ints))
    b = draw(polys(max_degree, coeffs=small_ints))
    if a.is_zero() and b.is_zero():
        b = Poly([1])
    return reduce_point(a, b)


@pytest.fixture(scope="session")
def lattes():
    return legendre_lattes()


@pytest.fixture(scope="session")
def quad():
    return quadratic_family()


@pytest.fixture(scope="session")
def quad_potential(quad):
    return potential_grid(quad, ProjPoint.of(0), QUAD_WINDOW, depth=200)


@pytest.fixture(scope="session")
def quad_measure(quad_potential):
    return discrete_laplacian(quad_potential)


# -- acceptance report ---------------------------------------------------------

CRITERIA: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(k, title)`` then ``.note(text)``."""

    class Recorder:
        def __call__(self, k, title):
            self.k, self.title, self.detail = k, title, ""
            CRITERIA[k] = ("FAIL", title, "")
            return self

        def note(self, text):
            self.detail = text

    rec = Recorder()
    yield rec
    if hasattr(rec, "k"):
        failed = getattr(request.node, "rep_call", None) is None or request.node.rep_call.failed
        CRITERIA[rec.k] = ("FAIL" if failed else "PASS", rec.title, rec.detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        status, title, detail = CRITERIA[k]
        line = f"{status} criterion {k:2d}: {title}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
