import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arithdyn.errors import DegenerateParameter
from arithdyn.family import HomogeneousMap, specialize
from arithdyn.plane import (
    BoundedAtDepth,
    Escaped,
    PotentialGrid,
    Window,
    boundary_band,
    dilate,
    discrete_laplacian,
    dynamical_potential_grid,
    escape_rate_hom,
    escape_rate_hom_partials,
    escape_rate_poly,
    escape_time_grid,
    grid_to_csv,
    julia_measure_grid,
    mandelbrot_member,
    mass_fraction,
    potential_grid,
    read_pgm,
    render_pgm,
    to_gray,
)
from arithdyn.ratfield import ProjPoint

finite_c = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def test_window_validation():
    with pytest.raises(ValueError):
        Window(1, 0, 0, 1)
    with pytest.raises(ValueError):
        Window(0, 1, 0, 1, width=1)
    w = Window.parse("-2,2,-1,1", 5)
    assert w.points().shape == (5, 5)
    assert w.points()[0, 0] == complex(-2, 1)
    assert w.dx == pytest.approx(1.0) and w.dy == pytest.approx(0.5)


def test_escape_rate_poly_examples():
    assert escape_rate_poly([0, 0, 1], 2).value == pytest.approx(math.log(2), abs=1e-12)
    r = escape_rate_poly([0, 0, 1], 0.5)
    assert r.value == 0 and r.bounded
    assert escape_rate_poly([-2, 0, 1], 3).value == pytest.approx(math.log((3 + math.sqrt(5)) / 2), abs=1e-12)


def test_escape_rate_poly_non_monic():
    # 2 z^2 is conjugate to z^2 by z -> 2z, so G(z) = log|2z|
    assert escape_rate_poly([0, 0, 2], 3).value == pytest.approx(math.log(6), abs=1e-12)


def test_escape_rate_hom_examples():
    F = HomogeneousMap([0, 0, 1], [1, 0, 0])
    assert escape_rate_hom(F, 2, 1) == math.log(2)
    with pytest.raises(ValueError):
        escape_rate_hom(F, 0, 0)
    with pytest.raises(DegenerateParameter):
        escape_rate_hom(HomogeneousMap([0, 1, 0], [0, 0, 1]), 1, 1)


@given(z=finite_c, c=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       lam=st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_hom_homogeneity_and_functional_equation(z, c, lam):
    F = HomogeneousMap([c, 0, 1], [1, 0, 0])
    g = escape_rate_hom(F, z, 1, depth=60)
    assert escape_rate_hom(F, lam * z, lam, depth=60) == pytest.approx(g + math.log(abs(lam)), abs=1e-9)
    u, v = F(z, 1)
    if u != 0 or v != 0:
        assert escape_rate_hom(F, u, v, depth=60) == pytest.approx(2 * g, abs=1e-9)


@given(z=finite_c, c=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_poly_and_hom_agree(z, c):
    p = escape_rate_poly([c, 0, 1], z, depth=400)
    h = escape_rate_hom(HomogeneousMap.from_polynomial([c, 0, 1]), z, 1, depth=60)
    if p.bounded:
        # bounded to depth 400: G is tiny, and G_hom = G_poly up to exponentially small terms
        assert h == pytest.approx(0, abs=1e-6)
    else:
        assert h == pytest.approx(p.value, abs=1e-9)


def test_hom_partials_decay_bulk():
    rng = np.random.default_rng(1)
    z = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    F = HomogeneousMap([0.3 - 0.2j, 0, 1], [1, 0, 0])
    P = escape_rate_hom_partials(F, z, np.ones_like(z), 20)
    diff = np.abs(np.diff(P, axis=0))
    C = diff[1] * 2**2 + 1e-300
    # |G_n - G_(n+1)| <= sup|log||F(u)||| / d^(n+1) with sup attained at worst near |z| = 1
    bound = math.log(1 + abs(0.3 - 0.2j))
    for n in range(20):
        assert np.all(diff[n] <= bound / 2 ** (n + 1) + 1e-15)


def test_mandelbrot_member_examples():
    assert isinstance(mandelbrot_member(0), BoundedAtDepth)
    assert mandelbrot_member(1) == Escaped(3)
    assert isinstance(mandelbrot_member(-1), BoundedAtDepth)


@given(t=st.complex_numbers(min_magnitude=2.0001, max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_outside_radius_two_escapes(t):
    assert isinstance(mandelbrot_member(t), Escaped)


def test_escape_time_grid_matches_member():
    w = Window(-2, 1, -1, 1, 31, 21)
    n = escape_time_grid(w, 100)
    for (i, j), t in np.ndenumerate(w.points()):
        m = mandelbrot_member(t, 100)
        assert n[i, j] == (m.n if isinstance(m, Escaped) else -1)


def test_potential_grid_quadratic(quad):
    w = Window(-2.5, 1.5, -1.5, 1.5, 81, 61)
    g = potential_grid(quad, ProjPoint.of(0), w, depth=200)
    n = escape_time_grid(w, 200)
    inside = n < 0
    # rounding in the orbit is amplified Hoelder-wise near boundary points such as t = i
    assert np.all(np.abs(g.values[inside]) < 1e-12)
    # G ~ 2^-n for escape time n; past ~40 steps it sinks below the rounding floor of the sum
    assert np.all(g.values[(n > 0) & (n <= 40)] > 0)
    assert np.all(g.values[~inside] > -1e-15)
    # g(t) = G_t(0) = G_t(t) / 2 for z^2 + t, against the scalar routine
    t = w.points()[5, 7]
    assert g.values[5, 7] == pytest.approx(escape_rate_poly([t, 0, 1], t).value / 2, abs=1e-9)


def test_potential_grid_jobs_identical(quad):
    w = Window(-2, 1, -1, 1, 40, 24)
    a = potential_grid(quad, ProjPoint.of(1), w, depth=100)
    b = potential_grid(quad, ProjPoint.of(1), w, depth=100, jobs=3)
    assert np.array_equal(a.values, b.values)


def test_degenerate_pixels_nan(lattes):
    w = Window(-1, 1, -1, 1, 5, 5)  # pixels t = 0 and t = 1 lie on the resultant locus
    g = potential_grid(lattes.map, ProjPoint.of(2), w, depth=20)
    assert np.isnan(g.values[2, 2]) and np.isnan(g.values[2, 4]) and g.degenerate.sum() == 2
    mg = discrete_laplacian(g)
    assert np.all(np.isfinite(mg.masses)) and np.all(mg.masses >= 0)


def test_laplacian_of_affine_grid_is_zero():
    w = Window(-1, 2, -3, 1, 40, 30)
    t = w.points()
    g = PotentialGrid(w, 0.7 * t.real - 1.3 * t.imag + 5)
    mg = discrete_laplacian(g)
    assert np.nanmax(np.abs(mg.raw)) < 1e-9
    assert mg.total_mass == pytest.approx(0, abs=1e-9)


def test_laplacian_of_quadratic_is_constant():
    w = Window(-1, 1, -1, 1, 21, 21)
    t = w.points()
    mg = discrete_laplacian(PotentialGrid(w, np.abs(t) ** 2))
    assert np.allclose(mg.raw[1:-1, 1:-1], 4.0)
    assert mg.total_mass == pytest.approx(4.0 * 19 * 19 * w.dx * w.dy)


def test_julia_measure_unit_circle():
    w = Window(-1.5, 1.5, -1.5, 1.5, 201, 201)
    mg = julia_measure_grid(HomogeneousMap([0, 0, 1], [1, 0, 0]), w, depth=60)
    r = np.abs(w.points())
    assert mass_fraction(mg, np.abs(r - 1) < 3 * w.dx) > 0.99


def test_julia_measure_chebyshev_segment():
    w = Window(-2.5, 2.5, -1.5, 1.5, 251, 151)
    mg = julia_measure_grid(HomogeneousMap([-2, 0, 1], [1, 0, 0]), w, depth=60)
    t = w.points()
    near = (np.abs(t.imag) < 3 * w.dy) & (np.abs(t.real) <= 2 + 3 * w.dx)
    assert mass_fraction(mg, near) > 0.99


def test_specialized_julia_grid(quad):
    w = Window(-2, 2, -2, 2, 64, 64)
    g = dynamical_potential_grid(specialize(quad, -1), w, depth=60)
    assert np.all(np.isfinite(g.values)) and np.all(g.values >= -1e-12)


def test_boundary_band_and_dilate():
    n = np.array([[-1, -1, 3], [-1, 5, 2], [4, 4, 4]])
    band = boundary_band(n)
    assert band[0, 1] and band[1, 1] and not band[2, 2]
    m = np.zeros((7, 7), bool)
    m[3, 3] = True
    assert dilate(m, 2).sum() == 25
    assert dilate(m, 0).sum() == 1


def test_to_gray_conventions():
    assert np.all(to_gray(np.full((3, 4), 7.0)) == 0)
    g = to_gray(np.array([[0.0, 1.0], [0.5, np.nan]]))
    assert g.tolist() == [[0, 255], [128, 0]]
    lg = to_gray(np.array([[0.0, 1e-3, -5.0, 1.0]]), "log")
    assert lg[0, 0] == 0 and lg[0, 2] == 0 and lg[0, 3] == 255
    assert lg[0, 1] == round(255 * math.log(2) / math.log(1001))
    with pytest.raises(ValueError):
        to_gray(np.zeros((2, 2)), "gamma")


def test_pgm_roundtrip(tmp_path):
    w = Window(0, 1, 0, 1, 6, 4)
    g = PotentialGrid(w, np.arange(24, dtype=float).reshape(4, 6))
    data = render_pgm(g, path=tmp_path / "g.pgm")
    assert data.startswith(b"P5\n6 4\n255\n")
    img = read_pgm(tmp_path / "g.pgm")
    assert img.shape == (4, 6) and img[0, 0] == 0 and img[3, 5] == 255
    assert render_pgm(g) == data
    grid_to_csv(g, tmp_path / "g.csv")
    back = np.loadtxt(tmp_path / "g.csv", delimiter=",")
    assert np.array_equal(back, g.values)


def test_render_deterministic(quad, tmp_path):
    w = Window(-2, 1, -1.5, 1.5, 48, 48)
    a = render_pgm(discrete_laplacian(potential_grid(quad, ProjPoint.of(0), w)), "log")
    b = render_pgm(discrete_laplacian(potential_grid(quad, ProjPoint.of(0), w, jobs=2)), "log")
    assert a == b
