"""Escape rates, potentials and bifurcation measures in the complex plane.

All homogeneous escape rates use the sup norm on C^2.  Grids are stored with
row 0 at the top of the window (largest imaginary part) so they can be
written straight to an image.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .errors import DegenerateParameter
from .family import HomogeneousMap, ParamMap, eval_form
from .ratfield import Poly, ProjPoint

LOG_EPS = 1e-3


@dataclass(frozen=True)
class Window:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    width: int = 512
    height: int = 512

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("window bounds must satisfy re_min < re_max and im_min < im_max")
        if self.width < 2 or self.height < 2:
            raise ValueError("window needs at least 2 pixels in each direction")

    @classmethod
    def parse(cls, spec: str, width: int = 512, height: int | None = None) -> "Window":
        """From ``"re_min,re_max,im_min,im_max"``."""
        parts = [float(x) for x in spec.split(",")]
        if len(parts) != 4:
            raise ValueError(f"window spec needs four numbers, got {spec!r}")
        return cls(*parts, width=width, height=width if height is None else height)

    @property
    def dx(self) -> float:
        return (self.re_max - self.re_min) / (self.width - 1)

    @property
    def dy(self) -> float:
        return (self.im_max - self.im_min) / (self.height - 1)

    def points(self) -> np.ndarray:
        re = np.linspace(self.re_min, self.re_max, self.width)
        im = np.linspace(self.im_max, self.im_min, self.height)
        return re[None, :] + 1j * im[:, None]

    def to_json(self) -> dict:
        return self.__dict__.copy()


@dataclass
class PotentialGrid:
    """Sampled potential; NaN marks degenerate-parameter pixels."""

    window: Window
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> np.ndarray:
        return np.isnan(self.values)


@dataclass
class MeasureGrid:
    """Discrete Laplacian of a potential.

    ``raw`` keeps the signed stencil values (NaN on the border and next to
    degenerate pixels); ``masses`` is the same density clamped at zero with
    NaN replaced by zero.  ``total_mass`` is ``sum(masses) * dx * dy``.
    """

    window: Window
    raw: np.ndarray
    masses: np.ndarray
    total_mass: float
    meta: dict = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.masses


# ---------------------------------------------------------------------------
# escape rates


class EscapeRate(NamedTuple):
    value: float
    bounded: bool
    steps: int


def escape_radius(coeffs: Sequence[complex]) -> float:
    """Radius beyond which ``|f(z)| > |z|`` strictly, for ``f = sum coeffs[j] z^j``."""
    lead = abs(coeffs[-1])
    return max(1.0, (sum(abs(c) for c in coeffs[:-1]) + 1.0) / lead)


def escape_rate_poly(
    coeffs: Sequence[complex], z: complex, depth: int = 200, radius: float | None = None
) -> EscapeRate:
    """Escape rate ``lim d^-n log+ |f^n(z)|`` of the polynomial ``sum coeffs[j] z^j``.

    After the orbit leaves the disk of ``radius`` it is iterated further until
    ``|z|`` is large, and the leading-coefficient correction
    ``log|a_d| / (d - 1)`` is applied.  Orbits still inside after ``depth``
    steps give 0 with ``bounded=True``.
    """
    coeffs = [complex(c) for c in coeffs]
    d = len(coeffs) - 1
    if d < 2:
        raise ValueError("escape rate needs degree >= 2")
    R = escape_radius(coeffs) if radius is None else radius
    corr = math.log(abs(coeffs[-1])) / (d - 1)
    big = 10.0 ** (250.0 / d)
    z = complex(z)
    scale = 1.0

    def f(x):
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = acc * x + c
        return acc

    for n in range(depth + 1):
        if abs(z) > R:
            steps = n
            while abs(z) < big:
                z = f(z)
                scale /= d
                steps += 1
            return EscapeRate(scale * (math.log(abs(z)) + corr), False, steps)
        if n < depth:
            z = f(z)
            scale /= d
    return EscapeRate(0.0, True, depth)


def _hom_partials(c1, c2, z, w, depth: int, d: int, keep: bool = False):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    norm = np.maximum(np.abs(z), np.abs(w))
    G = np.log(norm)
    z = z / norm
    w = w / norm
    partials = [G.copy()] if keep else None
    scale = 1.0
    for _ in range(depth):
        scale /= d
        fz = eval_form(c1, z, w)
        fw = eval_form(c2, z, w)
        nrm = np.maximum(np.abs(fz), np.abs(fw))
        G = G + scale * np.log(nrm)
        z = fz / nrm
        w = fw / nrm
        if keep:
            partials.append(G.copy())
    return np.stack(partials) if keep else G


def _check_map(F: HomogeneousMap, tol: float):
    if abs(F.resultant()) < tol:
        raise DegenerateParameter("homogeneous map is degenerate (resultant ~ 0)")


def escape_rate_hom(F: HomogeneousMap, z, w, depth: int = 60, tol: float = 1e-12):
    """Homogeneous escape rate ``lim d^-n log ||F^n(z, w)||`` (sup norm).

    Computed as ``log||x|| + sum_k d^-k log||F(u_(k-1))||`` with every
    ``u_k`` renormalized to unit norm, so nothing overflows.  Accepts scalars
    or arrays for ``z`` and ``w``.
    """
    _check_map(F, tol)
    if np.any((np.asarray(z) == 0) & (np.asarray(w) == 0)):
        raise ValueError("(0, 0) has no escape rate")
    c1 = [complex(c) for c in F.c1]
    c2 = [complex(c) for c in F.c2]
    G = _hom_partials(c1, c2, z, w, depth, F.degree)
    return float(G) if G.ndim == 0 else G


def escape_rate_hom_partials(F: HomogeneousMap, z, w, depth: int, tol: float = 1e-12) -> np.ndarray:
    """Truncations ``G_0 .. G_depth`` stacked along axis 0."""
    _check_map(F, tol)
    c1 = [complex(c) for c in F.c1]
    c2 = [complex(c) for c in F.c2]
    return _hom_partials(c1, c2, z, w, depth, F.degree, keep=True)


# ---------------------------------------------------------------------------
# Mandelbrot set


@dataclass(frozen=True)
class Escaped:
    n: int


@dataclass(frozen=True)
class BoundedAtDepth:
    depth: int


def mandelbrot_member(t: complex, depth: int = 500):
    """``Escaped(n)`` at the first ``n`` with ``|f_t^n(0)| > 2``, else ``BoundedAtDepth``."""
    z = 0j
    t = complex(t)
    for n in range(1, depth + 1):
        z = z * z + t
        if abs(z) > 2.0:
            return Escaped(n)
    return BoundedAtDepth(depth)


def escape_time_grid(window: Window, depth: int = 200) -> np.ndarray:
    """First escape index of the critical orbit per pixel; -1 when bounded."""
    t = window.points()
    z = np.zeros_like(t)
    n = np.full(t.shape, -1, dtype=np.int64)
    active = np.ones(t.shape, dtype=bool)
    for k in range(1, depth + 1):
        z[active] = z[active] * z[active] + t[active]
        out = active & (np.abs(z) > 2.0)
        n[out] = k
        active &= ~out
        if not active.any():
            break
    return n


def distance_estimate_grid(window: Window, depth: int = 200, bailout: float = 1e10) -> np.ndarray:
    """Escape-time distance estimate ``|z_n| log|z_n| / |dz_n/dt|`` to M.

    Bounded pixels get 0.  The estimate is within a factor 4 of the true
    distance from ``t`` to the Mandelbrot set.
    """
    t = window.points()
    z = np.zeros_like(t)
    dz = np.zeros_like(t)
    active = np.ones(t.shape, dtype=bool)
    for _ in range(depth):
        za = z[active]
        dz[active] = 2 * za * dz[active] + 1
        z[active] = za * za + t[active]
        active &= np.abs(z) < bailout
        if not active.any():
            break
    de = np.zeros(t.shape)
    out = ~active
    r = np.abs(z[out])
    de[out] = r * np.log(r) / np.abs(dz[out])
    return de


def mandelbrot_boundary_band(window: Window, depth: int = 200, de_pixels: float = 1.0) -> np.ndarray:
    """Pixels on the escape-time boundary of M.

    A pixel is in the band when its bounded/escaped status differs from a
    neighbour, or when it escapes but its distance estimate is below
    ``de_pixels`` pixel widths (thin filaments that no pixel centre hits).
    """
    band = boundary_band(escape_time_grid(window, depth))
    de = distance_estimate_grid(window, depth)
    return band | ((de > 0) & (de < de_pixels * min(window.dx, window.dy)))


def boundary_band(escape_times: np.ndarray) -> np.ndarray:
    """Pixels whose bounded/escaped status differs from a 4-neighbour."""
    inside = escape_times < 0
    band = np.zeros_like(inside)
    band[:, 1:] |= inside[:, 1:] != inside[:, :-1]
    band[:, :-1] |= inside[:, 1:] != inside[:, :-1]
    band[1:, :] |= inside[1:, :] != inside[:-1, :]
    band[:-1, :] |= inside[1:, :] != inside[:-1, :]
    return band


def dilate(mask: np.ndarray, pixels: int) -> np.ndarray:
    if pixels <= 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=np.ones((3, 3), bool), iterations=pixels)


# ---------------------------------------------------------------------------
# potential and measure grids


def _potential_block(F: ParamMap, P: ProjPoint, t: np.ndarray, depth: int, tol: float) -> np.ndarray:
    def ev(poly: Poly):
        if poly.is_zero():
            return np.zeros_like(t)
        return np.polyval(poly.float_coeffs()[::-1], t)

    c1 = [ev(c) for c in F.f1]
    c2 = [ev(c) for c in F.f2]
    res = np.abs(ev(F.resultant))
    a = ev(P.a)
    b = ev(P.b)
    bad = (res < tol) | ((a == 0) & (b == 0))
    if bad.any():
        # iterate (z^d, w^d) on flagged pixels so they stay finite, then mask
        d = F.degree
        a = np.where(bad, 1.0, a)
        b = np.where(bad, 1.0, b)
        c1 = [np.where(bad, float(j == d), c) for j, c in enumerate(c1)]
        c2 = [np.where(bad, float(j == 0), c) for j, c in enumerate(c2)]
    with np.errstate(divide="ignore", invalid="ignore"):
        G = _hom_partials(c1, c2, a, b, depth, F.degree)
    G = np.asarray(G, dtype=float)
    G[bad] = np.nan
    return G


def potential_grid(
    F: ParamMap,
    P: ProjPoint,
    window: Window,
    depth: int = 200,
    tol: float = 1e-12,
    jobs: int = 1,
) -> PotentialGrid:
    """``g(t) = G_{F_t}(a(t), b(t))`` on each pixel of a parameter window.

    The lift of ``P`` is its reduced representative ``(a, b)``.  Pixels where
    ``|Res(t)| < tol`` are set to NaN.
    """
    t = window.points()
    if jobs <= 1:
        values = _potential_block(F, P, t, depth, tol)
    else:
        chunks = np.array_split(t, jobs, axis=0)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_potential_block, [F] * len(chunks), [P] * len(chunks), chunks,
                                  [depth] * len(chunks), [tol] * len(chunks)))
        values = np.vstack(parts)
    meta = {"family": F.name, "point": str(P), "depth": depth}
    return PotentialGrid(window, values, meta)


def dynamical_potential_grid(f: HomogeneousMap, window: Window, depth: int = 200) -> PotentialGrid:
    """``G_F(z, 1)`` over a dynamical-plane window."""
    z = window.points()
    G = escape_rate_hom(f, z, np.ones_like(z), depth)
    return PotentialGrid(window, np.asarray(G, dtype=float), {"map": repr(f), "depth": depth})


def discrete_laplacian(grid: PotentialGrid) -> MeasureGrid:
    """Five-point Laplacian on interior pixels, per unit area."""
    v = grid.values
    if v.shape[0] < 3 or v.shape[1] < 3:
        raise ValueError("Laplacian needs at least a 3x3 grid")
    dx, dy = grid.window.dx, grid.window.dy
    raw = np.full(v.shape, np.nan)
    c = v[1:-1, 1:-1]
    raw[1:-1, 1:-1] = (v[1:-1, 2:] - 2 * c + v[1:-1, :-2]) / dx**2 + (v[2:, 1:-1] - 2 * c + v[:-2, 1:-1]) / dy**2
    masses = np.where(np.isfinite(raw), np.maximum(raw, 0.0), 0.0)
    total = float(masses.sum() * dx * dy)
    return MeasureGrid(grid.window, raw, masses, total, dict(grid.meta))


def julia_measure_grid(f: HomogeneousMap, window: Window, depth: int = 200) -> MeasureGrid:
    """Laplacian in z of the dynamical escape rate of a fixed map."""
    return discrete_laplacian(dynamical_potential_grid(f, window, depth))


def mass_fraction(mg: MeasureGrid, mask: np.ndarray) -> float:
    total = mg.masses.sum()
    if total <= 0:
        return 0.0
    return float(mg.masses[mask].sum() / total)


# ---------------------------------------------------------------------------
# output


def to_gray(values: np.ndarray, mapping: str = "linear", eps: float = LOG_EPS) -> np.ndarray:
    """Map a real grid to 0..255.

    linear: ``round(255 (v - min) / (max - min))``; a constant grid maps to 0.
    log: ``round(255 log(1 + v/eps) / log(1 + max/eps))`` with negatives
    clamped to 0.  Non-finite pixels map to 0.
    """
    v = np.asarray(values, dtype=float)
    finite = np.isfinite(v)
    out = np.zeros(v.shape, dtype=np.uint8)
    if not finite.any():
        return out
    if mapping == "linear":
        lo, hi = v[finite].min(), v[finite].max()
        if hi > lo:
            out[finite] = np.round(255 * (v[finite] - lo) / (hi - lo)).astype(np.uint8)
    elif mapping == "log":
        x = np.maximum(v[finite], 0.0)
        hi = x.max()
        if hi > 0:
            out[finite] = np.round(255 * np.log1p(x / eps) / np.log1p(hi / eps)).astype(np.uint8)
    else:
        raise ValueError(f"unknown mapping {mapping!r}")
    return out


def render_pgm(grid, mapping: str = "linear", path=None, eps: float = LOG_EPS) -> bytes:
    """Binary PGM (P5, maxval 255) of a PotentialGrid or MeasureGrid."""
    gray = to_gray(grid.values, mapping, eps)
    h, w = gray.shape
    data = f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes()
    if path is not None:
        Path(path).write_bytes(data)
    return data


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("not an 8-bit binary PGM")
    w, h = (int(x) for x in dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w)


def grid_to_csv(grid, path) -> None:
    """Row-major CSV with full double precision."""
    np.savetxt(path, grid.values, delimiter=",", fmt="%.17g")
