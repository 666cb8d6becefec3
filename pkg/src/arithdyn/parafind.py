"""Special parameters: orbit relations, their roots, and statistics on them.

Exact relation polynomials are built over Q[t]; their complex roots come from
Aberth-Ehrlich simultaneous iteration followed by Newton polishing in
extended precision (mpmath).  Residual certificates are evaluated at the
polished roots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import mpmath
import numpy as np

from .errors import EmptyInput, IdenticallyZero, NonConvergence, PreperiodicInput
from .family import ParamMap, Preperiodic, apply, detect_preperiodic, resultant_locus
from .plane import MeasureGrid, Window
from .ratfield import Poly, ProjPoint, T, poly_gcd


@dataclass
class RootSet:
    """Numerical roots of an exact polynomial, repeated by multiplicity."""

    polynomial: Poly
    roots: np.ndarray
    residuals: np.ndarray
    depth: tuple[int, int] | None = None
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.roots)

    def in_window(self, window: Window) -> np.ndarray:
        r = self.roots
        keep = (
            (r.real >= window.re_min) & (r.real <= window.re_max)
            & (r.imag >= window.im_min) & (r.imag <= window.im_max)
        )
        return r[keep]

    def header(self) -> dict:
        return {
            "polynomial": self.polynomial.primitive_part().to_json(),
            "degree": int(max(self.polynomial.degree, 0)),
            "depth": list(self.depth) if self.depth else None,
            "converged": self.converged,
            **self.meta,
        }

    def to_csv(self) -> str:
        lines = ["# " + json.dumps(self.header()), "re,im,residual"]
        for z, r in zip(self.roots, self.residuals):
            lines.append(f"{z.real:.17g},{z.imag:.17g},{r:.6e}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------


def critical_orbit_poly(n: int, m: int) -> Poly:
    """``f_t^n(0) - f_t^m(0)`` for ``f_t(z) = z^2 + t``."""
    if not n > m >= 0:
        raise ValueError("need n > m >= 0")
    orbit = [Poly()]
    for _ in range(n):
        orbit.append(orbit[-1] * orbit[-1] + T)
    return orbit[n] - orbit[m]


def squarefree_factors(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's decomposition: pairwise coprime squarefree factors with multiplicities."""
    p = p.primitive_part()
    out = []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exact_div(a)
    c = dp.exact_div(a)
    k = 1
    while not b.is_constant():
        d = c - b.derivative()
        g = poly_gcd(b, d) if d else b.monic()
        if not g.is_constant():
            out.append((g.primitive_part(), k))
        b = b.exact_div(g)
        c = d.exact_div(g) if d else Poly()
        k += 1
    return out


def _fujiwara_radius(c: np.ndarray) -> float:
    # c ascending, complex
    n = len(c) - 1
    lead = abs(c[-1])
    terms = [(abs(c[n - k]) / lead) ** (1.0 / k) for k in range(1, n)]
    terms.append((abs(c[0]) / (2 * lead)) ** (1.0 / n))
    return 2.0 * max(terms) if terms else 1.0


def _aberth(c: np.ndarray, tol: float, max_rounds: int, evaluate=None, radius=None):
    n = len(c) - 1
    c = c / c[-1]
    if n == 1 and evaluate is None:
        return np.array([-c[0]]), True
    if radius is None:
        radius = _fujiwara_radius(c)
    k = np.arange(n)
    # fixed perturbation keeps the start deterministic and off the symmetry axes
    z = radius * (1 + 0.01 * np.cos(3 * k)) * np.exp(1j * (2 * np.pi * k / n + 0.4))
    desc = c[::-1]
    ddesc = np.polyder(desc)
    absdesc = np.abs(desc)
    eye = np.eye(n, dtype=bool)
    done = np.zeros(n, dtype=bool)
    for _ in range(max_rounds):
        with np.errstate(divide="ignore", invalid="ignore"):
            if evaluate is None:
                p = np.polyval(desc, z)
                ratio = p / np.polyval(ddesc, z)
                # a root is done once |p(z)| is at the level of Horner rounding error
                small = np.abs(p) <= 8 * np.finfo(float).eps * np.polyval(absdesc, np.abs(z))
            else:
                ratio, small = evaluate(z)
            diff = z[:, None] - z[None, :]
            diff[eye] = 1.0
            inv = 1.0 / diff
            inv[eye] = 0.0
            step = ratio / (1.0 - ratio * inv.sum(axis=1))
        step = np.where(np.isfinite(step) & ~done, step, 0.0)
        z = z - step
        done |= small | (np.abs(step) <= tol * (1.0 + np.abs(z)))
        if done.all():
            return z, True
    return z, False


def _working_dps(p: Poly) -> int:
    bits = max(abs(c).bit_length() for c in p.prim)
    return 30 + int(bits * 0.30103) + int(max(p.degree, 1) * 0.7)


def roots_numeric(
    p: Poly,
    tol: float = 1e-12,
    cert_tol: float = 1e-10,
    max_rounds: int = 1000,
    evaluator=None,
) -> RootSet:
    """All complex roots of ``p`` with residual certificates.

    ``p`` is split into squarefree factors first, so each root is computed
    once and repeated by its multiplicity.  Residuals are ``|p(root)|`` for
    the integer-primitive ``p``, evaluated at the polished extended-precision
    roots.

    ``evaluator`` is an optional ``StableEvaluator`` evaluating a
    squarefree ``p`` more stably than its expanded coefficients allow:
    ``fast(z)`` maps a complex array to ``(value / derivative, at_noise)``
    where ``at_noise`` flags values lost in rounding error, and
    ``exact(z)`` maps an mpmath number to ``(value, derivative)``.  Values
    may be any nonzero constant multiple of ``p``.  Its ``radius`` bounds
    the roots and seeds the starting circle.
    """
    if p.degree < 1:
        raise ValueError("roots_numeric needs a polynomial of degree >= 1")
    prim = p.primitive_part()
    dps = _working_dps(prim)
    roots: list[complex] = []
    residuals: list[float] = []
    ok = True
    factors = [(prim, 1)] if evaluator is not None else squarefree_factors(prim)
    with mpmath.workdps(dps):
        coeffs = [mpmath.mpf(c) for c in reversed(prim.prim)]
        for factor, mult in factors:
            fc = np.array([complex(float(c)) for c in factor.prim])
            if not np.all(np.isfinite(fc)):
                raise NonConvergence("coefficients overflow double precision")
            if evaluator is None:
                fdesc = [mpmath.mpf(c) for c in reversed(factor.prim)]
                approx, converged = _aberth(fc, tol, max_rounds)
                polished, refined = _polish_aberth(fdesc, approx, dps)
            else:
                approx, converged = _aberth(fc, tol, max_rounds, evaluator.fast, evaluator.radius)
                polished, refined = _polish_newton(evaluator.exact, approx, dps)
            ok &= converged and refined
            if len(polished) > 1:
                arr = np.array([complex(z) for z in polished])
                gaps = np.abs(arr[:, None] - arr[None, :]) + np.eye(len(arr))
                if gaps.min() < 1e-3 * tol:
                    ok = False
            for z in polished:
                r = float(abs(mpmath.polyval(coeffs, z)))
                ok &= r < cert_tol
                roots.extend([complex(z)] * mult)
                residuals.extend([r] * mult)
    rs = RootSet(prim, np.array(roots, dtype=complex), np.array(residuals), converged=ok)
    rs.meta.update({"tol": tol, "cert_tol": cert_tol})
    if not ok:
        raise NonConvergence("root iteration did not converge or failed certification", partial=rs)
    return rs


def _polish_newton(exact, approx, dps: int, max_rounds: int = 60):
    eps = mpmath.mpf(10) ** (-(dps // 2))
    out = []
    ok = True
    for z0 in approx:
        z = mpmath.mpc(complex(z0))
        for _ in range(max_rounds):
            v, dv = exact(z)
            if v == 0:
                break
            step = v / dv
            z -= step
            if abs(step) <= eps * (1 + abs(z)):
                break
        else:
            ok = False
        out.append(z)
    return out, ok


def _polish_aberth(desc, approx, dps: int, max_rounds: int = 200):
    """Aberth steps in extended precision, starting from double approximations."""
    zs = [mpmath.mpc(complex(z)) for z in approx]
    eps = mpmath.mpf(10) ** (-(dps // 2))
    n = len(zs)
    live = list(range(n))
    for _ in range(max_rounds):
        new = list(zs)
        still = []
        for i in live:
            z = zs[i]
            v, dv = mpmath.polyval(desc, z, derivative=True)
            if v == 0:
                continue
            ratio = v / dv if dv != 0 else mpmath.mpc(eps)
            s = mpmath.fsum(1 / (z - zs[j]) for j in range(n) if j != i) if n > 1 else 0
            step = ratio / (1 - ratio * s)
            new[i] = z - step
            if abs(step) > eps * (1 + abs(z)):
                still.append(i)
        zs = new
        live = still
        if not live:
            return zs, True
    return zs, False


class StableEvaluator(NamedTuple):
    fast: Callable
    exact: Callable
    radius: float


def _critical_orbit_evaluator(n: int) -> StableEvaluator:
    """Stable evaluation of ``f_t^n(0)`` and its t-derivative by recursion."""

    def fast(t):
        z = np.zeros_like(t)
        dz = np.zeros_like(t)
        mag = np.zeros(t.shape)
        at = np.abs(t)
        ratio = np.zeros_like(t)
        live = np.ones(t.shape, dtype=bool)
        for k in range(n):
            # z -> z^2 + t, dz -> 2 z dz + 1; mag bounds the rounding error
            dz = np.where(live, 2 * z * dz + 1, dz)
            mag = np.where(live, 2 * np.abs(z) * mag + np.abs(z) ** 2 + at, mag)
            z = np.where(live, z * z + t, z)
            # far out z^2 dominates and z / dz halves with each further step
            out = live & (np.abs(z) > 1e60)
            ratio[out] = z[out] / dz[out] * 0.5 ** (n - 1 - k)
            live &= ~out
        ratio[live] = z[live] / dz[live]
        small = live & (np.abs(z) <= 8 * n * np.finfo(float).eps * mag)
        return ratio, small

    def exact(t):
        z = mpmath.mpc(0)
        dz = mpmath.mpc(0)
        for _ in range(n):
            dz = 2 * z * dz + 1
            z = z * z + t
        return z, dz

    # every center lies in the Mandelbrot set, inside |t| <= 2
    return StableEvaluator(fast, exact, 2.0)


def pcf_centers(n: int, tol: float = 1e-12) -> RootSet:
    """Parameters where 0 is periodic of period dividing ``n`` for ``z^2 + t``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rs = roots_numeric(critical_orbit_poly(n, 0), tol, evaluator=_critical_orbit_evaluator(n))
    rs.depth = (n, 0)
    return rs


# ---------------------------------------------------------------------------


def _orbit(F: ParamMap, P: ProjPoint, n: int) -> list[ProjPoint]:
    pts = [P]
    for _ in range(n):
        pts.append(apply(F, pts[-1]))
    return pts


def _strip_degenerate(r: Poly, res: Poly) -> Poly:
    if res.is_constant():
        return r.primitive_part()
    while True:
        g = poly_gcd(r, res)
        if g.is_constant():
            return r.primitive_part()
        r = r.exact_div(g)


def relation_poly(F: ParamMap, P: ProjPoint, n: int, m: int, orbit=None) -> Poly:
    """Numerator of ``x_n = x_m`` with resultant-locus factors removed."""
    if not n > m >= 0:
        raise ValueError("need n > m >= 0")
    pts = orbit if orbit is not None else _orbit(F, P, n)
    xn, xm = pts[n], pts[m]
    r = xn.a * xm.b - xm.a * xn.b
    if r.is_zero():
        raise IdenticallyZero(f"x_{n} = x_{m} holds identically: the point is preperiodic")
    return _strip_degenerate(r, resultant_locus(F))


def preperiodic_params(F: ParamMap, P: ProjPoint, n: int, m: int, tol: float = 1e-12) -> RootSet:
    """Roots of the relation ``f_t^n(P(t)) = f_t^m(P(t))``: a sample of S_{f,P}."""
    r = relation_poly(F, P, n, m)
    if r.is_constant():
        rs = RootSet(r, np.array([], dtype=complex), np.array([]), depth=(n, m))
    else:
        rs = roots_numeric(r, tol)
        rs.depth = (n, m)
    return rs


# ---------------------------------------------------------------------------


def _cell_index(x: np.ndarray, lo: float, hi: float, cells: int) -> np.ndarray:
    k = np.floor((x - lo) / (hi - lo) * cells).astype(int)
    return np.clip(k, 0, cells - 1)


def equidist_discrepancy(rs, mg: MeasureGrid, cells: int = 16) -> float:
    """Half the L1 distance between the empirical root measure and ``mg``.

    Both are coarsened to ``cells x cells`` boxes of ``mg.window``; roots
    outside the window are dropped.  Returns a number in [0, 1].
    """
    win = mg.window
    roots = rs.in_window(win) if isinstance(rs, RootSet) else np.asarray(rs, dtype=complex)
    roots = roots[
        (roots.real >= win.re_min) & (roots.real <= win.re_max)
        & (roots.imag >= win.im_min) & (roots.imag <= win.im_max)
    ]
    total = mg.masses.sum()
    if len(roots) == 0 or not total > 0:
        raise EmptyInput("need at least one root in the window and positive mass")
    emp = np.zeros((cells, cells))
    np.add.at(
        emp,
        (_cell_index(roots.imag, win.im_min, win.im_max, cells), _cell_index(roots.real, win.re_min, win.re_max, cells)),
        1.0,
    )
    emp /= emp.sum()
    pts = win.points()
    mass = np.zeros((cells, cells))
    np.add.at(
        mass,
        (_cell_index(pts.imag, win.im_min, win.im_max, cells), _cell_index(pts.real, win.re_min, win.re_max, cells)),
        mg.masses,
    )
    mass /= mass.sum()
    return float(0.5 * np.abs(emp - mass).sum())


# ---------------------------------------------------------------------------


@dataclass
class ProbeReport:
    max_depth: int
    pairs: list[dict] = field(default_factory=list)
    near_coincidences: list[dict] = field(default_factory=list)

    @property
    def certified(self) -> list[dict]:
        return [p for p in self.pairs if p["gcd_degree"] > 0]

    def to_json(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "pairs": self.pairs,
            "certified_common": len(self.certified),
            "near_coincidences": self.near_coincidences,
        }


def _depths(max_depth: int):
    return [(n, m) for n in range(1, max_depth + 1) for m in range(n)]


def intersection_probe(
    F: ParamMap, P: ProjPoint, Q: ProjPoint, max_depth: int = 2, tol: float = 1e-8
) -> ProbeReport:
    """Look for common parameters of S_{f,P} and S_{f,Q} up to ``max_depth``.

    Exact: the gcd of every pair of relation polynomials (a nonconstant gcd
    certifies common parameters).  Advisory: numerical roots of the two
    polynomials closer than ``tol`` whose exact gcd is constant.
    """
    rels = {}
    for label, X in (("P", P), ("Q", Q)):
        if isinstance(detect_preperiodic(F, X, max_iter=max_depth + 1, degree_bound=10**9), Preperiodic):
            raise PreperiodicInput(f"{label} = {X} is preperiodic")
        orbit = _orbit(F, X, max_depth)
        try:
            rels[label] = {nm: relation_poly(F, X, *nm, orbit=orbit) for nm in _depths(max_depth)}
        except IdenticallyZero as exc:
            raise PreperiodicInput(f"{label} = {X} is preperiodic") from exc
    roots = {
        label: {nm: (preperiodic_roots(r, tol)) for nm, r in rs.items()} for label, rs in rels.items()
    }
    report = ProbeReport(max_depth)
    for nm_p, rp in rels["P"].items():
        for nm_q, rq in rels["Q"].items():
            if rp.is_constant() or rq.is_constant():
                g = 0
            else:
                g = int(poly_gcd(rp, rq).degree)
            report.pairs.append(
                {"p_depth": list(nm_p), "q_depth": list(nm_q), "gcd_degree": g,
                 "p_degree": int(max(rp.degree, 0)), "q_degree": int(max(rq.degree, 0))}
            )
            if g == 0:
                a, b = roots["P"][nm_p], roots["Q"][nm_q]
                if len(a) and len(b):
                    dist = np.abs(a[:, None] - b[None, :])
                    for i, j in zip(*np.nonzero(dist < tol)):
                        report.near_coincidences.append(
                            {"p_depth": list(nm_p), "q_depth": list(nm_q),
                             "t": [float(a[i].real), float(a[i].imag)], "distance": float(dist[i, j])}
                        )
    return report


def preperiodic_roots(r: Poly, tol: float) -> np.ndarray:
    if r.is_constant():
        return np.array([], dtype=complex)
    return roots_numeric(r, min(tol, 1e-12)).roots
