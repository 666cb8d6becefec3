"""One-parameter families of rational maps over Q(t).

A family is a pair of binary forms ``(f1, f2)`` of degree ``d`` in ``(z, w)``
whose coefficients are polynomials in ``t``.  Points of P^1(Q(t)) are iterated
exactly; the degree of an iterate is its Weil height, so degree growth gives
the canonical height.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import (
    DegenerateFamily,
    DegenerateParameter,
    DegreeMismatch,
    DegreeOverflow,
    ParseError,
)
from .ratfield import (
    Poly,
    ProjPoint,
    format_rational,
    parse_rational,
    point_degree,
    poly_resultant,
    reduce_point,
)

DEFAULT_DEGREE_CEILING = 4096
# bit-size guard on coefficients, for orbits whose degrees stay bounded
DEFAULT_BIT_CEILING = 1 << 20


@dataclass(frozen=True)
class ParamMap:
    """The family ``f_t = (f1 : f2)``; ``f1[j]`` multiplies ``z^j w^(d-j)``."""

    degree: int
    f1: tuple[Poly, ...]
    f2: tuple[Poly, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        d = self.degree
        if d < 1:
            raise DegreeMismatch("degree must be >= 1")
        if len(self.f1) != d + 1 or len(self.f2) != d + 1:
            raise DegreeMismatch(f"forms must have {d + 1} coefficients each")
        object.__setattr__(self, "f1", tuple(self.f1))
        object.__setattr__(self, "f2", tuple(self.f2))
        if self.resultant.is_zero():
            raise DegenerateFamily("f1 and f2 share a common factor over Q(t)")

    @cached_property
    def resultant(self) -> Poly:
        return poly_resultant(self.f1, self.f2)

    @property
    def coeff_height(self) -> int:
        return int(max(max(c.degree for c in self.f1), max(c.degree for c in self.f2)))

    def is_constant(self) -> bool:
        return self.coeff_height == 0

    def to_json(self) -> dict:
        def terms(form):
            return [
                [i, j, format_rational(c)]
                for j, poly in enumerate(form)
                for i, c in enumerate(poly.coeffs)
                if c != 0
            ]

        return {"degree": self.degree, "f1": terms(self.f1), "f2": terms(self.f2)}

    def dumps(self) -> str:
        doc = self.to_json()
        lines = [f'{{"degree": {doc["degree"]},']
        for key in ("f1", "f2"):
            terms = ",\n  ".join(json.dumps(term) for term in doc[key])
            lines.append(f' "{key}": [\n  {terms}\n ]' + ("," if key == "f1" else ""))
        return "\n".join(lines) + "\n}"


@dataclass(frozen=True)
class OrbitRecord:
    points: tuple[ProjPoint, ...]
    degrees: tuple[int, ...]

    def to_json(self) -> dict:
        return {"degrees": list(self.degrees), "points": [p.to_json() for p in self.points]}


# -- verdicts ---------------------------------------------------------------


@dataclass(frozen=True)
class Preperiodic:
    tail: int
    period: int


@dataclass(frozen=True)
class HeightPositive:
    witness_index: int
    witness_degree: int
    degree_bound: int


@dataclass(frozen=True)
class HeightZeroNoCycle:
    """Degrees stayed at their initial value and no repetition occurred.

    ``certified_infinite`` is set when an escape certificate proved that the
    orbit never repeats at any depth, not only within ``iterations_checked``.
    """

    iterations_checked: int
    certified_infinite: bool = False


@dataclass(frozen=True)
class Inconclusive:
    iterations_checked: int
    reason: str = "max_iter reached"


PreperiodicVerdict = Union[Preperiodic, HeightPositive, HeightZeroNoCycle, Inconclusive]


def verdict_to_json(v: PreperiodicVerdict) -> dict:
    out = {"verdict": type(v).__name__}
    out.update(v.__dict__)
    return out


# -- parsing ----------------------------------------------------------------


def _coerce_forms(degree, f1, f2):
    def fill(form):
        if isinstance(form, dict):
            return [form.get(j, Poly()) for j in range(degree + 1)]
        out = [c if isinstance(c, Poly) else Poly([c]) for c in form]
        if len(out) != degree + 1:
            raise DegreeMismatch(f"form has {len(out)} coefficients, expected {degree + 1}")
        return out

    return fill(f1), fill(f2)


def make_map(degree: int, f1, f2, name: str = "") -> ParamMap:
    """Build a ParamMap from coefficient lists or ``{j: Poly}`` dicts."""
    a, b = _coerce_forms(degree, f1, f2)
    return ParamMap(degree, tuple(a), tuple(b), name)


def _parse_terms(terms, d: int, label: str) -> list[Poly]:
    if not isinstance(terms, list):
        raise ParseError(f"{label} must be a list of terms")
    acc: dict[tuple[int, int], Fraction] = {}
    for term in terms:
        if not isinstance(term, list) or len(term) not in (3, 4):
            raise ParseError(f"bad term {term!r} in {label}")
        *exps, coef = term
        if not all(isinstance(e, int) and not isinstance(e, bool) for e in exps):
            raise ParseError(f"exponents must be integers in {term!r}")
        i, j = exps[0], exps[1]
        if i < 0 or j < 0:
            raise ParseError(f"negative exponent in {term!r}")
        if len(exps) == 3 and j + exps[2] != d:
            raise DegreeMismatch(f"term {term!r} of {label} has total degree {j + exps[2]}, declared {d}")
        if j > d:
            raise DegreeMismatch(f"term {term!r} of {label} has z-degree {j} > {d}")
        acc[(i, j)] = acc.get((i, j), Fraction(0)) + parse_rational(str(coef))
    form = []
    for j in range(d + 1):
        top = max((i for (i, jj) in acc if jj == j), default=-1)
        form.append(Poly([acc.get((i, j), 0) for i in range(top + 1)]))
    return form


def parse_map(document: str, name: str = "") -> ParamMap:
    """Parse the JSON map-file format.

    ``{"degree": d, "f1": [[i, j, "p/q"], ...], "f2": [...]}`` where a term
    ``[i, j, c]`` is ``c t^i z^j w^(d-j)``.  A four-element term
    ``[i, j, k, c]`` states the w-exponent explicitly and must satisfy
    ``j + k = d``.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"map file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not {"degree", "f1", "f2"} <= doc.keys():
        raise ParseError('map file needs "degree", "f1" and "f2"')
    d = doc["degree"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError("degree must be a positive integer")
    f1 = _parse_terms(doc["f1"], d, "f1")
    f2 = _parse_terms(doc["f2"], d, "f2")
    return ParamMap(d, tuple(f1), tuple(f2), name or doc.get("name", ""))


def quadratic_family() -> ParamMap:
    """``z^2 + t`` as the pair ``(z^2 + t w^2, w^2)``."""
    return make_map(2, [Poly([0, 1]), 0, 1], [1, 0, 0], name="quadratic")


# -- exact dynamics ---------------------------------------------------------


def eval_form(form: Sequence, a, b):
    """Evaluate ``sum form[j] a^j b^(d-j)`` (homogeneous Horner).

    Works for Poly, Fraction, float/complex scalars and numpy arrays.
    """
    d = len(form) - 1
    acc = form[d]
    bpow = None
    for j in range(d - 1, -1, -1):
        bpow = b if bpow is None else bpow * b
        acc = acc * a + form[j] * bpow
    return acc


def apply(F: ParamMap, p: ProjPoint) -> ProjPoint:
    """One exact step ``p -> f(p)`` in P^1(Q(t)), reduced."""
    return reduce_point(eval_form(F.f1, p.a, p.b), eval_form(F.f2, p.a, p.b))


def _check_size(x: ProjPoint, degree_ceiling: int) -> int:
    deg = point_degree(x)
    if deg > degree_ceiling:
        raise DegreeOverflow(f"orbit degree {deg} exceeds ceiling {degree_ceiling}")
    return deg


def orbit_degrees(
    F: ParamMap, p: ProjPoint, n: int, degree_ceiling: int = DEFAULT_DEGREE_CEILING
) -> OrbitRecord:
    """The orbit ``x_0 .. x_n`` of ``p`` and the degree of each iterate."""
    if n < 0:
        raise ValueError("n must be >= 0")
    points = [p]
    degrees = [_check_size(p, degree_ceiling)]
    x = p
    for _ in range(n):
        x = apply(F, x)
        degrees.append(_check_size(x, degree_ceiling))
        points.append(x)
    return OrbitRecord(tuple(points), tuple(degrees))


def canonical_height_estimate(
    F: ParamMap, p: ProjPoint, n: int, degree_ceiling: int = DEFAULT_DEGREE_CEILING
) -> Fraction:
    """``deg f^n(p) / d^n``, exactly."""
    if F.degree < 2:
        raise ValueError("canonical height needs degree >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    rec = orbit_degrees(F, p, n, degree_ceiling)
    return Fraction(rec.degrees[n], F.degree**n)


def default_degree_bound(F: ParamMap, p: ProjPoint) -> int:
    """Heuristic stand-in for the (non-explicit) preperiodic degree bound."""
    return F.degree * (point_degree(p) + 1) + 4 * F.coeff_height


def detect_preperiodic(
    F: ParamMap,
    p: ProjPoint,
    max_iter: int = 20,
    degree_bound: int | None = None,
    degree_ceiling: int = DEFAULT_DEGREE_CEILING,
    bit_ceiling: int = DEFAULT_BIT_CEILING,
) -> PreperiodicVerdict:
    """Classify the orbit of ``p`` under ``F``.

    Only exact equality of iterates counts as a cycle.  A degree above
    ``degree_bound`` is reported as positive height; that is a proof only
    when the bound is a valid preperiodic height bound for ``F``, and the
    default is a heuristic.  If every degree stays at its
    initial value without repetition the result is ``HeightZeroNoCycle``,
    which flags a possibly isotrivial family rather than a preperiodic point.
    """
    if F.degree < 2:
        raise ValueError("preperiodicity detection needs degree >= 2")
    bound = default_degree_bound(F, p) if degree_bound is None else degree_bound
    constant_data = F.is_constant() and point_degree(p) == 0
    escape = _PolynomialEscape.for_map(F) if constant_data else None
    seen = {p: 0}
    d0 = point_degree(p)
    steady = True
    x = p
    if escape is not None and escape.certifies(x):
        return HeightZeroNoCycle(max_iter, certified_infinite=True)
    for n in range(1, max_iter + 1):
        x = apply(F, x)
        if x in seen:
            return Preperiodic(tail=seen[x], period=n - seen[x])
        deg = _check_size(x, degree_ceiling)
        if deg > bound:
            return HeightPositive(n, deg, bound)
        steady = steady and deg == d0
        if escape is not None and escape.certifies(x):
            return HeightZeroNoCycle(max_iter, certified_infinite=True)
        if max(x.a.bit_size(), x.b.bit_size()) > bit_ceiling:
            return Inconclusive(n, reason="coefficient size ceiling reached")
        seen[x] = n
    if steady:
        return HeightZeroNoCycle(max_iter)
    return Inconclusive(max_iter)


class _PolynomialEscape:
    """Escape certificates for a polynomial map with constant rational coefficients.

    If ``|x|_v`` exceeds the escape threshold at some place ``v`` of Q, the
    absolute values ``|f^n(x)|_v`` increase strictly forever, so the orbit can
    never repeat.
    """

    def __init__(self, coeffs: list[Fraction]):
        self.coeffs = coeffs  # ascending, for f(z) = sum coeffs[j] z^j
        self.d = len(coeffs) - 1
        lead = coeffs[-1]
        total = sum(abs(c) for c in coeffs[:-1])
        self.arch_radius = max(Fraction(1), (total + 1) / abs(lead))
        from sympy import factorint

        bad = set()
        for c in coeffs:
            if c:
                bad.update(factorint(c.numerator).keys())
                bad.update(factorint(c.denominator).keys())
        bad.discard(-1)
        self.bad_primes = sorted(bad)

    @classmethod
    def for_map(cls, F: ParamMap) -> "_PolynomialEscape | None":
        d = F.degree
        if any(F.f2[j] for j in range(1, d + 1)) or not F.f2[0] or not F.f1[d]:
            return None
        den = F.f2[0][0]
        return cls([F.f1[j][0] / den for j in range(d + 1)])

    @staticmethod
    def _val(x: int, p: int) -> int:
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v

    def _padic_escapes(self, x: Fraction, p: int) -> bool:
        # |x|_p = p^e with e = v_p(den) - v_p(num) > 0
        e = self._val(x.denominator, p) - (self._val(x.numerator, p) if x.numerator else 0)
        if e <= 0:
            return False

        def ord_(c: Fraction) -> int:  # -log_p |c|_p
            return self._val(c.numerator, p) - self._val(c.denominator, p)

        lead = ord_(self.coeffs[-1])
        # need |a_d| X^(d-1) > 1 and |a_d| X^d > |a_j| X^j for all j < d
        if (self.d - 1) * e - lead <= 0:
            return False
        for j, c in enumerate(self.coeffs[:-1]):
            if c and (self.d - j) * e - lead <= -ord_(c):
                return False
        return True

    def certifies(self, pt: ProjPoint) -> bool:
        if pt.is_infinity():
            return False
        x = pt.a[0]
        if abs(x) > self.arch_radius:
            return True
        den = x.denominator
        for p in self.bad_primes:
            while den % p == 0:
                den //= p
        if den > 1:  # a good prime with |x|_p > 1
            return True
        return any(self._padic_escapes(x, p) for p in self.bad_primes if x.denominator % p == 0)


def resultant_locus(F: ParamMap) -> Poly:
    """Resultant of the family; its roots are the parameters where f_t drops degree."""
    return F.resultant


def q_weil_height(x: Fraction) -> float:
    """Logarithmic Weil height ``log max(|num|, den)`` of a rational number."""
    x = Fraction(x)
    return math.log(max(abs(x.numerator), x.denominator))


# -- specialization ---------------------------------------------------------


class HomogeneousMap:
    """A degree-``d`` map ``(z, w) -> (F1(z, w), F2(z, w))`` with fixed coefficients.

    ``c1[j]`` multiplies ``z^j w^(d-j)``.  Coefficients are either complex
    numbers (numerical map) or Fractions (exact specialization).
    """

    def __init__(self, c1: Sequence, c2: Sequence):
        if len(c1) != len(c2) or len(c1) < 2:
            raise DegreeMismatch("both forms need the same degree >= 1")
        self.c1 = list(c1)
        self.c2 = list(c2)
        self.degree = len(c1) - 1

    @classmethod
    def from_polynomial(cls, coeffs: Sequence[complex]) -> "HomogeneousMap":
        """Lift ``sum coeffs[j] z^j`` to ``(sum coeffs[j] z^j w^(d-j), w^d)``."""
        d = len(coeffs) - 1
        return cls(list(coeffs), [1] + [0] * d)

    def __call__(self, z, w):
        return eval_form(self.c1, z, w), eval_form(self.c2, z, w)

    def resultant(self):
        if all(isinstance(c, (int, Fraction)) for c in self.c1 + self.c2):
            return poly_resultant([Poly([c]) for c in self.c1], [Poly([c]) for c in self.c2])[0]
        d = self.degree
        m = np.zeros((2 * d, 2 * d), dtype=complex)
        for i in range(d):
            m[i, i : i + d + 1] = self.c1[::-1]
            m[d + i, i : i + d + 1] = self.c2[::-1]
        return complex(np.linalg.det(m))

    def is_polynomial(self) -> bool:
        return all(c == 0 for c in self.c2[1:]) and self.c2[0] != 0

    def __repr__(self):
        return f"HomogeneousMap(c1={self.c1!r}, c2={self.c2!r})"


def specialize(F: ParamMap, t0, tol: float = 1e-12) -> HomogeneousMap:
    """The map ``f_{t0}``.

    A Fraction/int ``t0`` gives an exact map (degenerate iff the resultant
    vanishes exactly); a float/complex ``t0`` gives a numerical map that is
    rejected when ``|Res(t0)| < tol``.
    """
    exact = isinstance(t0, (int, Fraction))
    res = F.resultant(Fraction(t0) if exact else complex(t0))
    if (exact and res == 0) or (not exact and abs(res) < tol):
        raise DegenerateParameter(f"resultant {res} vanishes at t0 = {t0}")
    if exact:
        t0 = Fraction(t0)
        return HomogeneousMap([c(t0) for c in F.f1], [c(t0) for c in F.f2])
    t0 = complex(t0)
    return HomogeneousMap([complex(c(t0)) for c in F.f1], [complex(c(t0)) for c in F.f2])
