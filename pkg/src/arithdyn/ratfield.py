"""Exact arithmetic over Q[t] and Q(t), and points of P^1(Q(t)).

A :class:`Poly` is stored as ``content * prim`` where ``prim`` is a primitive
integer polynomial with positive leading coefficient and ``content`` is a
nonzero :class:`fractions.Fraction`.  This representation is canonical, so two
polynomials are equal exactly when their stored parts are equal.

Rational numbers are plain :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

try:  # GMP multiplication is much faster than CPython's Karatsuba for huge operands
    from gmpy2 import mpz as _bigint
except ImportError:  # pragma: no cover
    _bigint = int

from .errors import DegreeMismatch, ParseError

__all__ = [
    "NEG_INF",
    "Poly",
    "RatFn",
    "ProjPoint",
    "T",
    "poly_gcd",
    "reduce_point",
    "point_degree",
    "weil_height",
    "poly_resultant",
    "sylvester_matrix",
    "determinant",
    "parse_rational",
    "format_rational",
    "parse_poly",
    "parse_point",
]

#: Degree of the zero polynomial.  Compares below every integer, so ``max``
#: over degrees does the right thing.
NEG_INF = float("-inf")

# Primes for the modular coprimality shortcut in ``poly_gcd``.
# below 2^31 so residue products fit in int64
_GCD_PRIMES = (2**31 - 1, 1_000_000_007, 998_244_353)


# ---------------------------------------------------------------------------
# integer polynomial kernels (tuples of ints, ascending powers, no trailing 0)


def _trim(cs: list[int]) -> list[int]:
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _iadd(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def _iscale(a: Sequence[int], k: int) -> list[int]:
    if k == 0:
        return []
    return [k * c for c in a]


def _imul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if not a or not b:
        return []
    if len(a) < len(b):
        a, b = b, a
    if len(b) > 32:
        return _kronecker_mul(a, b)
    out = [0] * (len(a) + len(b) - 1)
    for j, bj in enumerate(b):
        if bj:
            for i, ai in enumerate(a):
                out[i + j] += ai * bj
    return out


def _pack_nonneg(cs: Sequence[int], nbytes: int) -> int:
    return int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in cs), "little")


def _pack(cs: Sequence[int], nbytes: int) -> int:
    # byte-aligned slots keep packing linear in the output size
    pos = _pack_nonneg([c if c > 0 else 0 for c in cs], nbytes)
    neg = _pack_nonneg([-c if c < 0 else 0 for c in cs], nbytes)
    return pos - neg


def _unpack(v: int, nbytes: int, n: int) -> list[int]:
    # biasing every slot by half its range removes borrows between slots
    half = 1 << (8 * nbytes - 1)
    v += _pack_nonneg([half] * n, nbytes)
    raw = v.to_bytes(n * nbytes, "little")
    return [int.from_bytes(raw[i : i + nbytes], "little") - half for i in range(0, n * nbytes, nbytes)]


def _kronecker_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    # Signed Kronecker substitution: pack into one big integer, multiply once.
    bound = max(abs(c) for c in a) * max(abs(c) for c in b) * min(len(a), len(b))
    nbytes = (bound.bit_length() + 2 + 7) // 8
    prod = int(_bigint(_pack(a, nbytes)) * _bigint(_pack(b, nbytes)))
    return _trim(_unpack(prod, nbytes, len(a) + len(b) - 1))


def _icontent(a: Sequence[int]) -> int:
    return math.gcd(*a)


def _iprimitive(a: Sequence[int]) -> list[int]:
    g = _icontent(a)
    if a[-1] < 0:
        g = -g
    return [c // g for c in a]


def _iprem(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Pseudo-remainder lc(b)^(deg a - deg b + 1) * a mod b."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    steps = len(a) - len(b) + 1
    for _ in range(steps):
        if len(r) - 1 < db:
            break
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [c * lb for c in r]
        for i, bc in enumerate(b):
            r[i + shift] -= lr * bc
        _trim(r)
        steps -= 1
    if steps > 0 and r:
        k = lb**steps
        r = [c * k for c in r]
    return r


def _idivexact(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Quotient of integer polynomials when ``b`` divides ``a`` exactly over Z."""
    if not a:
        return []
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    q = [0] * (len(a) - db)
    for k in range(len(a) - db - 1, -1, -1):
        c, rem = divmod(r[k + db], lb)
        if rem:
            raise ArithmeticError("inexact polynomial division")
        q[k] = c
        if c:
            for i, bc in enumerate(b):
                r[i + k] -= c * bc
    if any(r[:db]):
        raise ArithmeticError("inexact polynomial division")
    return q


def _modp_gcd_degree(a: Sequence[int], b: Sequence[int], p: int) -> int:
    def reduce(cs):
        v = np.array([c % p for c in cs], dtype=np.int64)
        nz = np.flatnonzero(v)
        return v[: nz[-1] + 1] if nz.size else v[:0]

    x, y = reduce(a), reduce(b)
    while y.size:
        inv = pow(int(y[-1]), -1, p)
        dy = y.size - 1
        while x.size - 1 >= dy:
            f = int(x[-1]) * inv % p
            shift = x.size - 1 - dy
            x[shift:] = (x[shift:] - f * y) % p
            nz = np.flatnonzero(x)
            x = x[: nz[-1] + 1] if nz.size else x[:0]
        x, y = y, x
    return x.size - 1


def _subresultant_gcd(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Primitive gcd of two nonzero primitive integer polynomials."""
    if len(a) < len(b):
        a, b = b, a
    g = h = 1
    a, b = list(a), list(b)
    while True:
        delta = len(a) - len(b)
        r = _iprem(a, b)
        if not r:
            return _iprimitive(b)
        if len(r) == 1:
            return [1]
        den = g * h**delta
        a, b = b, [c // den for c in r]
        g = a[-1]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = g**delta // h ** (delta - 1)


def _iprim_gcd(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if len(a) == 1 or len(b) == 1:
        return [1]
    lc = a[-1] * b[-1]
    for p in _GCD_PRIMES:
        if lc % p:
            if _modp_gcd_degree(a, b, p) == 0:
                return [1]
            break
    return _subresultant_gcd(a, b)


# ---------------------------------------------------------------------------


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return parse_rational(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class Poly:
    """Immutable univariate polynomial in ``t`` with rational coefficients.

    ``Poly([1, 0, 3])`` is ``1 + 3 t^2``.  Coefficients may be ints,
    Fractions or rational strings like ``"-3/4"``.
    """

    __slots__ = ("content", "prim")

    content: Fraction
    prim: tuple[int, ...]

    def __init__(self, coeffs: Iterable = ()):
        cs = [_to_fraction(c) for c in coeffs]
        den = math.lcm(*(c.denominator for c in cs)) if cs else 1
        ints = _trim([int(c * den) for c in cs])
        self._set(ints, Fraction(1, den))

    def _set(self, ints: list[int], scale: Fraction) -> None:
        if not ints:
            object.__setattr__(self, "content", Fraction(0))
            object.__setattr__(self, "prim", ())
            return
        g = _icontent(ints)
        if ints[-1] < 0:
            g = -g
        object.__setattr__(self, "content", scale * g)
        object.__setattr__(self, "prim", tuple(c // g for c in ints))

    @classmethod
    def _raw(cls, content: Fraction, prim: tuple[int, ...]) -> "Poly":
        p = object.__new__(cls)
        object.__setattr__(p, "content", content)
        object.__setattr__(p, "prim", prim)
        return p

    @classmethod
    def _from_ints(cls, ints: list[int], scale: Fraction = Fraction(1)) -> "Poly":
        p = object.__new__(cls)
        p._set(_trim(ints), scale)
        return p

    @classmethod
    def constant(cls, c) -> "Poly":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1) -> "Poly":
        return cls([0] * k + [c])

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    def __reduce__(self):
        return (Poly._raw, (self.content, self.prim))

    # -- basic queries -----------------------------------------------------

    @property
    def degree(self):
        """Degree in t; ``NEG_INF`` for the zero polynomial."""
        return len(self.prim) - 1 if self.prim else NEG_INF

    def is_zero(self) -> bool:
        return not self.prim

    def is_constant(self) -> bool:
        return len(self.prim) <= 1

    @property
    def coeffs(self) -> list[Fraction]:
        return [self.content * c for c in self.prim]

    def __getitem__(self, k: int) -> Fraction:
        if 0 <= k < len(self.prim):
            return self.content * self.prim[k]
        return Fraction(0)

    @property
    def leading_coefficient(self) -> Fraction:
        return self.content * self.prim[-1] if self.prim else Fraction(0)

    def monic(self) -> "Poly":
        if not self.prim:
            raise ZeroDivisionError("zero polynomial has no monic associate")
        return Poly._raw(Fraction(1, self.prim[-1]), self.prim)

    def bit_size(self) -> int:
        if not self.prim:
            return 0
        c = self.content
        return max(abs(x).bit_length() for x in self.prim) + max(
            abs(c.numerator).bit_length(), c.denominator.bit_length()
        )

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.prim:
            return other
        if not other.prim:
            return self
        ca, cb = self.content, other.content
        den = math.lcm(ca.denominator, cb.denominator)
        ka = ca.numerator * (den // ca.denominator)
        kb = cb.numerator * (den // cb.denominator)
        return Poly._from_ints(_iadd(_iscale(self.prim, ka), _iscale(other.prim, kb)), Fraction(1, den))

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(-self.content, self.prim)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0 or not self.prim:
                return Poly()
            return Poly._raw(self.content * other, self.prim)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.prim or not other.prim:
            return Poly()
        # Gauss's lemma: the product of primitive polynomials is primitive.
        return Poly._raw(self.content * other.content, tuple(_imul(self.prim, other.prim)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = Poly([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not self.prim:
                return Poly()
            return Poly._raw(self.content / other, self.prim)
        return NotImplemented

    def exact_div(self, other: "Poly") -> "Poly":
        """Quotient ``self / other``; raises ArithmeticError unless exact."""
        if not other.prim:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.prim:
            return Poly()
        q = _idivexact(self.prim, other.prim)
        return Poly._raw(self.content / other.content, tuple(q))

    def __divmod__(self, other: "Poly"):
        other = self._coerce(other)
        if not other.prim:
            raise ZeroDivisionError("division by the zero polynomial")
        r = self.coeffs
        b = other.coeffs
        db = len(b) - 1
        if len(r) - 1 < db:
            return Poly(), self
        q = [Fraction(0)] * (len(r) - db)
        for k in range(len(r) - db - 1, -1, -1):
            c = r[k + db] / b[-1]
            q[k] = c
            if c:
                for i, bc in enumerate(b):
                    r[i + k] -= c * bc
        return Poly(q), Poly(r[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def derivative(self) -> "Poly":
        if len(self.prim) <= 1:
            return Poly()
        return Poly._from_ints([k * c for k, c in enumerate(self.prim)][1:], self.content)

    def primitive_part(self) -> "Poly":
        """Integer-primitive associate with positive leading coefficient."""
        return Poly._raw(Fraction(1), self.prim) if self.prim else Poly()

    def __call__(self, x):
        """Evaluate at ``x`` (exact for Fraction/int, floating for complex)."""
        if not self.prim:
            return 0 * x
        if isinstance(x, (int, Fraction)):
            acc = 0
            for c in reversed(self.prim):
                acc = acc * x + c
            return self.content * acc
        acc = 0
        for c in reversed(self.prim):
            acc = acc * x + float(c)
        return float(self.content) * acc

    def float_coeffs(self) -> list[float]:
        """Ascending float coefficients (for numerical evaluation)."""
        return [float(c) for c in self.coeffs]

    # -- identity ----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly([other])
        if not isinstance(other, Poly):
            return NotImplemented
        return self.content == other.content and self.prim == other.prim

    def __hash__(self):
        return hash((self.content, self.prim))

    def __bool__(self):
        return bool(self.prim)

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.prim:
            return "0"
        parts = []
        for k in range(len(self.prim) - 1, -1, -1):
            c = self[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if k == 0:
                body = format_rational(a, short=True)
            else:
                mon = "t" if k == 1 else f"t^{k}"
                body = mon if a == 1 else f"{format_rational(a, short=True)}*{mon}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> list[str]:
        """Ascending ``"p/q"`` strings; the zero polynomial is ``[]``."""
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "Poly":
        if not isinstance(data, (list, tuple)):
            raise ParseError("polynomial must be a JSON array of rational strings")
        return cls(parse_rational(str(c)) for c in data)


T = Poly([0, 1])


@dataclass(frozen=True)
class RatFn:
    """Element ``num/den`` of Q(t) with coprime parts and monic denominator."""

    num: Poly
    den: Poly

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(self.num, self.den) if self.num else self.den
        num = self.num.exact_div(g)
        den = self.den.exact_div(g)
        lc = den.leading_coefficient
        object.__setattr__(self, "num", num * (1 / lc))
        object.__setattr__(self, "den", den * (1 / lc))


@dataclass(frozen=True)
class ProjPoint:
    """A point ``(a : b)`` of P^1(Q(t)).

    Construct through :func:`reduce_point` (or :meth:`of`) to obtain the
    canonical representative: coprime, with ``b`` monic, or ``a`` monic when
    ``b = 0``.
    """

    a: Poly
    b: Poly

    @classmethod
    def of(cls, a, b=1) -> "ProjPoint":
        return reduce_point(_as_poly(a), _as_poly(b))

    @property
    def degree(self) -> int:
        return point_degree(self)

    def is_infinity(self) -> bool:
        return self.b.is_zero()

    def to_json(self) -> dict:
        return {"a": self.a.to_json(), "b": self.b.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "ProjPoint":
        return reduce_point(Poly.from_json(data["a"]), Poly.from_json(data["b"]))

    def __str__(self):
        return f"({self.a} : {self.b})"


def _as_poly(x) -> Poly:
    return x if isinstance(x, Poly) else Poly([x])


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd of ``a`` and ``b`` over Q.

    Primitive parts go through a subresultant remainder sequence over Z; a
    gcd computation modulo a large prime short-circuits the coprime case.
    """
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    g = _iprim_gcd(a.prim, b.prim)
    return Poly._raw(Fraction(1, g[-1]), tuple(g))


def reduce_point(a: Poly, b: Poly) -> ProjPoint:
    if a.is_zero() and b.is_zero():
        raise ValueError("(0 : 0) is not a point of P^1")
    g = poly_gcd(a, b)
    if not g.is_constant():
        a, b = a.exact_div(g), b.exact_div(g)
    lc = b.leading_coefficient if b else a.leading_coefficient
    return ProjPoint(a * (1 / lc), b * (1 / lc))


def point_degree(p: ProjPoint) -> int:
    """Degree of ``p`` as a map P^1 -> P^1; equal to its Weil height."""
    return int(max(p.a.degree, p.b.degree))


def weil_height(a: Poly, b: Poly) -> int:
    """Height of ``(a : b)`` as a sum over the places of Q(t).

    The finite places together contribute ``-deg gcd(a, b)`` and the place at
    infinity contributes ``max(deg a, deg b)``.  Representatives need not be
    coprime.
    """
    if a.is_zero() and b.is_zero():
        raise ValueError("(0 : 0) is not a point of P^1")
    finite = -poly_gcd(a, b).degree
    infinite = max(a.degree, b.degree)
    return int(infinite + finite)


# ---------------------------------------------------------------------------
# resultants of binary forms


def sylvester_matrix(p: Sequence[Poly], q: Sequence[Poly]) -> list[list[Poly]]:
    """Sylvester matrix of two binary forms of equal degree ``d``.

    ``p[j]`` is the coefficient of ``z^j w^(d-j)``.
    """
    if len(p) != len(q):
        raise DegreeMismatch(f"forms of degree {len(p) - 1} and {len(q) - 1}")
    d = len(p) - 1
    if d < 1:
        raise DegreeMismatch("forms must have degree >= 1")
    zero = Poly()
    rows = []
    for form in (p, q):
        top_down = list(reversed(form))
        for i in range(d):
            rows.append([zero] * i + top_down + [zero] * (d - 1 - i))
    return rows


def determinant(m: list[list[Poly]]) -> Poly:
    """Fraction-free (Bareiss) determinant over Q[t]."""
    m = [list(r) for r in m]
    n = len(m)
    sign = 1
    prev = Poly([1])
    for k in range(n - 1):
        if m[k][k].is_zero():
            for i in range(k + 1, n):
                if not m[i][k].is_zero():
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return Poly()
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - mik * row_k[j]).exact_div(prev)
        prev = pivot
    return m[n - 1][n - 1] * sign


def poly_resultant(p: Sequence[Poly], q: Sequence[Poly]) -> Poly:
    """Resultant in (z, w) of two binary forms with Q[t] coefficients."""
    return determinant(sylvester_matrix(p, q))


# ---------------------------------------------------------------------------
# text formats

_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(s: str) -> Fraction:
    m = _RAT_RE.match(s)
    if not m:
        raise ParseError(f"not an exact rational: {s!r}")
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(f"zero denominator in {s!r}")
    return Fraction(int(m.group(1)), den)


def format_rational(x: Fraction, short: bool = False) -> str:
    x = Fraction(x)
    if short and x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


_TERM_RE = re.compile(
    r"""\s*([+-])?\s*
        (?:(\d+(?:\s*/\s*\d+)?)\s*\*?\s*)?
        (t(?:\s*\^\s*(\d+))?)?\s*""",
    re.VERBOSE,
)


def parse_poly(s: str) -> Poly:
    """Parse text like ``"t^2 - 3/2*t + 1"`` or a JSON array of rationals."""
    text = s.strip()
    if text.startswith("["):
        import json

        try:
            return Poly.from_json(json.loads(text))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ParseError(f"bad polynomial array {s!r}") from exc
    if not text:
        raise ParseError("empty polynomial")
    pos = 0
    acc: dict[int, Fraction] = {}
    first = True
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot parse polynomial {s!r} at offset {pos}")
        sign, coef, mono, power = m.groups()
        if coef is None and mono is None:
            raise ParseError(f"cannot parse polynomial {s!r} at offset {pos}")
        if sign is None and not first:
            raise ParseError(f"missing operator in {s!r} at offset {pos}")
        c = parse_rational(coef.replace(" ", "")) if coef else Fraction(1)
        if sign == "-":
            c = -c
        k = 0 if mono is None else (int(power) if power else 1)
        acc[k] = acc.get(k, Fraction(0)) + c
        pos = m.end()
        first = False
    deg = max(acc)
    return Poly([acc.get(k, 0) for k in range(deg + 1)])


def parse_point(s: str) -> ProjPoint:
    """Parse a point spec: ``"2"``, ``"1/3"``, ``"t+1:1"``, ``"1:0"`` or ``"inf"``."""
    text = s.strip()
    if text.lower() in ("inf", "infinity", "oo"):
        return ProjPoint.of(1, 0)
    # a ':' that is not part of a JSON array separates the two coordinates
    if ":" in text:
        left, right = text.split(":", 1)
        return reduce_point(parse_poly(left), parse_poly(right))
    return reduce_point(parse_poly(text), Poly([1]))
