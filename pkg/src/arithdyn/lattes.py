"""The degree-4 Lattes family of the Legendre curve ``y^2 = x(x-1)(x-t)``.

``f_t(x) = (x^2 - t)^2 / (4 x (x - 1)(x - t))`` is doubling on x-coordinates,
so a point of P^1(Q(t)) is preperiodic exactly when it is the x-coordinate of
a torsion point.  Over Q(t) those are the four 2-torsion x-coordinates
``0, 1, t, oo``; every other point has ``deg x_n = 4^(n-1) deg x_1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

from .family import (
    HeightPositive,
    ParamMap,
    Preperiodic,
    PreperiodicVerdict,
    apply,
    detect_preperiodic,
    make_map,
    orbit_degrees,
    verdict_to_json,
)
from .ratfield import Poly, ProjPoint, T

# (z^2 - t w^2)^2 and 4 z w (z - w)(z - t w), expanded; index j is the z-power
_F1 = [Poly([0, 0, 1]), Poly(), Poly([0, -2]), Poly(), Poly([1])]
_F2 = [Poly(), Poly([0, 4]), Poly([-4, -4]), Poly([4]), Poly()]

INFINITY = ProjPoint.of(1, 0)


@dataclass(frozen=True)
class LattesContext:
    map: ParamMap
    torsion_x: tuple[ProjPoint, ...]


def legendre_lattes() -> LattesContext:
    F = make_map(4, _F1, _F2, name="lattes")
    torsion = (ProjPoint.of(0), ProjPoint.of(1), ProjPoint.of(T), INFINITY)
    ctx = LattesContext(F, torsion)
    if not two_torsion_check(ctx):
        raise AssertionError("2-torsion x-coordinates must map to infinity")
    return ctx


def bundled_map_text(name: str = "lattes.json") -> str:
    return resources.files("arithdyn").joinpath("data", name).read_text()


def two_torsion_check(ctx: LattesContext) -> bool:
    return all(apply(ctx.map, x) == INFINITY for x in ctx.torsion_x)


def degree_growth_check(ctx: LattesContext, p: ProjPoint, n: int) -> bool:
    """True iff ``deg x_k = 4^(k-1) deg x_1`` for ``1 <= k <= n``."""
    if p in ctx.torsion_x:
        raise ValueError(f"{p} is a 2-torsion x-coordinate")
    if n < 1:
        raise ValueError("n must be >= 1")
    degs = orbit_degrees(ctx.map, p, n).degrees
    return all(degs[k] == 4 ** (k - 1) * degs[1] for k in range(1, n + 1))


@dataclass
class CensusReport:
    verdicts: list[tuple[ProjPoint, PreperiodicVerdict]] = field(default_factory=list)

    @property
    def preperiodic(self) -> list[ProjPoint]:
        return [p for p, v in self.verdicts if isinstance(v, Preperiodic)]

    @property
    def height_positive(self) -> list[ProjPoint]:
        return [p for p, v in self.verdicts if isinstance(v, HeightPositive)]

    @property
    def other(self) -> list[ProjPoint]:
        return [p for p, v in self.verdicts if not isinstance(v, (Preperiodic, HeightPositive))]

    def to_json(self) -> dict:
        return {
            "candidates": [
                {"point": p.to_json(), "label": str(p), **verdict_to_json(v)} for p, v in self.verdicts
            ],
            "preperiodic": [str(p) for p in self.preperiodic],
            "preperiodic_count": len(self.preperiodic),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def torsion_census(
    ctx: LattesContext,
    candidates: Iterable[ProjPoint],
    max_iter: int = 8,
    degree_bound: int | None = None,
) -> CensusReport:
    report = CensusReport()
    for p in candidates:
        report.verdicts.append((p, detect_preperiodic(ctx.map, p, max_iter, degree_bound)))
    return report


def default_candidates() -> list[ProjPoint]:
    from fractions import Fraction

    consts = [2, -2, 3, -3, Fraction(1, 2), -1]
    polys = [T + 1, 2 * T, T**2, 1 - T]
    return (
        [ProjPoint.of(0), ProjPoint.of(1), ProjPoint.of(T), INFINITY]
        + [ProjPoint.of(c) for c in consts]
        + [ProjPoint.of(p) for p in polys]
    )
