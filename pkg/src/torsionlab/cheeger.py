"""Cheeger constant of convex polygons and the small-p rigidity trend.

For a planar convex body the Cheeger problem is solved by an inner
parallel set rounded by a disk: h = 1/r* where r* is the unique root of
area(erode(poly, r)) = pi r^2. The module also tracks how the normalized
rigidity approaches h as p decreases toward 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidDomainError
from .geometry import ConvexPolygon, erode, _eroded_area
from .ptorsion import SolverOptions, rigidity_with_refinement
from .functionals import normalized_rigidity

BISECTION_RTOL = 1e-12


@dataclass(frozen=True)
class CheegerResult:
    h: float
    r_star: float
    cheeger_core: ConvexPolygon
    residual: float


def cheeger_constant(poly: ConvexPolygon) -> CheegerResult:
    """Cheeger constant via bisection on area(erode(r)) - pi r^2.

    The function is strictly decreasing from area > 0 at r = 0 to a
    negative value at r = inradius, so the root exists and is unique.
    """
    r_in = poly.inradius
    lo, hi = 0.0, r_in
    while hi - lo > BISECTION_RTOL * r_in:
        mid = 0.5 * (lo + hi)
        if _eroded_area(poly, mid) - math.pi * mid * mid > 0.0:
            lo = mid
        else:
            hi = mid
    r_star = 0.5 * (lo + hi)
    core = erode(poly, r_star)
    if core is None:
        raise InvalidDomainError("cheeger core collapsed; polygon is degenerate")
    residual = abs(core.area - math.pi * r_star * r_star)
    return CheegerResult(h=1.0 / r_star, r_star=r_star, cheeger_core=core, residual=residual)


@dataclass
class SmallPTrend:
    """Normalized rigidity against the Cheeger constant for p near 1."""

    rows: list  # (p, T_norm, |T_norm - h|)
    cheeger: CheegerResult
    q1: float  # inradius x h


def p_to_one_trend(
    poly: ConvexPolygon,
    p_list,
    levels: int = 3,
    h0: float | None = None,
    opts: SolverOptions | None = None,
) -> SmallPTrend:
    """Tabulate T(p; .) for a decreasing list of exponents near 1.

    The solver floor is p >= 1.05; the deviation column measures the
    distance to the Cheeger constant, the p -> 1 limit of T(p; .).
    """
    ps = [float(p) for p in p_list]
    if min(ps) < 1.05:
        raise ValueError("small-p trend supports p >= 1.05")
    if any(b >= a for a, b in zip(ps, ps[1:])):
        raise ValueError("p_list must be strictly decreasing")
    result = cheeger_constant(poly)
    rows = []
    for p in ps:
        est = rigidity_with_refinement(poly, p, levels=levels, h0=h0, opts=opts)
        t_norm = normalized_rigidity(est.t_p, poly.area, p)
        rows.append((p, t_norm, abs(t_norm - result.h)))
    return SmallPTrend(rows=rows, cheeger=result, q1=poly.inradius * result.h)
