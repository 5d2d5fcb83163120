"""Payoff-space geometry in exact rational arithmetic.

The feasible payoff set of a stage game is the convex hull of its payoff
vectors (long-run averages of periodic play reach every rational point of
it). This module extracts hull vertices, tests folk-region membership
(feasible and strictly above the minimax point), computes group Pareto
frontiers and projects onto coordinate planes for plotting. No floats
anywhere: frontier membership feeds equilibrium assertions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ._lp import simplex_max
from .game import PayoffVector, StageGame, as_fraction
from .minimax import minimax_point

MAX_HULL_DIMENSION = 4

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class PayoffGeometry:
    """Hull vertices of a payoff point set, with the game's minimax point
    attached when known. Vertices are sorted and are always a subset of
    the original points."""

    vertices: tuple[PayoffVector, ...]
    minimax_point: PayoffVector | None
    dimension: int


def in_hull(point, points) -> bool:
    """Exact convex-hull membership via a feasibility program."""
    point = tuple(as_fraction(v) for v in point)
    points = [tuple(as_fraction(v) for v in p) for p in points]
    if not points:
        return False
    dim = len(point)
    if any(len(p) != dim for p in points):
        raise ValueError("dimension mismatch")
    A = [[p[i] for p in points] for i in range(dim)]
    A.append([ONE] * len(points))
    b = list(point) + [ONE]
    status, _, _ = simplex_max([ZERO] * len(points), A, b)
    return status == "optimal"


def _strictly_dominated(x, points, coords) -> bool:
    """Can some convex combination of ``points`` exceed ``x`` strictly on
    every coordinate in ``coords``? Solved as: maximise t subject to
    sum(lam * p) - t - slack = x on those coordinates, lam on the simplex."""
    npts = len(points)
    k = len(coords)
    nvars = npts + 1 + k  # lambdas, t, slacks
    A = []
    b = []
    for pos, i in enumerate(coords):
        row = [p[i] for p in points]
        row.append(-ONE)  # t
        row.extend(-ONE if s == pos else ZERO for s in range(k))
        A.append(row)
        b.append(x[i])
    A.append([ONE] * npts + [ZERO] * (1 + k))
    b.append(ONE)
    c = [ZERO] * npts + [ONE] + [ZERO] * k
    status, _, value = simplex_max(c, A, b)
    return status == "optimal" and value > 0


def _extreme_points(points) -> tuple[PayoffVector, ...]:
    distinct = sorted(set(points))
    vertices = []
    for i, p in enumerate(distinct):
        others = distinct[:i] + distinct[i + 1 :]
        if not others or not in_hull(p, others):
            vertices.append(p)
    return tuple(vertices)


def feasible_hull(game: StageGame) -> PayoffGeometry:
    """Hull of all stage payoff vectors. Supports up to four players;
    larger games are rejected rather than approximated."""
    if game.n_players > MAX_HULL_DIMENSION:
        raise ValueError(
            f"hull computation supports at most {MAX_HULL_DIMENSION} players, "
            f"got {game.n_players}"
        )
    return PayoffGeometry(
        vertices=_extreme_points(game.table),
        minimax_point=minimax_point(game),
        dimension=game.n_players,
    )


def hull_of_points(points, minimax: PayoffVector | None = None) -> PayoffGeometry:
    """Hull of an arbitrary point set, e.g. the payoffs a coordination
    group can steer the game to."""
    pts = [tuple(as_fraction(v) for v in p) for p in points]
    if not pts:
        raise ValueError("need at least one point")
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise ValueError("dimension mismatch")
    if dim > MAX_HULL_DIMENSION:
        raise ValueError(
            f"hull computation supports at most {MAX_HULL_DIMENSION} dimensions"
        )
    return PayoffGeometry(
        vertices=_extreme_points(pts), minimax_point=minimax, dimension=dim
    )


def folk_region_member(geom: PayoffGeometry, x) -> bool:
    """True iff ``x`` is feasible and strictly dominates the minimax point
    in every coordinate. The minimax point itself is never a member."""
    x = tuple(as_fraction(v) for v in x)
    if len(x) != geom.dimension:
        raise ValueError(
            f"point has dimension {len(x)}, geometry has {geom.dimension}"
        )
    if geom.minimax_point is None:
        raise ValueError("geometry carries no minimax point")
    if not all(u > v for u, v in zip(x, geom.minimax_point)):
        return False
    return in_hull(x, geom.vertices)


def _check_coords(geom: PayoffGeometry, coords) -> tuple[int, ...]:
    coords = tuple(coords)
    if not coords:
        raise ValueError("need at least one coordinate")
    if len(set(coords)) != len(coords):
        raise ValueError("duplicate coordinate")
    for i in coords:
        if not 0 <= i < geom.dimension:
            raise ValueError(f"coordinate {i} out of range")
    return coords


def pareto_optimal(geom: PayoffGeometry, coords, x) -> bool:
    """True iff ``x`` is feasible and no feasible point strictly exceeds it
    on every coordinate in ``coords`` (weak Pareto optimality for that
    group of coordinates)."""
    coords = _check_coords(geom, coords)
    x = tuple(as_fraction(v) for v in x)
    if len(x) != geom.dimension:
        raise ValueError("dimension mismatch")
    if not in_hull(x, geom.vertices):
        return False
    return not _strictly_dominated(x, geom.vertices, coords)


def pareto_frontier(geom: PayoffGeometry, coords) -> tuple[PayoffVector, ...]:
    """The hull vertices that are weakly Pareto optimal for ``coords``;
    these support the frontier faces."""
    coords = _check_coords(geom, coords)
    return tuple(
        v
        for v in geom.vertices
        if not _strictly_dominated(v, geom.vertices, coords)
    )


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_2d(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return tuple(lower[:-1] + upper[:-1])


def project(obj, axes):
    """Project onto two coordinates.

    For a PayoffGeometry the result is the projected hull polygon, ordered
    counter-clockwise from its lexicographically smallest vertex, with
    collinear points dropped (a segment or single point when degenerate).
    For a plain iterable of points the result is the sorted set of
    projected coordinate pairs.
    """
    ax, ay = axes
    if ax == ay:
        raise ValueError("projection axes must be distinct")
    if isinstance(obj, PayoffGeometry):
        for axis in (ax, ay):
            if not 0 <= axis < obj.dimension:
                raise ValueError(f"axis {axis} out of range")
        return _hull_2d([(v[ax], v[ay]) for v in obj.vertices])
    pts = [tuple(as_fraction(v) for v in p) for p in obj]
    for p in pts:
        for axis in (ax, ay):
            if not 0 <= axis < len(p):
                raise ValueError(f"axis {axis} out of range")
    return tuple(sorted({(p[ax], p[ay]) for p in pts}))
