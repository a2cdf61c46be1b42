"""Newton polytopes of Laurent polynomials in up to four variables.

Supports are tiny, so facets are found by brute force over point subsets and
every test is an exact integer comparison.
"""

import itertools
from dataclasses import dataclass, field
from math import gcd
from typing import List, Sequence, Tuple

import numpy as np
import sympy

from .laurent import ExponentVector, LaurentPoly


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class Facet:
    normal: Tuple[int, ...]
    offset: int

    def value(self, point: Sequence[int]) -> int:
        return sum(n * p for n, p in zip(self.normal, point))

    def contains(self, point: Sequence[int]) -> bool:
        return self.value(point) <= self.offset

    def strictly_contains(self, point: Sequence[int]) -> bool:
        return self.value(point) < self.offset


@dataclass
class Polytope:
    dim: int
    vertices: List[ExponentVector]
    facets: List[Facet] = field(default_factory=list)
    affine_dim: int = 0

    @property
    def full_dimensional(self) -> bool:
        return self.affine_dim == self.dim

    def contains(self, point: Sequence[int]) -> bool:
        if self.full_dimensional:
            return all(f.contains(point) for f in self.facets)
        point = tuple(point)
        if _affine_rank(self.vertices + [point]) != self.affine_dim:
            return False
        if self.affine_dim == 0:
            return point == self.vertices[0]
        # test inside the affine hull, projected onto coordinates that stay independent there
        columns = _independent_coordinates(self.vertices, self.affine_dim)
        projected = polytope_of_points([tuple(v[c] for c in columns) for v in self.vertices])
        return projected.contains(tuple(point[c] for c in columns))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "affine_dim": self.affine_dim,
            "vertices": [list(v) for v in self.vertices],
            "facets": [{"normal": list(f.normal), "offset": f.offset} for f in self.facets],
        }


@dataclass
class InteriorVerdict:
    passed: bool
    origin_interior: bool
    witnesses: List[ExponentVector]
    polytope: Polytope

    def to_json(self) -> dict:
        return {
            "verdict": "pass" if self.passed else "fail",
            "origin_interior": self.origin_interior,
            "witnesses": [list(w) for w in self.witnesses],
            "vertices": [list(v) for v in self.polytope.vertices],
            "full_dimensional": self.polytope.full_dimensional,
        }


def _primitive(vector: Sequence[int]) -> Tuple[int, ...]:
    g = 0
    for v in vector:
        g = gcd(g, int(v))
    return tuple(int(v) // g for v in vector) if g else tuple(int(v) for v in vector)


def _affine_rank(points: List[ExponentVector]) -> int:
    if len(points) < 2:
        return 0
    base = points[0]
    return sympy.Matrix([[p[i] - base[i] for i in range(len(base))] for p in points[1:]]).rank()


def _cross(p: ExponentVector, q: ExponentVector, r: ExponentVector) -> int:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _hull_2d(points: List[ExponentVector]) -> List[ExponentVector]:
    """Monotone chain; counter-clockwise vertices with collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: List[ExponentVector] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[ExponentVector] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _facets_2d(ring: List[ExponentVector]) -> List[Facet]:
    facets = []
    for p, q in zip(ring, ring[1:] + ring[:1]):
        normal = _primitive((q[1] - p[1], p[0] - q[0]))
        facets.append(Facet(normal, normal[0] * p[0] + normal[1] * p[1]))
    return facets


def _hyperplane_normal(subset: Sequence[ExponentVector]) -> Tuple[int, ...]:
    base = np.array(subset[0], dtype=np.int64)
    diffs = np.array(subset[1:], dtype=np.int64) - base
    d = diffs.shape[1]
    normal = []
    for i in range(d):
        minor = np.delete(diffs, i, axis=1)
        normal.append((-1) ** i * int(sympy.Matrix(minor.tolist()).det()))
    return _primitive(normal)


def _facets_brute_force(points: List[ExponentVector]) -> List[Facet]:
    d = len(points[0])
    coords = np.array(points, dtype=np.int64)
    found = set()
    for subset in itertools.combinations(points, d):
        normal = _hyperplane_normal(subset)
        if not any(normal):
            continue
        offset = sum(n * v for n, v in zip(normal, subset[0]))
        values = coords @ np.array(normal, dtype=np.int64)
        if (values <= offset).all():
            found.add(Facet(normal, offset))
        elif (values >= offset).all():
            found.add(Facet(tuple(-n for n in normal), -offset))
    return sorted(found, key=lambda f: (f.normal, f.offset))


def _vertices_from_facets(points: List[ExponentVector], facets: List[Facet]) -> List[ExponentVector]:
    d = len(points[0])
    vertices = []
    for p in points:
        tight = [f.normal for f in facets if f.value(p) == f.offset]
        if len(tight) >= d and sympy.Matrix(tight).rank() == d:
            vertices.append(p)
    return sorted(vertices)


def _independent_coordinates(points: List[ExponentVector], rank: int) -> Tuple[int, ...]:
    base = points[0]
    diffs = sympy.Matrix([[p[i] - base[i] for i in range(len(base))] for p in points[1:]])
    for columns in itertools.combinations(range(len(base)), rank):
        if diffs.extract(list(range(diffs.rows)), list(columns)).rank() == rank:
            return columns
    raise PolytopeError("could not find a projection for a lower-dimensional support")


def _extreme_points(points: List[ExponentVector]) -> List[ExponentVector]:
    """Vertices of the hull of points, of any affine dimension."""
    rank = _affine_rank(points)
    if rank == 0:
        return [points[0]]
    columns = _independent_coordinates(points, rank)
    projected = {tuple(p[c] for c in columns): p for p in points}
    keys = list(projected)
    if rank == 1:
        chosen = [min(keys), max(keys)]
    elif rank == 2:
        chosen = _hull_2d(keys)
    else:
        chosen = _vertices_from_facets(keys, _facets_brute_force(keys))
    return sorted(projected[k] for k in chosen)


def newton_polytope(a: LaurentPoly) -> Polytope:
    if a.is_zero():
        raise PolytopeError("the zero polynomial has no Newton polytope")
    points = a.support()
    d = a.dim
    rank = _affine_rank(points)
    if rank < d:
        return Polytope(d, _extreme_points(points), [], rank)
    if d == 1:
        lo, hi = points[0], points[-1]
        return Polytope(1, [lo, hi], [Facet((-1,), -lo[0]), Facet((1,), hi[0])], 1)
    if d == 2:
        ring = _hull_2d(points)
        return Polytope(2, sorted(ring), _facets_2d(ring), 2)
    if d > 4:
        raise PolytopeError(f"Newton polytopes are supported up to dimension 4, got {d}")
    facets = _facets_brute_force(points)
    return Polytope(d, _vertices_from_facets(points, facets), facets, d)


def polytope_of_points(points: Sequence[Sequence[int]]) -> Polytope:
    """Convex hull of explicit lattice points."""
    if not points:
        raise PolytopeError("no points given")
    dim = len(points[0])
    return newton_polytope(LaurentPoly(dim, {tuple(p): 1 for p in points}))


def interior_integral_points(P: Polytope) -> List[ExponentVector]:
    if not P.full_dimensional or not P.facets:
        return []
    verts = np.array(P.vertices, dtype=np.int64)
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, P.dim)
    normals = np.array([f.normal for f in P.facets], dtype=np.int64)
    offsets = np.array([f.offset for f in P.facets], dtype=np.int64)
    inside = (grid @ normals.T < offsets).all(axis=1)
    return sorted(tuple(int(v) for v in row) for row in grid[inside])


def origin_only_interior(a: LaurentPoly) -> InteriorVerdict:
    P = newton_polytope(a)
    interior = interior_integral_points(P)
    origin = (0,) * a.dim
    witnesses = [p for p in interior if p != origin]
    origin_interior = origin in interior
    return InteriorVerdict(origin_interior and not witnesses, origin_interior, witnesses, P)
