#!/usr/bin/env python3
"""
Tests for Newton polytopes and the origin-only interior condition
"""

from itertools import permutations, product

from src.catalog import catalog_entries, catalog_get
from src.laurent import LaurentPoly, poly_parse
from src.polytope import (
    Facet,
    PolytopeError,
    interior_integral_points,
    newton_polytope,
    origin_only_interior,
    polytope_of_points,
)


def test_polygons():
    print("\n1. Testing 2-variable polytopes...")

    a = catalog_get("A").representations[0].poly
    P = newton_polytope(a)
    assert P.full_dimensional and P.affine_dim == 2
    assert sorted(P.vertices) == sorted([(1, 0), (0, 1), (1, -1), (-1, 1), (0, -1), (-1, 0)])
    assert len(P.facets) == 6
    assert interior_integral_points(P) == [(0, 0)]
    print(f"✓ Franel polygon: {len(P.vertices)} vertices, origin only inside")

    triangle = origin_only_interior(poly_parse("x+y+x^-1*y^-1", 2))
    assert triangle.passed and triangle.origin_interior and triangle.witnesses == []
    print("✓ Reflexive triangle passes")

    square = polytope_of_points([(-2, -2), (2, -2), (2, 2), (-2, 2)])
    assert len(interior_integral_points(square)) == 9
    assert square.contains((2, 0)) and not square.contains((3, 0))
    print("✓ Larger square has 9 interior points")

    return True


def test_degenerate_supports():
    print("\n2. Testing lower-dimensional supports...")

    segment = origin_only_interior(poly_parse("x+x^-1", 2))
    assert not segment.passed
    assert not segment.origin_interior
    assert segment.polytope.affine_dim == 1
    print("✓ Segment in the plane has no interior")

    line = polytope_of_points([(-1, 0), (1, 0)])
    assert line.contains((0, 0)) and line.contains((1, 0))
    assert not line.contains((2, 0)) and not line.contains((0, 1))
    square = polytope_of_points([(1, 1, 0), (1, -1, 0), (-1, 1, 0), (-1, -1, 0)])
    assert square.affine_dim == 2
    assert square.contains((0, 0, 0)) and square.contains((1, 0, 0))
    assert not square.contains((0, 0, 1)) and not square.contains((2, 0, 0))
    assert polytope_of_points([(3, 4)]).contains((3, 4))
    print("✓ Membership inside the affine hull of flat polytopes")

    symmetric = catalog_get("C").representations[1]
    P = newton_polytope(symmetric.poly)
    assert P.affine_dim == 2 and not P.full_dimensional
    assert interior_integral_points(P) == []
    print("✓ Symmetric C form lies in a hyperplane")

    try:
        newton_polytope(LaurentPoly(2))
        assert False
    except PolytopeError:
        print("✓ Zero polynomial rejected")

    return True


def test_three_dimensional():
    print("\n3. Testing 3-variable polytopes...")

    cube = polytope_of_points(list(product((-1, 1), repeat=3)))
    assert len(cube.vertices) == 8 and len(cube.facets) == 6
    assert interior_integral_points(cube) == [(0, 0, 0)]
    print("✓ Cube: 8 vertices, 6 facets")

    octahedron = polytope_of_points([p for base in ((1, 0, 0), (-1, 0, 0)) for p in permutations(base)])
    assert len(octahedron.vertices) == 6 and len(octahedron.facets) == 8
    assert interior_integral_points(octahedron) == [(0, 0, 0)]
    print("✓ Octahedron: 6 vertices, 8 facets")

    facet = Facet((1, 0, 0), 1)
    assert facet.contains((1, 5, 5)) and not facet.strictly_contains((1, 0, 0))
    assert facet.value((3, 0, 0)) == 3

    return True


def test_catalog_verdicts():
    print("\n4. Testing catalog polytope verdicts...")

    passes = []
    for entry in catalog_entries():
        for rep in entry.representations:
            if not rep.polytope_asserted:
                continue
            verdict = origin_only_interior(rep.polytope_poly)
            assert verdict.passed == entry.polytope_origin_only, (entry.name, rep.label)
            if verdict.passed:
                passes.append(entry.name)
    assert len([n for n in passes if catalog_get(n).sporadic]) == 14
    assert "L3" in passes
    print(f"✓ {len(passes)} asserted representations are origin-only")

    eta = origin_only_interior(catalog_get("eta").representations[0].poly)
    expected = {p for base in ((1, 0, 0), (1, 1, 0)) for p in permutations(base)}
    assert eta.origin_interior and not eta.passed
    assert set(eta.witnesses) == expected
    print(f"✓ eta fails with witnesses {sorted(eta.witnesses)}")

    data = eta.to_json()
    assert data["verdict"] == "fail" and len(data["witnesses"]) == 6

    return True


def main():
    print("=" * 50)
    print("POLYTOPE TEST")
    print("=" * 50)

    try:
        test_polygons()
        test_degenerate_supports()
        test_three_dimensional()
        test_catalog_verdicts()

        print("\n" + "=" * 50)
        print("✅ ALL TESTS COMPLETED SUCCESSFULLY!")
        print("=" * 50)

    except Exception as e:
        print(f"\n❌ Test failed: {e}")
        import traceback
        traceback.print_exc()
        return 1

    return 0


if __name__ == "__main__":
    exit(main())
