#!/usr/bin/env python3
"""
Tests for the Laurent polynomial kernel, checked against sympy expansions
"""

import sympy

from src.laurent import (
    DimensionMismatch,
    ExponentBoundError,
    LaurentError,
    LaurentPoly,
    MonomialMap,
    ParseError,
    SeriesError,
    SingularMapError,
    TermCapExceeded,
    UnimodularMap,
    ct_sequence,
    ct_shifted,
    dehomogenize,
    diagonal_embedding,
    diagonal_prefix,
    geometric_series,
    iter_powers,
    macmahon_denominator,
    matrix_to_ct_poly,
    monomial_substitute,
    poly_mul,
    poly_parse,
    poly_pow,
    rational_diagonal_prefix,
    shifted_coefficient,
    verify_ct_preserved,
)

FRANEL_CT = "(x+1)*(y+1)*(x+y)*x^-1*y^-1"
APERY_B_CT = "(x+1)*(y+1)*(x+y+1)*x^-1*y^-1"


def _sympy_laurent(expr, symbols, shift: int) -> dict:
    """Coefficients of expr as {exponent: coeff}, expr * prod(symbols)^shift being a polynomial."""
    cleared = sympy.expand(expr * sympy.Mul(*symbols) ** shift)
    poly = sympy.Poly(cleared, *symbols)
    return {tuple(e - shift for e in exps): int(c) for exps, c in poly.terms()}


def test_parse_and_print():
    print("\n1. Testing parser and canonical text...")

    a = poly_parse(FRANEL_CT, 2)
    assert a.terms == {
        (1, 0): 1, (0, 1): 1, (1, -1): 1, (0, 0): 2,
        (-1, 1): 1, (0, -1): 1, (-1, 0): 1,
    }
    print(f"✓ Franel polynomial has {len(a)} terms")

    assert poly_parse(a.to_text(), 2) == a
    assert poly_parse("x^-1", 2).to_text() == "x^-1"
    assert poly_parse("x^(-2)*y", 2).terms == {(-2, 1): 1}
    assert poly_parse("-x^2", 1).terms == {(2,): -1}
    assert poly_parse("x1*x3", 3) == poly_parse("x*z", 3)
    print(f"✓ Canonical text round-trips: {a.to_text()}")

    assert LaurentPoly.from_json(a.to_json()) == a
    assert a.to_json()["terms"][0]["c"] == "1"
    print("✓ JSON form keeps coefficients as decimal strings")

    return True


def test_parse_errors():
    print("\n2. Testing parse errors...")

    try:
        poly_parse("x^", 2)
        assert False, "dangling power accepted"
    except ParseError as e:
        assert e.position == 2
        print(f"✓ Dangling power rejected at position {e.position}")

    try:
        poly_parse("(x+1)^-1", 2)
        assert False, "negative power of a binomial accepted"
    except ParseError:
        print("✓ Negative power of a non-unit rejected")

    try:
        poly_parse("z", 2)
        assert False, "third variable accepted in two variables"
    except ParseError:
        print("✓ Out-of-range variable rejected")

    try:
        poly_parse("x^5", 1, max_exponent=3)
        assert False, "exponent bound ignored"
    except ExponentBoundError as e:
        assert e.exponent == 5 and e.bound == 3
        print("✓ Exponent bound enforced")

    try:
        poly_parse("x $ y", 2)
        assert False, "stray character accepted"
    except ParseError as e:
        assert e.position == 2

    return True


def test_arithmetic_against_sympy():
    print("\n3. Testing products and powers against sympy...")

    x, y, z = sympy.symbols("x y z")
    a = poly_parse(FRANEL_CT, 2)
    expected = _sympy_laurent(((x + 1) * (y + 1) * (x + y) / (x * y)) ** 4, (x, y), 4)
    assert poly_pow(a, 4).terms == expected
    print(f"✓ A^4 matches sympy ({len(expected)} terms)")

    b = poly_parse("(x+y+z+1)*(x*y*z+x*y+y*z+z*x)*(x*y*z)^-1", 3)
    expected = _sympy_laurent(((x + y + z + 1) * (x * y * z + x * y + y * z + z * x) / (x * y * z)) ** 3,
                              (x, y, z), 3)
    assert poly_pow(b, 3).terms == expected
    print(f"✓ Three-variable cube matches sympy ({len(expected)} terms)")

    assert poly_pow(b, 5, method="binary") == poly_pow(b, 5, method="iterative")
    print("✓ Binary and iterative powering agree")

    c = poly_parse("x - y", 2)
    assert (c * c - poly_parse("x^2 - 2*x*y + y^2", 2)).is_zero()
    assert (a - a).is_zero() and (a + 0) == a
    assert poly_parse("3", 2) == 3
    print("✓ Ring operations behave")

    try:
        poly_parse("x", 1) + poly_parse("x", 2)
        assert False, "mixed dimensions added"
    except DimensionMismatch:
        print("✓ Mixed dimensions rejected")

    try:
        poly_pow(a, 6, term_cap=10)
        assert False, "term cap ignored"
    except TermCapExceeded as e:
        assert e.cap == 10 and e.terms > 10
        print("✓ Term cap enforced")

    return True


def test_constant_terms():
    print("\n4. Testing constant-term sequences...")

    a = poly_parse(FRANEL_CT, 2)
    assert a.constant_term() == 2
    assert ct_sequence(a, 5) == [1, 2, 10, 56, 346, 2252]
    assert ct_sequence(a, 0) == [1]
    assert ct_sequence(a, 5, prune=True) == ct_sequence(a, 5, prune=False)
    print("✓ Franel numbers from CT powers (with and without pruning)")

    for i, power in iter_powers(a):
        assert power == poly_pow(a, i)
        assert power.constant_term() == ct_sequence(a, 4)[i]
        if i == 4:
            break
    print("✓ Successive powers agree with poly_pow")

    d = poly_parse(APERY_B_CT, 2)
    assert ct_sequence(d, 4) == [1, 3, 19, 147, 1251]
    print("✓ Apéry numbers for zeta(2)")

    assert ct_sequence(poly_parse("x+x^-1", 1), 4) == [1, 0, 2, 0, 6]
    assert ct_shifted(poly_parse("x+x^-1", 1), 3, [1]) == 3
    print("✓ Shifted constant terms")

    try:
        ct_sequence(a, -1)
        assert False
    except LaurentError:
        pass

    return True


def test_monomial_maps():
    print("\n5. Testing monomial substitutions...")

    a = poly_parse(FRANEL_CT, 2)
    swap = MonomialMap.signed_permutation((1, 0), (1, 1))
    invert = MonomialMap.signed_permutation((0, 1), (-1, -1))
    shear = UnimodularMap(((1, 1), (0, 1)))
    for U in (swap, invert, shear):
        assert verify_ct_preserved(a, U, 6)
    print("✓ Unimodular maps preserve CT(A^n)")

    doubled = MonomialMap.scaling((2, 1))
    assert doubled.determinant == 2
    assert doubled.kind.value == "injective"
    assert ct_sequence(monomial_substitute(a, doubled), 5) == ct_sequence(a, 5)
    print("✓ Injective maps keep constant terms too")

    try:
        MonomialMap(((1, 2), (2, 4)))
        assert False
    except SingularMapError:
        print("✓ Singular map rejected")

    try:
        UnimodularMap(((2, 0), (0, 1)))
        assert False
    except LaurentError:
        print("✓ Non-unimodular map rejected")

    return True


def test_matrices_and_diagonals():
    print("\n6. Testing MacMahon matrices and diagonals...")

    cycle = ((1, 1, 0), (0, 1, 1), (1, 0, 1))
    homogeneous = matrix_to_ct_poly(cycle)
    assert ct_sequence(homogeneous, 4) == [1, 2, 10, 56, 346]
    print("✓ Row product of the cycle matrix gives the Franel numbers")

    flat = dehomogenize(homogeneous, 2)
    assert flat.dim == 2
    assert ct_sequence(flat, 4) == [1, 2, 10, 56, 346]
    print("✓ Dehomogenised form keeps the sequence")

    x1, x2, x3 = sympy.symbols("x1 x2 x3")
    expected = sympy.Matrix(3, 3, lambda i, j: int(i == j) - cycle[i][j] * [x1, x2, x3][j]).det()
    assert macmahon_denominator(cycle).terms == _sympy_laurent(expected, (x1, x2, x3), 0)
    assert rational_diagonal_prefix(macmahon_denominator(cycle), 4) == [1, 2, 10, 56, 346]
    assert rational_diagonal_prefix(poly_parse("1-x1-x2-x3+4*x1*x2*x3", 3), 3) == [1, 2, 10, 56]
    print("✓ Diagonal of 1/det(I - M X) gives the Franel numbers")

    a = poly_parse(APERY_B_CT, 2)
    Q = diagonal_embedding(a)
    assert Q.dim == 3 and min(min(e) for e in Q.support()) >= 0
    assert diagonal_prefix(Q, 4) == ct_sequence(a, 4)
    series = geometric_series(Q, 3)
    assert shifted_coefficient(a, (2, 1, 3)) == series.get((2, 1, 3), 0)
    assert shifted_coefficient(a, (3, 3, 3)) == 147
    print("✓ Embedding diagonal and shifted coefficients agree with CT")

    try:
        geometric_series(poly_parse("1 - x", 1), 3)
        assert False
    except SeriesError:
        print("✓ Series with non-zero constant term rejected")

    return True


def main():
    print("=" * 50)
    print("LAURENT KERNEL TEST")
    print("=" * 50)

    try:
        test_parse_and_print()
        test_parse_errors()
        test_arithmetic_against_sympy()
        test_constant_terms()
        test_monomial_maps()
        test_matrices_and_diagonals()

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
