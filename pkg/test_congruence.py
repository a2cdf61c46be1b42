#!/usr/bin/env python3
"""
Tests for the congruence checkers and their sequence sources
"""

from src.catalog import catalog_entries, catalog_get, catalog_list, recurrence_terms, sporadic_names
from src.congruence import (
    CTSource,
    CongruenceFamily,
    DefinitionError,
    FunctionSource,
    PreconditionError,
    SourceBudgetError,
    ZeroTermError,
    alpha_p,
    as_source,
    base_p_digits,
    d3_check,
    expected_verdict,
    gauss_check,
    jacobsthal_check,
    lemma_grid,
    lower_binom_check,
    lucas_check,
    shifted_gauss_check,
    valuation_bound_check,
    vp,
)
from src.laurent import poly_parse

ORIGIN_ONLY_SPORADIC = [e.name for e in catalog_entries() if e.sporadic and e.polytope_origin_only]


def test_arithmetic():
    print("\n1. Testing p-adic helpers...")

    assert vp(12, 2) == 2 and vp(-45, 3) == 2 and vp(7, 5) == 0
    assert base_p_digits(10, 3) == [1, 0, 1]
    assert base_p_digits(0, 7) == [0]
    assert alpha_p([0], 9, 3) == 2
    assert alpha_p([1, 3], 0, 5) == 0
    print("✓ Valuations and little-endian digits")

    return True


def test_sources():
    print("\n2. Testing sequence sources...")

    reference = recurrence_terms(catalog_get("A").recurrence, 6)
    assert as_source("A").terms(6) == reference
    assert as_source("A", "binomial").terms(6) == reference
    assert as_source("A", "ct").terms(6) == reference
    assert as_source("trinomial").terms(3) == [1, 6, 90, 1680]
    print("✓ Recurrence, binomial, CT and named sources agree")

    capped = CTSource(poly_parse("x+x^-1", 1), max_index=4)
    try:
        capped.terms(5)
        assert False
    except SourceBudgetError as e:
        assert e.index == 5 and e.limit == 4
        print("✓ CT source budget enforced")

    return True


def test_gauss():
    print("\n3. Testing Gauss congruences...")

    report = gauss_check("B", 2, [3, 5, 7], 2, 2)
    assert report.passed, report.counterexample
    assert report.checks == 12
    print(f"✓ B is a supercongruence of order 2 ({report.checks} checks)")

    for name in ("gamma", "D"):
        report = gauss_check(name, 3, [5, 7], 2, 2)
        assert report.passed, (name, report.counterexample)
        print(f"✓ {name} holds to order 3 for p = 5, 7")

    for name in catalog_list():
        assert gauss_check(name, 1, [2, 3, 5], 2, 3).passed, name
    print(f"✓ Order-1 Gauss congruences for all {len(catalog_list())} sequences")

    assert gauss_check("trinomial", 2, [3, 5, 7], 2, 2).passed
    assert gauss_check("alternating", 2, [3, 5, 7], 2, 2).passed
    print("✓ Trinomial and (-1)^n at order 2")

    powers = gauss_check("power2", 2, [3, 5], 1, 2)
    assert not powers.passed
    assert powers.counterexample["p"] == 3 and powers.counterexample["n"] == 1
    assert powers.to_json()["counterexample"]["value"] == "8"
    assert gauss_check("power2", 1, [3, 5], 2, 2).passed
    print("✓ 2^n holds at order 1 but not order 2")

    for primes, order in (([2], 2), ([4], 1)):
        try:
            gauss_check("B", order, primes, 1, 1)
            assert False
        except DefinitionError:
            pass
    print("✓ Undefined prime/order pairs rejected")

    return True


def test_lucas_and_dwork():
    print("\n4. Testing Lucas and D3 congruences...")

    assert lucas_check("gamma", 2, 100).passed
    for name in sporadic_names():
        for p in (2, 3, 5):
            assert lucas_check(name, p, 200).passed, (name, p)
    print(f"✓ Lucas congruences for all {len(sporadic_names())} sporadic sequences, p = 2, 3, 5, n <= 200")

    assert len(ORIGIN_ONLY_SPORADIC) == 14
    for name in ORIGIN_ONLY_SPORADIC:
        for p in (2, 3):
            assert d3_check(name, p, 2, 2, 8).passed, (name, p)
    print(f"✓ D3 congruences for s, m <= 2 on {len(ORIGIN_ONLY_SPORADIC)} sequences")

    failing = lucas_check("successor", 3, 10)
    assert not failing.passed
    print(f"✓ n+1 breaks Lucas at n = {failing.counterexample['n']}")

    return True


def test_valuations():
    print("\n5. Testing valuation bounds...")

    report = valuation_bound_check("gamma", 5, 60)
    assert report.passed
    assert report.tested_range["Z_p"] == [1, 3]
    print(f"✓ gamma: Z_5 = {report.tested_range['Z_p']}")

    for name in ORIGIN_ONLY_SPORADIC:
        for p in (3, 5):
            assert valuation_bound_check(name, p, 60).passed, (name, p)
    print(f"✓ Valuation bounds for {len(ORIGIN_ONLY_SPORADIC)} sequences, p = 3, 5, n <= 60")

    try:
        valuation_bound_check("identity", 3, 5)
        assert False
    except ZeroTermError as e:
        assert e.n == 0
        print("✓ Zero term rejected")

    return True


def test_lemmas():
    print("\n6. Testing binomial lemmas...")

    reports = lemma_grid(60, [3, 5, 7])
    assert [r.family for r in reports] == [CongruenceFamily.JACOBSTHAL, CongruenceFamily.LOWER_BINOMIAL]
    assert all(r.passed for r in reports)
    print(f"✓ Lemma grid: {reports[0].checks} + {reports[1].checks} checks")

    assert jacobsthal_check(6, 3, 5)
    try:
        jacobsthal_check(4, 2, 2)
        assert False
    except DefinitionError:
        pass
    try:
        lower_binom_check(5, 0, 3)
        assert False
    except PreconditionError:
        print("✓ Preconditions enforced")

    return True


def test_expectations_and_shifts():
    print("\n7. Testing catalog expectations...")

    assert expected_verdict(CongruenceFamily.GAUSS, catalog_get("B"), 2) is True
    assert expected_verdict(CongruenceFamily.GAUSS, catalog_get("E"), 2) is None
    assert expected_verdict(CongruenceFamily.GAUSS, catalog_get("L3"), 1) is True
    assert expected_verdict(CongruenceFamily.LUCAS, catalog_get("A")) is True
    assert expected_verdict(CongruenceFamily.D3, catalog_get("eta")) is None
    assert expected_verdict(CongruenceFamily.GAUSS, None, 1) is None
    print("✓ Expectations follow the catalog")

    report = shifted_gauss_check(catalog_get("A").representations[0].poly, (0, 0), 1, [3], 1, 1)
    assert report.exploratory and report.passed
    print("✓ Shifted Gauss check is exploratory")

    return True


def main():
    print("=" * 50)
    print("CONGRUENCE TEST")
    print("=" * 50)

    try:
        test_arithmetic()
        test_sources()
        test_gauss()
        test_lucas_and_dwork()
        test_valuations()
        test_lemmas()
        test_expectations_and_shifts()

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
