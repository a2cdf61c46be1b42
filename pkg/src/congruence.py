"""Finite-range verifiers for Gauss, Lucas, D3 and valuation congruences.

Sequences come from pluggable sources: the recurrence evaluator reaches deep
indices instantly, the constant-term source is exact but capped.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Callable, Dict, List, Optional, Sequence, Union

import sympy
from sympy.ntheory.digits import digits

from .catalog import (
    RecurrenceSpec,
    SequenceEntry,
    Status,
    catalog_get,
    formula_terms,
    multinomial,
    recurrence_terms,
)
from .config import get_settings
from .laurent import LaurentPoly, ct_shifted, poly_mul


class CongruenceError(ValueError):
    pass


class DefinitionError(CongruenceError):
    pass


class PreconditionError(CongruenceError):
    pass


class ZeroTermError(CongruenceError):
    def __init__(self, n: int):
        super().__init__(f"u_{n} = 0, so its valuation is undefined")
        self.n = n


class SourceBudgetError(CongruenceError):
    def __init__(self, index: int, limit: int):
        super().__init__(f"index {index} is beyond the constant-term source limit {limit}")
        self.index = index
        self.limit = limit


# ------------------------------------------------------------------- sources

class SequenceSource:
    label = "sequence"

    def terms(self, N: int) -> List[int]:
        raise NotImplementedError

    def value(self, n: int) -> int:
        return self.terms(n)[n]


class RecurrenceSource(SequenceSource):
    def __init__(self, spec: RecurrenceSpec, label: Optional[str] = None):
        self.spec = spec
        self.label = label or f"{spec.family.value}{spec.params}"

    def terms(self, N: int) -> List[int]:
        return recurrence_terms(self.spec, N)


class BinomialSource(SequenceSource):
    def __init__(self, formula_id: str, label: Optional[str] = None):
        self.formula_id = formula_id
        self.label = label or formula_id
        self._cache: List[int] = []

    def terms(self, N: int) -> List[int]:
        if len(self._cache) <= N:
            self._cache = formula_terms(self.formula_id, N)
        return self._cache[:N + 1]


class CTSource(SequenceSource):
    def __init__(self, poly: LaurentPoly, label: Optional[str] = None, max_index: Optional[int] = None):
        self.poly = poly
        self.label = label or poly.to_text()
        self.max_index = get_settings().ct_source_max_index if max_index is None else max_index
        self._values = [1]
        self._power = LaurentPoly.constant(poly.dim)

    def terms(self, N: int) -> List[int]:
        if N > self.max_index:
            raise SourceBudgetError(N, self.max_index)
        while len(self._values) <= N:
            self._power = poly_mul(self._power, self.poly)
            self._values.append(self._power.constant_term())
        return self._values[:N + 1]


class FunctionSource(SequenceSource):
    def __init__(self, fn: Callable[[int], int], label: str = "function"):
        self.fn = fn
        self.label = label

    def terms(self, N: int) -> List[int]:
        return [self.fn(n) for n in range(N + 1)]


NAMED_FUNCTIONS: Dict[str, Callable[[int], int]] = {
    "power2": lambda n: 2 ** n,
    "central_binomial": lambda n: comb(2 * n, n),
    "trinomial": lambda n: multinomial(3 * n, (n, n, n)),
    "alternating": lambda n: (-1) ** n,
    "identity": lambda n: n,
    "successor": lambda n: n + 1,
}


def as_source(u: Union[str, SequenceSource, LaurentPoly, RecurrenceSpec, Callable[[int], int]],
              representation: str = "recurrence") -> SequenceSource:
    if isinstance(u, SequenceSource):
        return u
    if isinstance(u, LaurentPoly):
        return CTSource(u)
    if isinstance(u, RecurrenceSpec):
        return RecurrenceSource(u)
    if isinstance(u, str):
        if u in NAMED_FUNCTIONS:
            return FunctionSource(NAMED_FUNCTIONS[u], u)
        entry = catalog_get(u)
        if representation == "recurrence":
            return RecurrenceSource(entry.recurrence, entry.name)
        if representation == "binomial":
            return BinomialSource(entry.binomial_formulas[0], entry.name)
        if representation == "ct":
            return CTSource(entry.representations[0].poly, entry.name)
        raise CongruenceError(f"unknown representation {representation!r}")
    if callable(u):
        return FunctionSource(u, getattr(u, "__name__", "function"))
    raise CongruenceError(f"cannot build a sequence source from {type(u).__name__}")


# ------------------------------------------------------------------- reports

class CongruenceFamily(Enum):
    GAUSS = "gauss"
    LUCAS = "lucas"
    D3 = "d3"
    VALUATION = "valuation"
    JACOBSTHAL = "jacobsthal"
    LOWER_BINOMIAL = "lower_binomial"
    SHIFTED_GAUSS = "shifted_gauss"


def _jsonable(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


@dataclass
class CongruenceReport:
    family: CongruenceFamily
    sequence: str
    tested_range: Dict[str, object]
    passed: bool = True
    counterexample: Optional[Dict[str, object]] = None
    checks: int = 0
    order: Optional[int] = None
    exploratory: bool = False

    def fail(self, **details):
        if self.passed:
            self.passed = False
            self.counterexample = details

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        data = {
            "family": self.family.value,
            "sequence": self.sequence,
            "tested_range": _jsonable(self.tested_range),
            "verdict": self.verdict,
            "checks": self.checks,
            "counterexample": _jsonable(self.counterexample),
            "exploratory": self.exploratory,
        }
        if self.order is not None:
            data["order"] = self.order
        return data


# ---------------------------------------------------------------- arithmetic

def vp(n: int, p: int) -> int:
    if n == 0:
        raise CongruenceError("v_p(0) is undefined")
    return int(sympy.multiplicity(p, abs(n)))


def _vp_fraction(x: Fraction, p: int) -> int:
    return vp(x.numerator, p) - vp(x.denominator, p)


def base_p_digits(n: int, p: int) -> List[int]:
    """Little-endian base-p digits; 0 has the single digit 0."""
    if n < 0:
        raise CongruenceError(f"digits of a negative number: {n}")
    return list(reversed(digits(n, p)[1:]))


def _require_prime(p: int):
    if not sympy.isprime(p):
        raise DefinitionError(f"{p} is not prime")


# -------------------------------------------------------------------- checks

def gauss_check(u, r: int, primes: Sequence[int], k_max: int, n_max: int) -> CongruenceReport:
    source = as_source(u)
    primes = sorted(set(primes))
    for p in primes:
        _require_prime(p)
        if p < r + 1:
            raise DefinitionError(f"Gauss congruences of order {r} are only defined for primes p >= {r + 1}, got {p}")
    report = CongruenceReport(
        CongruenceFamily.GAUSS, source.label,
        {"primes": primes, "k_max": k_max, "n_max": n_max}, order=r)
    if not primes or k_max < 1 or n_max < 1:
        return report
    values = source.terms(n_max * max(primes) ** k_max)
    for p in primes:
        for k in range(1, k_max + 1):
            modulus = p ** (r * k)
            for n in range(1, n_max + 1):
                hi, lo = n * p ** k, n * p ** (k - 1)
                report.checks += 1
                if (values[hi] - values[lo]) % modulus:
                    report.fail(p=p, k=k, n=n, index=hi, value=values[hi],
                                lower_index=lo, lower_value=values[lo], modulus=modulus)
                    return report
    return report


def lucas_check(u, p: int, n_max: int) -> CongruenceReport:
    _require_prime(p)
    source = as_source(u)
    report = CongruenceReport(CongruenceFamily.LUCAS, source.label, {"p": p, "n_max": n_max})
    values = source.terms(max(n_max, p - 1))
    for n in range(n_max + 1):
        n_digits = base_p_digits(n, p)
        product = 1
        for d in n_digits:
            product *= values[d]
        report.checks += 1
        if (values[n] - product) % p:
            report.fail(p=p, n=n, digits=n_digits, value=values[n], digit_product=product, modulus=p)
            return report
    return report


def d3_check(u, p: int, s_max: int, m_max: int, n_max: int) -> CongruenceReport:
    _require_prime(p)
    source = as_source(u)
    report = CongruenceReport(
        CongruenceFamily.D3, source.label, {"p": p, "s_max": s_max, "m_max": m_max, "n_max": n_max})
    values = source.terms(n_max + m_max * p ** s_max)
    for s in range(s_max + 1):
        modulus = p ** s
        for m in range(1, m_max + 1):
            shift = m * p ** s
            for n in range(n_max + 1):
                lhs = values[n + shift] * values[n // p]
                rhs = values[n] * values[(n + shift) // p]
                report.checks += 1
                if (lhs - rhs) % modulus:
                    report.fail(p=p, s=s, m=m, n=n, lhs=lhs, rhs=rhs, modulus=modulus)
                    return report
    return report


def alpha_p(zero_digits: Sequence[int], n: int, p: int) -> int:
    if n == 0:
        return 0
    return sum(1 for d in base_p_digits(n, p) if d in zero_digits)


def valuation_bound_check(u, p: int, n_max: int) -> CongruenceReport:
    _require_prime(p)
    source = as_source(u)
    values = source.terms(max(n_max, p - 1))
    zero_digits = [i for i in range(p) if values[i] % p == 0]
    report = CongruenceReport(
        CongruenceFamily.VALUATION, source.label, {"p": p, "n_max": n_max, "Z_p": zero_digits})
    for n in range(n_max + 1):
        if values[n] == 0:
            raise ZeroTermError(n)
        bound = alpha_p(zero_digits, n, p)
        valuation = vp(values[n], p)
        report.checks += 1
        if valuation < bound:
            report.fail(p=p, n=n, value=values[n], valuation=valuation, bound=bound)
            return report
    return report


def jacobsthal_check(n: int, m: int, p: int) -> bool:
    if p == 2:
        raise DefinitionError("the Jacobsthal congruence needs an odd prime")
    _require_prime(p)
    if not n >= m >= 0:
        raise PreconditionError(f"need n >= m >= 0, got n={n}, m={m}")
    if m == 0 or m == n:
        return True
    exponent = vp(n * m * (n - m), p) + 3 - (1 if p == 3 else 0)
    difference = Fraction(comb(p * n, p * m), comb(n, m)) - 1
    return difference == 0 or _vp_fraction(difference, p) >= exponent


def lower_binom_check(n: int, m: int, p: int) -> bool:
    _require_prime(p)
    if not n >= m >= 1:
        raise PreconditionError(f"need n >= m >= 1, got n={n}, m={m}")
    gap = vp(n, p) - vp(m, p)
    if gap < 0:
        raise PreconditionError(f"v_{p}({n}) < v_{p}({m})")
    return comb(n, m) % p ** gap == 0


def lemma_grid(n_max: int, primes: Sequence[int]) -> List[CongruenceReport]:
    """Both binomial lemmas over every pair m <= n <= n_max."""
    primes = sorted(set(primes))
    jacobsthal = CongruenceReport(CongruenceFamily.JACOBSTHAL, "binomial", {"primes": primes, "n_max": n_max})
    lower = CongruenceReport(CongruenceFamily.LOWER_BINOMIAL, "binomial", {"primes": primes, "n_max": n_max})
    for p in primes:
        for n in range(n_max + 1):
            for m in range(n + 1):
                jacobsthal.checks += 1
                if not jacobsthal_check(n, m, p):
                    jacobsthal.fail(p=p, n=n, m=m)
                if m >= 1 and vp(n, p) >= vp(m, p):
                    lower.checks += 1
                    if not lower_binom_check(n, m, p):
                        lower.fail(p=p, n=n, m=m)
    return [jacobsthal, lower]


def shifted_gauss_check(poly: LaurentPoly, n_vec: Sequence[int], n: int, primes: Sequence[int],
                        r_max: int, k: int, max_power: Optional[int] = None) -> CongruenceReport:
    """Exploratory: CT(L^{p^r n} x^{p^r n_vec}) against the same at p^{r-1}, mod p^{kr}."""
    if len(n_vec) != poly.dim:
        raise CongruenceError(f"shift vector needs {poly.dim} entries")
    limit = get_settings().ct_source_max_index if max_power is None else max_power
    primes = sorted(set(primes))
    for p in primes:
        _require_prime(p)
    report = CongruenceReport(
        CongruenceFamily.SHIFTED_GAUSS, poly.to_text(),
        {"n_vec": list(n_vec), "n": n, "primes": primes, "r_max": r_max}, order=k, exploratory=True)
    for p in primes:
        for r in range(1, r_max + 1):
            hi_power = p ** r * n
            if hi_power > limit:
                raise SourceBudgetError(hi_power, limit)
            hi = ct_shifted(poly, hi_power, [p ** r * v for v in n_vec])
            lo = ct_shifted(poly, p ** (r - 1) * n, [p ** (r - 1) * v for v in n_vec])
            modulus = p ** (k * r)
            report.checks += 1
            if (hi - lo) % modulus:
                report.fail(p=p, r=r, value=hi, lower_value=lo, modulus=modulus)
                return report
    return report


# -------------------------------------------------------------- expectations

def expected_verdict(family: CongruenceFamily, entry: Optional[SequenceEntry], r: int = 1) -> Optional[bool]:
    """True when the catalog asserts the congruence, None when it only reports."""
    if entry is None:
        return None
    if family is CongruenceFamily.GAUSS:
        if r == 1:
            return True
        if r <= entry.expected_gauss_order and entry.gauss_order_status is Status.PROVEN:
            return True
        return None
    if family is CongruenceFamily.LUCAS:
        return True if entry.sporadic or entry.name.startswith("apery") else None
    if family in (CongruenceFamily.D3, CongruenceFamily.VALUATION):
        covered = entry.sporadic or entry.name.startswith("apery")
        return True if entry.polytope_origin_only and covered else None
    return None
