"""Registry of the sporadic Apéry-like sequences and their evaluators.

Every entry carries three independent descriptions of the same sequence: a
three-term recurrence, one or more binomial sums, and Laurent polynomials whose
constant-term sequence reproduces it.
"""

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from math import comb, factorial
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .laurent import LaurentPoly, macmahon_denominator, poly_parse

# catalog texts are fixed; the configured cap governs products and powers only
CATALOG_TERM_CAP = 100_000


class CatalogError(ValueError):
    pass


class UnknownSequenceError(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown sequence {self.name!r}"


class NonIntegralError(CatalogError):
    def __init__(self, n: int, numerator: int, divisor: int):
        super().__init__(f"u_{n + 1} = {numerator}/{divisor} is not an integer (step n={n})")
        self.n = n
        self.numerator = numerator
        self.divisor = divisor


class InexactDivisionError(CatalogError):
    pass


class RecurrenceFamily(Enum):
    ZAGIER2 = "zagier2"
    AZ3 = "az3"
    COOPER3 = "cooper3"


_ARITY = {RecurrenceFamily.ZAGIER2: 3, RecurrenceFamily.AZ3: 3, RecurrenceFamily.COOPER3: 4}


class Status(Enum):
    PROVEN = "proven"
    EMPIRICAL = "empirical"
    EXPECTED = "expected"


@dataclass(frozen=True)
class RecurrenceSpec:
    family: RecurrenceFamily
    params: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(int(p) for p in self.params))
        if len(self.params) != _ARITY[self.family]:
            raise CatalogError(
                f"{self.family.value} takes {_ARITY[self.family]} parameters, got {len(self.params)}")

    def step(self, n: int) -> Tuple[int, int, int]:
        """(divisor, coefficient of u_n, coefficient of u_{n-1}) for the step to u_{n+1}."""
        if self.family is RecurrenceFamily.ZAGIER2:
            A, B, lam = self.params
            return (n + 1) ** 2, A * n * n + A * n + lam, -B * n * n
        a, b, c = self.params[:3]
        main = (2 * n + 1) * (a * n * n + a * n + b)
        if self.family is RecurrenceFamily.AZ3:
            return (n + 1) ** 3, main, -c * n ** 3
        d = self.params[3]
        return (n + 1) ** 3, main, -n * (c * n * n + d)

    def iter_terms(self) -> Iterator[int]:
        previous, current = 0, 1
        n = 0
        while True:
            yield current
            divisor, alpha, beta = self.step(n)
            numerator = alpha * current + beta * previous
            quotient, remainder = divmod(numerator, divisor)
            if remainder:
                raise NonIntegralError(n, numerator, divisor)
            previous, current = current, quotient
            n += 1

    def to_json(self) -> dict:
        return {"family": self.family.value, "params": list(self.params)}


@lru_cache(maxsize=256)
def _recurrence_prefix(spec: RecurrenceSpec, N: int) -> Tuple[int, ...]:
    terms = []
    for value in spec.iter_terms():
        terms.append(value)
        if len(terms) > N:
            break
    return tuple(terms)


def recurrence_terms(spec: RecurrenceSpec, N: int) -> List[int]:
    if N < 0:
        raise CatalogError(f"N must be non-negative, got {N}")
    return list(_recurrence_prefix(spec, N))


# ----------------------------------------------------------------- binomial sums

def binom(a: int, b: int) -> int:
    """Binomial coefficient, zero whenever b < 0 or a < b (including a < 0)."""
    if b < 0 or a < b or a < 0:
        return 0
    return comb(a, b)


def multinomial(n: int, parts: Sequence[int]) -> int:
    if any(p < 0 for p in parts):
        raise CatalogError(f"negative part in {tuple(parts)}")
    if sum(parts) != n:
        raise CatalogError(f"parts {tuple(parts)} do not sum to {n}")
    result = factorial(n)
    for p in parts:
        result //= factorial(p)
    return result


def _franel(n: int) -> int:
    return sum(binom(n, k) ** 3 for k in range(n + 1))


def _b(n: int) -> int:
    return sum(
        (-1) ** k * 3 ** (n - 3 * k) * binom(n, 3 * k) * binom(3 * k, 2 * k) * binom(2 * k, k)
        for k in range(n // 3 + 1))


def _c(n: int) -> int:
    return sum(binom(n, k) ** 2 * binom(2 * k, k) for k in range(n + 1))


def _d(n: int) -> int:
    return sum(binom(n, k) ** 2 * binom(n + k, n) for k in range(n + 1))


def _e(n: int) -> int:
    return sum(4 ** (n - 2 * k) * binom(n, 2 * k) * binom(2 * k, k) ** 2 for k in range(n // 2 + 1))


def _e_new(n: int) -> int:
    return sum(binom(n, k) * binom(2 * k, k) * binom(2 * n - 2 * k, n - k) for k in range(n + 1))


def _f(n: int) -> int:
    return sum((-1) ** k * 8 ** (n - k) * binom(n, k) * _franel(k) for k in range(n + 1))


def _delta(n: int) -> int:
    return sum(
        (-1) ** k * 3 ** (n - 3 * k) * binom(n, 3 * k) * binom(n + k, n)
        * binom(3 * k, 2 * k) * binom(2 * k, k)
        for k in range(n // 3 + 1))


def _eta(n: int) -> int:
    return sum(
        (-1) ** k * binom(n, k) ** 3 * (binom(4 * n - 5 * k - 1, 3 * n) + binom(4 * n - 5 * k, 3 * n))
        for k in range(n // 5 + 1))


def _alpha(n: int) -> int:
    return sum(binom(n, k) ** 2 * binom(2 * k, k) * binom(2 * n - 2 * k, n - k) for k in range(n + 1))


def _epsilon(n: int) -> int:
    return sum(binom(n, k) ** 2 * binom(2 * k, n) ** 2 for k in range((n + 1) // 2, n + 1))


def _zeta(n: int) -> int:
    return sum(
        binom(n, k) ** 2 * binom(n, l) * binom(k, l) * binom(k + l, n)
        for k in range(n + 1) for l in range(k + 1))


def _gamma(n: int) -> int:
    return sum(binom(n, k) ** 2 * binom(n + k, k) ** 2 for k in range(n + 1))


def _s7(n: int) -> int:
    return sum(binom(n, k) ** 2 * binom(n + k, k) * binom(2 * k, n) for k in range((n + 1) // 2, n + 1))


def _s10(n: int) -> int:
    return sum(binom(n, k) ** 4 for k in range(n + 1))


def _s18(n: int) -> int:
    return sum(
        (-1) ** k * binom(n, k) * binom(2 * k, k) * binom(2 * n - 2 * k, n - k)
        * (binom(2 * n - 3 * k - 1, n) + binom(2 * n - 3 * k, n))
        for k in range(n // 3 + 1))


def _l3(n: int) -> int:
    return sum(binom(2 * n - 2 * k, n - k) ** 2 * binom(2 * k, k) ** 2 for k in range(n + 1))


BINOMIAL_FORMULAS: Dict[str, Callable[[int], int]] = {
    "franel": _franel,
    "b_cubic": _b,
    "c_central": _c,
    "apery_b": _d,
    "e_power4": _e,
    "e_new": _e_new,
    "f_power8": _f,
    "delta_power3": _delta,
    "eta_zudilin": _eta,
    "alpha_domb": _alpha,
    "epsilon": _epsilon,
    "zeta_double": _zeta,
    "apery_a": _gamma,
    "s7": _s7,
    "s10_quartic": _s10,
    "s18": _s18,
    "legendrian_l3": _l3,
}


def formula_terms(formula_id: str, N: int) -> List[int]:
    try:
        evaluate = BINOMIAL_FORMULAS[formula_id]
    except KeyError:
        raise CatalogError(f"unknown binomial formula {formula_id!r}")
    return [evaluate(n) for n in range(N + 1)]


def binomial_terms(name: str, N: int, formula: Optional[str] = None) -> List[int]:
    """Terms u_0..u_N from the entry's binomial sum (the first registered one by default)."""
    if N < 0:
        raise CatalogError(f"N must be non-negative, got {N}")
    entry = catalog_get(name)
    formula_id = formula or entry.binomial_formulas[0]
    if formula_id not in entry.binomial_formulas:
        raise CatalogError(f"{name} has no binomial formula {formula_id!r}")
    return formula_terms(formula_id, N)


# -------------------------------------------------------------------- entries

@dataclass
class CTRepresentation:
    label: str
    text: str
    dim: int
    status: Status = Status.PROVEN
    # polynomial whose Newton polytope is inspected when it differs from the
    # representation itself (F is a substitution image of a smaller polygon)
    polytope_text: Optional[str] = None
    polytope_asserted: bool = False

    @cached_property
    def poly(self) -> LaurentPoly:
        return poly_parse(self.text, self.dim, term_cap=CATALOG_TERM_CAP)

    @cached_property
    def polytope_poly(self) -> LaurentPoly:
        if not self.polytope_text:
            return self.poly
        return poly_parse(self.polytope_text, self.dim, term_cap=CATALOG_TERM_CAP)

    def to_json(self) -> dict:
        data = {
            "label": self.label,
            "text": self.text,
            "status": self.status.value,
            "poly": self.poly.to_json(),
            "polytope_asserted": self.polytope_asserted,
        }
        if self.polytope_text:
            data["polytope_text"] = self.polytope_text
        return data


@dataclass
class SequenceEntry:
    name: str
    title: str
    recurrence: RecurrenceSpec
    binomial_formulas: Tuple[str, ...]
    representations: List[CTRepresentation]
    expected_gauss_order: int
    gauss_order_status: Status
    polytope_origin_only: bool = True
    sporadic: bool = True

    @property
    def ct_polys(self) -> List[LaurentPoly]:
        return [r.poly for r in self.representations]

    @property
    def dims(self) -> List[int]:
        return sorted({r.dim for r in self.representations})

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "title": self.title,
            "recurrence": self.recurrence.to_json(),
            "binomial_formulas": list(self.binomial_formulas),
            "representations": [r.to_json() for r in self.representations],
            "expected_gauss_order": self.expected_gauss_order,
            "gauss_order_status": self.gauss_order_status.value,
            "polytope_origin_only": self.polytope_origin_only,
            "sporadic": self.sporadic,
        }


def _zagier(*params) -> RecurrenceSpec:
    return RecurrenceSpec(RecurrenceFamily.ZAGIER2, params)


def _az(*params) -> RecurrenceSpec:
    return RecurrenceSpec(RecurrenceFamily.AZ3, params)


def _cooper(*params) -> RecurrenceSpec:
    return RecurrenceSpec(RecurrenceFamily.COOPER3, params)


def _rep2(label, text, **kwargs) -> CTRepresentation:
    return CTRepresentation(label, text, 2, **kwargs)


def _rep3(label, text, **kwargs) -> CTRepresentation:
    return CTRepresentation(label, text, 3, **kwargs)


_PROVEN, _EMPIRICAL, _EXPECTED = Status.PROVEN, Status.EMPIRICAL, Status.EXPECTED

_ENTRIES: Tuple[SequenceEntry, ...] = (
    SequenceEntry(
        "A", "Franel numbers", _zagier(7, -8, 2), ("franel",),
        [_rep2("A", "(x+1)*(y+1)*(x+y)*x^-1*y^-1", polytope_asserted=True)],
        3, _PROVEN),
    SequenceEntry(
        "B", "Zagier B", _zagier(9, 27, 3), ("b_cubic",),
        [_rep2("B", "(x+y+1)*(x^2+y^2-x*y-x-y+1)*(-x*y)^-1", polytope_asserted=True),
         _rep2("B-zagier", "(x^3+y^3+1-3*x*y)*(-x*y)^-1")],
        2, _PROVEN),
    SequenceEntry(
        "C", "Franel-like C", _zagier(10, 9, 3), ("c_central",),
        [_rep2("C", "(x+y+1)*(x*y+x+y)*x^-1*y^-1", polytope_asserted=True),
         _rep3("C-symmetric", "(x+y+z)*(x^-1+y^-1+z^-1)")],
        3, _PROVEN),
    SequenceEntry(
        "D", "Apéry numbers for zeta(2)", _zagier(11, -1, 3), ("apery_b",),
        [_rep2("D", "(x+1)*(y+1)*(x+y+1)*x^-1*y^-1", polytope_asserted=True)],
        3, _PROVEN),
    SequenceEntry(
        "E", "Zagier E", _zagier(12, 32, 4), ("e_power4", "e_new"),
        [_rep2("E", "(x*y+x+y-1)*(x*y-x-y-1)*(-x*y)^-1", polytope_asserted=True)],
        3, _EXPECTED),
    SequenceEntry(
        "F", "Zagier F", _zagier(17, 72, 6), ("f_power8",),
        [_rep2("F", "(-x+y+1)*(x-y+1)*(x+y-1)*(x+y+1)*(x^2+y^2+1)*x^-2*y^-2",
               polytope_text="(x+y+1)*(x^2+y^2-2*x*y-2*x-2*y+1)*(-x*y)^-1",
               polytope_asserted=True),
         _rep2("F-zagier", "(x^2*y+y^2*x+x^2+y^2+x+y-6*x*y)*(-x*y)^-1")],
        2, _EXPECTED),
    SequenceEntry(
        "delta", "Almkvist-Zudilin numbers", _az(7, 3, 81), ("delta_power3",),
        [_rep3("delta-1", "(y-z+1)*(-x+y+z)*(x+z+1)*(x+y-1)*(x*y*z)^-1", polytope_asserted=True),
         _rep3("delta-2", "(x*y+y*z+z*x)*(x^2+y^2+z^2-x*y-y*z-z*x+x+y+z+1)*(x*y*z)^-1")],
        3, _EXPECTED),
    SequenceEntry(
        "eta", "Zudilin eta", _az(11, 5, 125), ("eta_zudilin",),
        [_rep3("eta", "(z*x+x*y-y*z-x-1)*(x*y+y*z-z*x-y-1)*(y*z+z*x-x*y-z-1)*(x*y*z)^-1",
               polytope_asserted=True)],
        3, _EXPECTED, polytope_origin_only=False),
    SequenceEntry(
        "alpha", "Domb numbers", _az(10, 4, 64), ("alpha_domb",),
        [_rep3("alpha-1", "(-x-y-z+1)*(x-y)*(x-y+z+1)*(x+y-z+1)*(x*y*z)^-1", polytope_asserted=True),
         _rep3("alpha-2", "(x+y+z+1)*(x*y*z+x*y+y*z+z*x)*(x*y*z)^-1"),
         CTRepresentation("alpha-symmetric", "(x+y+z+w)*(x^-1+y^-1+z^-1+w^-1)", 4)],
        3, _PROVEN),
    SequenceEntry(
        "epsilon", "Almkvist-Zudilin epsilon", _az(12, 4, 16), ("epsilon",),
        [_rep3("epsilon", "(x+1)*(y+1)*(z+1)*(x+y+z+1)*(x*y*z)^-1", polytope_asserted=True)],
        3, _PROVEN),
    SequenceEntry(
        "zeta", "Almkvist-Zudilin zeta", _az(9, 3, -27), ("zeta_double",),
        [_rep3("zeta", "(x+y+z)*(x+y+z+x*y+y*z+z*x+x*y*z)*(x*y*z)^-1", polytope_asserted=True)],
        3, _PROVEN),
    SequenceEntry(
        "gamma", "Apéry numbers for zeta(3)", _az(17, 5, 1), ("apery_a",),
        [_rep3("gamma", "(y+z)*(x+1)*(x+y+1)*(x+y+z)*(x*y*z)^-1", polytope_asserted=True),
         _rep3("gamma-symmetric",
               "(x+y+z+1)*(x^2*y+x*y^2+y^2*z+y*z^2+z^2*x+z*x^2+x*y+y*z+z*x+2*x*y*z)*(x*y*z)^-1",
               status=_EMPIRICAL)],
        3, _PROVEN),
    SequenceEntry(
        "s7", "Cooper s7", _cooper(13, 4, -27, 3), ("s7",),
        [_rep3("s7", "(x-1)*(y+1)*(x+z)*(y-x-z+1)*(x*y*z)^-1", polytope_asserted=True)],
        3, _PROVEN),
    SequenceEntry(
        "s10", "Cooper s10", _cooper(6, 2, -64, 4), ("s10_quartic",),
        [_rep3("s10", "(x+1)*(y+1)*(z+1)*(x*y*z+1)*(x*y*z)^-1", polytope_asserted=True)],
        3, _PROVEN),
    SequenceEntry(
        "s18", "Cooper s18", _cooper(14, 6, 192, -12), ("s18",),
        [_rep3("s18", "(x^2+y^2+z^2-x*y-y*z-z*x-x+y-z)*(x^2+y^2+z^2+x*y+y*z-z*x+x+y+z)*(-x*y*z)^-1",
               polytope_asserted=True),
         _rep3("s18-symmetric",
               "(x*y+y*z+z*x+x+y+z)*(x^2+y^2+z^2-x*y-y*z-z*x-x-y-z+1)*(-x*y*z)^-1",
               status=_EMPIRICAL)],
        3, _PROVEN),
    SequenceEntry(
        "apery_a", "Apéry a_n (diagonal form)", _az(17, 5, 1), ("apery_a",),
        [_rep3("apery_a", "(x+y)*(z+1)*(x+y+z)*(y+z+1)*(x*y*z)^-1", polytope_asserted=True)],
        3, _PROVEN, sporadic=False),
    SequenceEntry(
        "apery_b", "Apéry b_n (diagonal form)", _zagier(11, -1, 3), ("apery_b",),
        [_rep2("apery_b", "(x+1)*(y+1)*(x+y+1)*x^-1*y^-1", polytope_asserted=True)],
        3, _PROVEN, sporadic=False),
    SequenceEntry(
        "L3", "Legendrian L3", _az(16, 8, 256), ("legendrian_l3",),
        [_rep3("L3", "(-x+y+z+1)*(x-y+z+1)*(x+y-z+1)*(x+y+z-1)*(x*y*z)^-1", polytope_asserted=True)],
        1, _EXPECTED, sporadic=False),
)

_REGISTRY: Dict[str, SequenceEntry] = {entry.name: entry for entry in _ENTRIES}


def catalog_get(name: str) -> SequenceEntry:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownSequenceError(name) from None


def catalog_entries() -> List[SequenceEntry]:
    return list(_ENTRIES)


def catalog_list() -> List[str]:
    return [entry.name for entry in _ENTRIES]


def sporadic_names() -> List[str]:
    return [entry.name for entry in _ENTRIES if entry.sporadic]


def catalog_export() -> dict:
    return {"sequences": [entry.to_json() for entry in _ENTRIES]}


def catalog_checksum() -> str:
    payload = json.dumps(catalog_export(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ------------------------------------------------------------ known diagonals

@dataclass(frozen=True)
class DiagonalRepresentation:
    """Either a rational function 1/denominator or a MacMahon matrix."""
    label: str
    sequence: str
    dim: int
    denominator: Optional[str] = None
    matrix: Optional[Tuple[Tuple[int, ...], ...]] = None

    def denominator_poly(self) -> LaurentPoly:
        if self.matrix is not None:
            return macmahon_denominator(self.matrix)
        return poly_parse(self.denominator, self.dim)


KNOWN_DIAGONALS: Tuple[DiagonalRepresentation, ...] = (
    DiagonalRepresentation("straub-gamma", "gamma", 4,
                           denominator="(1-x1-x2)*(1-x3-x4)-x1*x2*x3*x4"),
    DiagonalRepresentation("straub-d", "D", 3, denominator="(1-x1-x2)*(1-x3)-x1*x2*x3"),
    DiagonalRepresentation("straub-franel", "A", 3, denominator="(1-x1)*(1-x2)*(1-x3)-x1*x2*x3"),
    DiagonalRepresentation("straub-franel-cubic", "A", 3, denominator="1-x1-x2-x3+4*x1*x2*x3"),
    DiagonalRepresentation("straub-delta", "delta", 4,
                           denominator="1-(x1+x2+x3-x4)-27*x1*x2*x3*x4"),
    DiagonalRepresentation("straub-s10", "s10", 4,
                           denominator="(1-x1)*(1-x2)*(1-x3)*(1-x4)-x1*x2*x3*x4"),
    DiagonalRepresentation("kauers-zeilberger-epsilon", "epsilon", 4,
                           denominator="1-(x1+x2+x3+x4)+2*(x1*x2*x3+x1*x2*x4+x1*x3*x4+x2*x3*x4)+4*x1*x2*x3*x4"),
    DiagonalRepresentation("coserea-s7", "s7", 4,
                           denominator="1-(x4*(x1*x2+x2*x3+x3*x1)+x1*x2+x1*x3+x2+x3)"),
    DiagonalRepresentation("coserea-b", "B", 3, denominator="1+x1^3+x2^3+x3^3-3*x1*x2*x3"),
    DiagonalRepresentation("macmahon-gamma", "gamma", 4,
                           matrix=((1, 1, 1, 0), (1, 1, 0, 0), (0, 0, 1, 1), (0, 1, 1, 1))),
    DiagonalRepresentation("macmahon-d", "D", 3, matrix=((1, 1, 0), (1, 1, 1), (1, 0, 1))),
    DiagonalRepresentation("macmahon-franel-cycle", "A", 3, matrix=((1, 1, 0), (0, 1, 1), (1, 0, 1))),
    DiagonalRepresentation("macmahon-franel-signed", "A", 3, matrix=((1, 1, 1), (1, 1, -1), (1, -1, 1))),
    DiagonalRepresentation("macmahon-franel-derangement", "A", 3, matrix=((0, 1, 1), (1, 0, 1), (1, 1, 0))),
    DiagonalRepresentation("macmahon-franel-triangular", "A", 3,
                           matrix=((-1, 1, 1), (-1, -1, 1), (-1, -1, -1))),
    DiagonalRepresentation("macmahon-delta", "delta", 4,
                           matrix=((0, 1, -1, 1), (-1, 1, 1, 0), (1, 0, 1, 1), (1, 1, 0, -1))),
)
