"""Constrained tuple sets behind the power-free formulas for B, F and delta.

Each set is a stack of rows, every row a composition of n into three parts.
Rows are combined by a dynamic program over the running column sums, so the
nine to fifteen dimensional sums stay cheap; ``iter_index_set`` enumerates the
same tuples directly for small n.
"""

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Tuple

from .catalog import CatalogError, InexactDivisionError, catalog_get, multinomial, recurrence_terms

Row = Tuple[int, int, int]


@dataclass(frozen=True)
class RowRule:
    name: str
    # contribution of the row to each tracked linear form
    contribute: Callable[[Row], Tuple[int, ...]]
    # exponent of -1 carried by the row
    sign: Callable[[Row], int] = lambda row: 0


@dataclass(frozen=True)
class IndexSet:
    name: str
    rows: Tuple[RowRule, ...]
    # accept(n, totals) decides membership from the summed contributions
    accept: Callable[[int, Tuple[int, ...]], bool]
    reduce_mod: Tuple[int, ...] = ()


def compositions(n: int) -> Iterator[Row]:
    for first in range(n + 1):
        for second in range(n - first + 1):
            yield first, second, n - first - second


S_SET = IndexSet(
    "S",
    (
        RowRule("a", lambda r: (r[0], r[1], 0)),
        RowRule("b", lambda r: (r[0], r[1], r[1] + 2 * r[2])),
        RowRule("c", lambda r: (r[0], r[1], 2 * r[1] + r[2])),
    ),
    accept=lambda n, t: t[0] == n and t[1] == n and t[2] % 3 == 0,
    reduce_mod=(0, 0, 3),
)

T_SET = IndexSet(
    "T",
    (
        RowRule("a", lambda r: (r[0], r[1]), sign=lambda r: r[0]),
        RowRule("b", lambda r: (r[0], r[1]), sign=lambda r: r[1]),
        RowRule("c", lambda r: (r[0], r[1]), sign=lambda r: r[2]),
        RowRule("d", lambda r: (r[0], r[1])),
        RowRule("e", lambda r: (2 * r[0], 2 * r[1])),
    ),
    accept=lambda n, t: t == (2 * n, 2 * n),
)

U_SET = IndexSet(
    "U",
    (
        RowRule("a", lambda r: (0, r[0], r[1]), sign=lambda r: r[1]),
        RowRule("b", lambda r: (r[0], r[1], r[2]), sign=lambda r: r[0]),
        RowRule("c", lambda r: (r[0], 0, r[1])),
        RowRule("d", lambda r: (r[0], r[1], 0), sign=lambda r: r[2]),
    ),
    accept=lambda n, t: t == (n, n, n),
)

INDEX_SETS: Dict[str, IndexSet] = {s.name: s for s in (S_SET, T_SET, U_SET)}

_SET_FOR_SEQUENCE = {"B": "S", "F": "T", "delta": "U"}


def _get_set(name: str) -> IndexSet:
    try:
        return INDEX_SETS[name]
    except KeyError:
        raise CatalogError(f"unknown index set {name!r}; expected one of {sorted(INDEX_SETS)}")


def _reduce(state: Tuple[int, ...], moduli: Tuple[int, ...]) -> Tuple[int, ...]:
    if not moduli:
        return state
    return tuple(v % m if m else v for v, m in zip(state, moduli))


def index_set_sum(name: str, n: int) -> int:
    """Signed sum of multinomial products over the named set for parameter n."""
    index_set = _get_set(name)
    rows = list(compositions(n))
    states: Dict[Tuple[int, ...], int] = {}
    for depth, rule in enumerate(index_set.rows):
        contributions = [
            (rule.contribute(r), (-1) ** rule.sign(r) * multinomial(n, r)) for r in rows
        ]
        if depth == 0:
            for vector, weight in contributions:
                key = _reduce(vector, index_set.reduce_mod)
                states[key] = states.get(key, 0) + weight
            continue
        merged: Dict[Tuple[int, ...], int] = {}
        for state, total in states.items():
            for vector, weight in contributions:
                key = _reduce(tuple(s + v for s, v in zip(state, vector)), index_set.reduce_mod)
                merged[key] = merged.get(key, 0) + total * weight
        states = {k: v for k, v in merged.items() if v}
    return sum(total for state, total in states.items() if index_set.accept(n, state))


def iter_index_set(name: str, n: int) -> Iterator[Tuple[int, ...]]:
    """Brute-force enumeration of the flattened tuples, for small n only."""
    index_set = _get_set(name)
    rows = list(compositions(n))
    for choice in itertools.product(rows, repeat=len(index_set.rows)):
        totals = [0] * len(index_set.rows[0].contribute((0, 0, 0)))
        for rule, row in zip(index_set.rows, choice):
            for i, v in enumerate(rule.contribute(row)):
                totals[i] += v
        if index_set.accept(n, tuple(totals)):
            yield tuple(v for row in choice for v in row)


def brute_force_sum(name: str, n: int) -> int:
    index_set = _get_set(name)
    total = 0
    for flat in iter_index_set(name, n):
        term = 1
        for i, rule in enumerate(index_set.rows):
            row = flat[3 * i:3 * i + 3]
            term *= (-1) ** rule.sign(row) * multinomial(n, row)
        total += term
    return total


def prop12_value(name: str, n: int) -> int:
    if name not in _SET_FOR_SEQUENCE:
        raise CatalogError(f"no power-free formula registered for {name!r}; expected B, F or delta")
    total = index_set_sum(_SET_FOR_SEQUENCE[name], n)
    if name != "B":
        return total
    # 2 (-1)^n B_n = 3 * sum - (3n; n, n, n)
    numerator = 3 * total - multinomial(3 * n, (n, n, n))
    half, remainder = divmod(numerator, 2)
    if remainder:
        raise InexactDivisionError(f"3*S({n}) - (3n)!/(n!)^3 = {numerator} is odd")
    return half if n % 2 == 0 else -half


def prop12_terms(name: str, N: int) -> List[int]:
    if N < 0:
        raise CatalogError(f"N must be non-negative, got {N}")
    return [prop12_value(name, n) for n in range(N + 1)]


def b_companion_terms(N: int) -> List[int]:
    """2(-1)^n B_n + (3n)!/(n!)^3, which equals three times the S(n) sum."""
    values = recurrence_terms(catalog_get("B").recurrence, N)
    return [2 * (-1) ** n * b + multinomial(3 * n, (n, n, n)) for n, b in enumerate(values)]
