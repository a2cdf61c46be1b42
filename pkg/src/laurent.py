"""Sparse multivariate Laurent polynomials over the integers.

Terms live in a dict keyed by exponent tuples; the canonical (ascending
lexicographic) order is applied only when printing, serialising or comparing.
"""

from __future__ import annotations

import itertools
import operator
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import sympy

from .config import get_settings

ExponentVector = Tuple[int, ...]

VARIABLE_NAMES = ("x", "y", "z", "w")
MAX_DIM = 4


class LaurentError(ValueError):
    pass


class ParseError(LaurentError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExponentBoundError(LaurentError):
    def __init__(self, exponent: int, bound: int):
        super().__init__(f"exponent {exponent} exceeds the configured bound {bound}")
        self.exponent = exponent
        self.bound = bound


class DimensionMismatch(LaurentError):
    pass


class TermCapExceeded(LaurentError):
    def __init__(self, terms: int, cap: int):
        super().__init__(f"polynomial grew to {terms} terms, above the cap of {cap}")
        self.terms = terms
        self.cap = cap


class SingularMapError(LaurentError):
    pass


class SeriesError(LaurentError):
    pass


def _resolve_cap(term_cap: Optional[int]) -> int:
    return get_settings().term_cap if term_cap is None else term_cap


class LaurentPoly:
    __slots__ = ("dim", "_terms")

    def __init__(self, dim: int, terms: Optional[Mapping[Sequence[int], int]] = None):
        if not 1 <= dim <= MAX_DIM:
            raise LaurentError(f"variable count must be between 1 and {MAX_DIM}, got {dim}")
        clean: Dict[ExponentVector, int] = {}
        for exponent, coeff in (terms or {}).items():
            key = tuple(int(v) for v in exponent)
            if len(key) != dim:
                raise DimensionMismatch(f"exponent {key} does not have {dim} entries")
            coeff = int(coeff)
            if coeff:
                clean[key] = clean.get(key, 0) + coeff
        self.dim = dim
        self._terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def _wrap(cls, dim: int, terms: Dict[ExponentVector, int]) -> "LaurentPoly":
        poly = cls.__new__(cls)
        poly.dim = dim
        poly._terms = terms
        return poly

    @classmethod
    def constant(cls, dim: int, value: int = 1) -> "LaurentPoly":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff: int = 1) -> "LaurentPoly":
        return cls(len(exponent), {tuple(exponent): coeff})

    @classmethod
    def variable(cls, dim: int, index: int) -> "LaurentPoly":
        exponent = [0] * dim
        exponent[index] = 1
        return cls.monomial(exponent)

    @property
    def terms(self) -> Dict[ExponentVector, int]:
        return dict(self._terms)

    def items(self) -> List[Tuple[ExponentVector, int]]:
        return sorted(self._terms.items())

    def support(self) -> List[ExponentVector]:
        return sorted(self._terms)

    def coefficient(self, exponent: Sequence[int]) -> int:
        return self._terms.get(tuple(exponent), 0)

    def constant_term(self) -> int:
        return self._terms.get((0,) * self.dim, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def min_exponents(self) -> ExponentVector:
        return tuple(min(col) for col in zip(*self._terms)) if self._terms else (0,) * self.dim

    def max_exponents(self) -> ExponentVector:
        return tuple(max(col) for col in zip(*self._terms)) if self._terms else (0,) * self.dim

    def canonical_key(self) -> Tuple[Tuple[ExponentVector, int], ...]:
        return tuple(self.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self == LaurentPoly.constant(self.dim, other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.dim, self.canonical_key()))

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._wrap(self.dim, {e: -c for e, c in self._terms.items()})

    def __add__(self, other) -> "LaurentPoly":
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            value = out.get(e, 0) + c
            if value:
                out[e] = value
            else:
                out.pop(e, None)
        return LaurentPoly._wrap(self.dim, out)

    __radd__ = __add__

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        if isinstance(other, int):
            if other == 0:
                return LaurentPoly._wrap(self.dim, {})
            return LaurentPoly._wrap(self.dim, {e: c * other for e, c in self._terms.items()})
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            return invert_unit(self) ** (-n)
        return poly_pow(self, n)

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, int):
            return LaurentPoly.constant(self.dim, other)
        if not isinstance(other, LaurentPoly):
            raise TypeError(f"cannot combine LaurentPoly with {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionMismatch(f"dimensions differ: {self.dim} vs {other.dim}")
        return other

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts: List[str] = []
        for index, (exponent, coeff) in enumerate(self.items()):
            factors = []
            for name, power in zip(VARIABLE_NAMES, exponent):
                if power == 1:
                    factors.append(name)
                elif power:
                    factors.append(f"{name}^{power}")
            magnitude = abs(coeff)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = f"{magnitude}*" + "*".join(factors)
            if index == 0:
                parts.append(f"-{body}" if coeff < 0 else body)
            else:
                parts.append(f" - {body}" if coeff < 0 else f" + {body}")
        return "".join(parts)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [{"e": list(e), "c": str(c)} for e, c in self.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LaurentPoly":
        return cls(int(data["dim"]), {tuple(t["e"]): int(t["c"]) for t in data["terms"]})

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"LaurentPoly({self.dim}, {self.to_text()!r})"


def _check_dims(a: LaurentPoly, b: LaurentPoly):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")


def invert_unit(a: LaurentPoly) -> LaurentPoly:
    """Inverse of ±x^e; any other polynomial has no Laurent inverse."""
    if not a.is_monomial():
        raise LaurentError("only a single-term polynomial can be inverted")
    (exponent, coeff), = a._terms.items()
    if coeff not in (1, -1):
        raise LaurentError(f"coefficient {coeff} is not a unit")
    return LaurentPoly._wrap(a.dim, {tuple(-v for v in exponent): coeff})


# ---------------------------------------------------------------- arithmetic

def poly_mul(a: LaurentPoly, b: LaurentPoly, term_cap: Optional[int] = None) -> LaurentPoly:
    _check_dims(a, b)
    cap = _resolve_cap(term_cap)
    if len(a) < len(b):
        a, b = b, a
    out: Dict[ExponentVector, int] = {}
    get = out.get
    add = operator.add
    small = list(b._terms.items())
    for ea, ca in a._terms.items():
        for eb, cb in small:
            e = tuple(map(add, ea, eb))
            out[e] = get(e, 0) + ca * cb
        if len(out) > cap:
            raise TermCapExceeded(len(out), cap)
    return LaurentPoly._wrap(a.dim, {e: c for e, c in out.items() if c})


def poly_pow(a: LaurentPoly, n: int, method: str = "binary", term_cap: Optional[int] = None) -> LaurentPoly:
    if n < 0:
        raise LaurentError(f"power must be non-negative, got {n}")
    result = LaurentPoly.constant(a.dim)
    if method == "iterative":
        for _ in range(n):
            result = poly_mul(result, a, term_cap)
        return result
    if method != "binary":
        raise LaurentError(f"unknown powering method {method!r}")
    base = a
    while n:
        if n & 1:
            result = poly_mul(result, base, term_cap)
        n >>= 1
        if n:
            base = poly_mul(base, base, term_cap)
    return result


def constant_term(a: LaurentPoly) -> int:
    return a.constant_term()


def _prune_unreachable(power: LaurentPoly, lo: ExponentVector, hi: ExponentVector, remaining: int) -> LaurentPoly:
    kept = {
        e: c for e, c in power._terms.items()
        if all(ej + remaining * l <= 0 <= ej + remaining * h for ej, l, h in zip(e, lo, hi))
    }
    return LaurentPoly._wrap(power.dim, kept)


def iter_powers(a: LaurentPoly, term_cap: Optional[int] = None) -> Iterator[Tuple[int, LaurentPoly]]:
    """Yield (i, a^i) for i = 0, 1, 2, ... using one multiplication per step."""
    power = LaurentPoly.constant(a.dim)
    i = 0
    while True:
        yield i, power
        power = poly_mul(power, a, term_cap)
        i += 1


def ct_sequence(a: LaurentPoly, N: int, prune: Optional[bool] = None, term_cap: Optional[int] = None) -> List[int]:
    if N < 0:
        raise LaurentError(f"sequence length must be non-negative, got {N}")
    if prune is None:
        prune = get_settings().prune_unreachable
    lo, hi = a.min_exponents(), a.max_exponents()
    values = [1]
    power = LaurentPoly.constant(a.dim)
    for i in range(1, N + 1):
        power = poly_mul(power, a, term_cap)
        if prune and i < N:
            power = _prune_unreachable(power, lo, hi, N - i)
        values.append(power.constant_term())
    return values


def ct_shifted(a: LaurentPoly, n: int, shifts: Sequence[int], term_cap: Optional[int] = None) -> int:
    """CT(a^n * x^shifts), i.e. the coefficient of x^(-shifts) in a^n."""
    if n < 0:
        raise LaurentError(f"power must be non-negative, got {n}")
    if len(shifts) != a.dim:
        raise DimensionMismatch(f"shift vector {tuple(shifts)} does not have {a.dim} entries")
    return poly_pow(a, n, term_cap=term_cap).coefficient(tuple(-s for s in shifts))


def shifted_coefficient(a: LaurentPoly, n_vec: Sequence[int], term_cap: Optional[int] = None) -> int:
    """Taylor coefficient A(n) of 1/(1 - x_1...x_{d+1} a) at the exponent vector n_vec."""
    if len(n_vec) != a.dim + 1:
        raise DimensionMismatch(f"index vector needs {a.dim + 1} entries")
    top = n_vec[-1]
    if top < 0:
        return 0
    return ct_shifted(a, top, [top - v for v in n_vec[:-1]], term_cap)


# ------------------------------------------------------------- substitutions

class MapKind(Enum):
    UNIMODULAR = "unimodular"
    INJECTIVE = "injective"


@dataclass(frozen=True)
class MonomialMap:
    """Exponent map e -> M.e for an invertible integer matrix M."""
    matrix: Tuple[Tuple[int, ...], ...]
    determinant: int = field(init=False)

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if not rows or any(len(row) != len(rows) for row in rows):
            raise LaurentError("exponent map must be a square matrix")
        det = int(sympy.Matrix(rows).det())
        if det == 0:
            raise SingularMapError(f"exponent map {rows} is singular")
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "determinant", det)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def kind(self) -> MapKind:
        return MapKind.UNIMODULAR if abs(self.determinant) == 1 else MapKind.INJECTIVE

    def apply(self, exponent: Sequence[int]) -> ExponentVector:
        return tuple(sum(m * e for m, e in zip(row, exponent)) for row in self.matrix)

    @classmethod
    def identity(cls, dim: int) -> "MonomialMap":
        return cls(tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)))

    @classmethod
    def scaling(cls, factors: Sequence[int]) -> "MonomialMap":
        d = len(factors)
        return cls(tuple(tuple(factors[i] if i == j else 0 for j in range(d)) for i in range(d)))

    @classmethod
    def signed_permutation(cls, perm: Sequence[int], signs: Sequence[int]) -> "MonomialMap":
        """Coordinate perm[i] of the image is signs[i] times coordinate i of the source."""
        d = len(perm)
        rows = [[0] * d for _ in range(d)]
        for i, (target, sign) in enumerate(zip(perm, signs)):
            rows[target][i] = sign
        return cls(tuple(tuple(r) for r in rows))


class UnimodularMap(MonomialMap):
    def __post_init__(self):
        super().__post_init__()
        if abs(self.determinant) != 1:
            raise LaurentError(f"determinant {self.determinant} is not ±1")


def monomial_substitute(a: LaurentPoly, U: MonomialMap) -> LaurentPoly:
    if U.dim != a.dim:
        raise DimensionMismatch(f"map acts on {U.dim} variables, polynomial has {a.dim}")
    return LaurentPoly._wrap(a.dim, {U.apply(e): c for e, c in a._terms.items()})


def verify_ct_preserved(a: LaurentPoly, U: MonomialMap, N: int, term_cap: Optional[int] = None) -> bool:
    """Empirical check that CT(a^n) is unchanged by U for n <= N."""
    return ct_sequence(monomial_substitute(a, U), N, term_cap=term_cap) == ct_sequence(a, N, term_cap=term_cap)


def dehomogenize(a: LaurentPoly, index: int) -> LaurentPoly:
    """Set x_index = 1, dropping that variable."""
    if a.dim < 2:
        raise LaurentError("cannot drop the only variable")
    out: Dict[ExponentVector, int] = {}
    for e, c in a._terms.items():
        key = e[:index] + e[index + 1:]
        out[key] = out.get(key, 0) + c
    return LaurentPoly._wrap(a.dim - 1, {e: c for e, c in out.items() if c})


# --------------------------------------------------------- matrices, diagonals

def _linear_form(row: Sequence[int]) -> LaurentPoly:
    d = len(row)
    return LaurentPoly(d, {tuple(int(i == j) for i in range(d)): m for j, m in enumerate(row)})


def _check_square(M: Sequence[Sequence[int]]) -> int:
    d = len(M)
    if not 1 <= d <= MAX_DIM or any(len(row) != d for row in M):
        raise LaurentError(f"expected a square matrix of size at most {MAX_DIM}")
    return d


def matrix_to_ct_poly(M: Sequence[Sequence[int]]) -> LaurentPoly:
    d = _check_square(M)
    result = LaurentPoly.monomial((-1,) * d)
    for row in M:
        result = poly_mul(result, _linear_form(row))
    return result


def _permutation_sign(perm: Sequence[int]) -> int:
    inversions = sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


def macmahon_denominator(M: Sequence[Sequence[int]]) -> LaurentPoly:
    """det(I - M Diag(x_1..x_d)) expanded as a polynomial."""
    d = _check_square(M)
    entries = [
        [LaurentPoly.constant(d, int(i == j)) - LaurentPoly.monomial(
            tuple(int(k == j) for k in range(d)), M[i][j]) for j in range(d)]
        for i in range(d)
    ]
    det = LaurentPoly(d)
    for perm in itertools.permutations(range(d)):
        term = LaurentPoly.constant(d, _permutation_sign(perm))
        for i, j in enumerate(perm):
            term = poly_mul(term, entries[i][j])
            if term.is_zero():
                break
        det = det + term
    return det


def diagonal_embedding(a: LaurentPoly) -> LaurentPoly:
    """Q = x_1...x_{d+1} a as a polynomial in d+1 variables."""
    if a.dim >= MAX_DIM:
        raise LaurentError(f"embedding needs at most {MAX_DIM - 1} variables")
    terms = {}
    for e, c in a._terms.items():
        shifted = tuple(v + 1 for v in e)
        if min(shifted) < 0:
            raise SeriesError("x_1...x_d times the polynomial still has negative exponents")
        terms[shifted + (1,)] = c
    return LaurentPoly._wrap(a.dim + 1, terms)


def _mul_truncated(a: LaurentPoly, b: LaurentPoly, bound: int, term_cap: int) -> LaurentPoly:
    out: Dict[ExponentVector, int] = {}
    get = out.get
    for ea, ca in a._terms.items():
        for eb, cb in b._terms.items():
            e = tuple(map(operator.add, ea, eb))
            if max(e) <= bound:
                out[e] = get(e, 0) + ca * cb
        if len(out) > term_cap:
            raise TermCapExceeded(len(out), term_cap)
    return LaurentPoly._wrap(a.dim, {e: c for e, c in out.items() if c})


def geometric_series(Q: LaurentPoly, N: int, term_cap: Optional[int] = None) -> Dict[ExponentVector, int]:
    """Taylor coefficients of 1/(1 - Q) with every exponent at most N."""
    if N < 0:
        raise SeriesError(f"truncation order must be non-negative, got {N}")
    if any(min(e) < 0 for e in Q._terms):
        raise SeriesError("series expansion needs a polynomial without negative exponents")
    if Q.constant_term():
        raise SeriesError("Q must have constant term 0; normalise 1/(c - Q) before expanding")
    cap = _resolve_cap(term_cap)
    series: Dict[ExponentVector, int] = {(0,) * Q.dim: 1}
    power = LaurentPoly.constant(Q.dim)
    while True:
        power = _mul_truncated(power, Q, N, cap)
        if power.is_zero():
            break
        for e, c in power._terms.items():
            series[e] = series.get(e, 0) + c
    return series


def diagonal_prefix(Q: LaurentPoly, N: int, term_cap: Optional[int] = None) -> List[int]:
    series = geometric_series(Q, N, term_cap)
    return [series.get((i,) * Q.dim, 0) for i in range(N + 1)]


def rational_diagonal_prefix(denominator: LaurentPoly, N: int, term_cap: Optional[int] = None) -> List[int]:
    """Diagonal of 1/D for a polynomial D with constant term ±1."""
    ct = denominator.constant_term()
    if ct not in (1, -1):
        raise SeriesError(f"denominator constant term must be ±1, got {ct}")
    normalised = denominator * ct
    values = diagonal_prefix(LaurentPoly.constant(denominator.dim) - normalised, N, term_cap)
    return [v * ct for v in values]


# ---------------------------------------------------------------------- parser

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>x[1-4]|[xyzw])|(?P<op>[-+*^()]))")


class _Parser:
    def __init__(self, text: str, dim: int, max_exponent: int, term_cap: Optional[int] = None):
        self.text = text
        self.dim = dim
        self.max_exponent = max_exponent
        self.term_cap = term_cap
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str) -> List[Tuple[str, str, int]]:
        tokens = []
        index = 0
        while index < len(text):
            if text[index:].strip() == "":
                break
            match = _TOKEN.match(text, index)
            if not match:
                offset = index + len(text[index:]) - len(text[index:].lstrip())
                raise ParseError(f"unexpected character {text[offset]!r}", offset)
            kind = match.lastgroup
            tokens.append((kind, match.group(kind), match.start(kind)))
            index = match.end()
        tokens.append(("end", "", len(text)))
        return tokens

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> Tuple[str, str, int]:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, value: str):
        kind, text, position = self.take()
        if text != value or kind != "op":
            raise ParseError(f"expected {value!r}", position)

    def parse(self) -> LaurentPoly:
        result = self.expr()
        kind, _, position = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", position)
        return result

    def expr(self) -> LaurentPoly:
        result = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, _ = self.take()
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self) -> LaurentPoly:
        result = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            result = poly_mul(result, self.unary(), self.term_cap)
        return result

    def unary(self) -> LaurentPoly:
        kind, text, _ = self.peek()
        if kind == "op" and text in ("+", "-"):
            self.take()
            operand = self.unary()
            return -operand if text == "-" else operand
        return self.power()

    def power(self) -> LaurentPoly:
        base = self.atom()
        if self.peek()[:2] != ("op", "^"):
            return base
        self.take()
        position = self.peek()[2]
        exponent = self.signed_int()
        if abs(exponent) > self.max_exponent:
            raise ExponentBoundError(exponent, self.max_exponent)
        if exponent < 0:
            try:
                base = invert_unit(base)
            except LaurentError:
                raise ParseError("negative power of a polynomial that is not a monomial unit", position)
            exponent = -exponent
        return poly_pow(base, exponent, term_cap=self.term_cap)

    def signed_int(self) -> int:
        kind, text, position = self.take()
        if kind == "op" and text == "(":
            value = self.signed_int()
            self.expect(")")
            return value
        sign = 1
        while kind == "op" and text in ("+", "-"):
            sign = -sign if text == "-" else sign
            kind, text, position = self.take()
        if kind != "int":
            raise ParseError("expected an integer exponent", position)
        return sign * int(text)

    def atom(self) -> LaurentPoly:
        kind, text, position = self.take()
        if kind == "int":
            return LaurentPoly.constant(self.dim, int(text))
        if kind == "var":
            index = int(text[1]) - 1 if len(text) == 2 else VARIABLE_NAMES.index(text)
            if index >= self.dim:
                raise ParseError(f"variable {text} is not available with {self.dim} variables", position)
            return LaurentPoly.variable(self.dim, index)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {text!r}" if text else "unexpected end of input", position)


def poly_parse(text: str, dim: int, max_exponent: Optional[int] = None,
               term_cap: Optional[int] = None) -> LaurentPoly:
    if not 1 <= dim <= MAX_DIM:
        raise LaurentError(f"variable count must be between 1 and {MAX_DIM}, got {dim}")
    bound = get_settings().max_exponent if max_exponent is None else max_exponent
    poly = _Parser(text, dim, bound, term_cap).parse()
    for exponent in poly._terms:
        for value in exponent:
            if abs(value) > bound:
                raise ExponentBoundError(value, bound)
    return poly
