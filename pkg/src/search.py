"""Bounded search for good Laurent polynomials matching target sequences.

A good polynomial is a product of factors with coefficients in {-1, 0, 1}. The
search enumerates sign-normalised factor multisets over a fixed support,
divides by a power of x_1...x_d, removes symmetric duplicates, and compares
constant-term prefixes against the targets.
"""

import asyncio
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import aiofiles
from pydantic import BaseModel, Field, field_validator, model_validator
from tqdm import tqdm

from .catalog import catalog_get, recurrence_terms
from .config import get_settings
from .laurent import LaurentPoly, MonomialMap, iter_powers, monomial_substitute, poly_mul, poly_parse

CanonicalKey = Tuple[Tuple[Tuple[int, ...], int], ...]


class SearchError(ValueError):
    pass


class SearchSpaceTooLarge(SearchError):
    def __init__(self, estimate: int, cap: int):
        super().__init__(f"search space of about {estimate} candidates exceeds the cap of {cap}")
        self.estimate = estimate
        self.cap = cap


def _log(message: str):
    if get_settings().verbose:
        print(f"[SEARCH] {message}", file=sys.stderr)


# ---------------------------------------------------------------- symmetry

@lru_cache(maxsize=8)
def symmetry_group(dim: int) -> Tuple[MonomialMap, ...]:
    """Variable permutations combined with coordinate inversions."""
    maps = []
    for perm in itertools.permutations(range(dim)):
        for signs in itertools.product((1, -1), repeat=dim):
            maps.append(MonomialMap.signed_permutation(perm, signs))
    return tuple(maps)


def canonical_representative(a: LaurentPoly, group: Optional[Sequence[MonomialMap]] = None) -> LaurentPoly:
    group = symmetry_group(a.dim) if group is None else group
    return min((monomial_substitute(a, g) for g in group), key=LaurentPoly.canonical_key)


def canonical_form(a: LaurentPoly, group: Optional[Sequence[MonomialMap]] = None) -> CanonicalKey:
    return canonical_representative(a, group).canonical_key()


# ------------------------------------------------------------------ config

class SearchConfig(BaseModel):
    dim: int = Field(2, description="Number of variables (2 or 3)")
    min_factors: int = Field(1, description="Smallest number of factors in a product")
    max_factors: int = Field(3, description="Largest number of factors in a product")
    factor_support: List[Tuple[int, ...]] = Field(default_factory=list, description="Exponent vectors a factor may use")
    coefficient_set: Tuple[int, ...] = Field((-1, 0, 1), description="Allowed factor coefficients")
    denominator_power: int = Field(1, description="Exponent e of the denominator (x_1...x_d)^e")
    prefix_len: int = Field(8, description="Match depth N: CT(f^0..f^N) must equal the target")
    targets: Dict[str, List[int]] = Field(default_factory=dict, description="Target name to sequence prefix")
    max_candidates: Optional[int] = Field(None, description="Refuse spaces estimated above this size")
    max_evaluations: Optional[int] = Field(None, description="Stop after evaluating this many candidates")

    @field_validator("dim")
    @classmethod
    def _check_dim(cls, v: int) -> int:
        if v not in (2, 3):
            raise ValueError("search runs in 2 or 3 variables")
        return v

    @field_validator("coefficient_set")
    @classmethod
    def _check_coefficients(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if set(v) != {-1, 0, 1}:
            raise ValueError("good polynomials use exactly the coefficients -1, 0, 1")
        return (-1, 0, 1)

    @field_validator("prefix_len")
    @classmethod
    def _check_prefix(cls, v: int) -> int:
        if v < 4:
            raise ValueError("prefix_len must be at least 4; shorter prefixes over-match")
        return v

    @model_validator(mode="after")
    def _check_shapes(self) -> "SearchConfig":
        if not 0 <= self.min_factors <= self.max_factors:
            raise ValueError("need 0 <= min_factors <= max_factors")
        for e in self.factor_support:
            if len(e) != self.dim:
                raise ValueError(f"support vector {e} does not have {self.dim} entries")
        for name, prefix in self.targets.items():
            if len(prefix) < self.prefix_len + 3:
                raise ValueError(f"target {name} needs at least {self.prefix_len + 3} terms for re-verification")
        return self

    def echo(self) -> dict:
        data = self.model_dump()
        data["targets"] = {k: [str(v) for v in p] for k, p in self.targets.items()}
        data["factor_support"] = [list(e) for e in self.factor_support]
        data["coefficient_set"] = list(self.coefficient_set)
        return data


def linear_support(dim: int) -> List[Tuple[int, ...]]:
    return [(0,) * dim] + [tuple(int(i == j) for j in range(dim)) for i in range(dim)]


def quadratic_support(dim: int) -> List[Tuple[int, ...]]:
    return sorted(e for e in itertools.product(range(3), repeat=dim) if sum(e) <= 2)


def pairwise_support(dim: int) -> List[Tuple[int, ...]]:
    """1, x_i and x_i x_j: the shape of the eta factors."""
    pairs = [tuple(int(k in (i, j)) for k in range(dim)) for i, j in itertools.combinations(range(dim), 2)]
    return linear_support(dim) + pairs


# preset -> (support builder, default max_factors per dim, denominator power)
SUPPORT_PRESETS = {
    "linear": (linear_support, {2: 3, 3: 4}, 1),
    "quadratic": (quadratic_support, {2: 2, 3: 2}, 1),
    # eta's factors: the full product space is far above the default cap,
    # so this preset documents the question rather than answering it
    "eta": (pairwise_support, {2: 3, 3: 3}, 1),
}


def target_prefixes(names: Sequence[str], prefix_len: int) -> Dict[str, List[int]]:
    return {name: recurrence_terms(catalog_get(name).recurrence, prefix_len + 2) for name in names}


def preset_config(preset: str, dim: int, targets: Sequence[str], max_factors: Optional[int] = None,
                  prefix_len: Optional[int] = None, **overrides) -> SearchConfig:
    try:
        build, factor_defaults, denominator = SUPPORT_PRESETS[preset]
    except KeyError:
        raise SearchError(f"unknown support preset {preset!r}; choose from {sorted(SUPPORT_PRESETS)}")
    settings = get_settings()
    if prefix_len is None:
        prefix_len = settings.prefix_2var if dim == 2 else settings.prefix_3var
    return SearchConfig(
        dim=dim,
        max_factors=max_factors if max_factors is not None else factor_defaults[dim],
        factor_support=build(dim),
        denominator_power=overrides.pop("denominator_power", denominator),
        prefix_len=prefix_len,
        targets=target_prefixes(targets, prefix_len),
        **overrides,
    )


# ------------------------------------------------------------- enumeration

@lru_cache(maxsize=16)
def _factor_table(dim: int, support: Tuple[Tuple[int, ...], ...]) -> Tuple[LaurentPoly, ...]:
    """Non-monomial factors over the support whose leading coefficient is +1."""
    points = sorted(set(support))
    factors = []
    for coeffs in itertools.product((0, 1, -1), repeat=len(points)):
        nonzero = [c for c in coeffs if c]
        if len(nonzero) < 2 or nonzero[0] != 1:
            continue
        factors.append(LaurentPoly(dim, {e: c for e, c in zip(points, coeffs) if c}))
    return tuple(sorted(factors, key=LaurentPoly.canonical_key))


def factor_table(config: SearchConfig) -> Tuple[LaurentPoly, ...]:
    return _factor_table(config.dim, tuple(sorted(set(config.factor_support))))


def estimate_space(config: SearchConfig) -> int:
    f = len(factor_table(config))
    if f == 0:
        return 2 if config.min_factors == 0 else 0
    multisets = sum(comb(f + k - 1, k) for k in range(config.min_factors, config.max_factors + 1))
    return 2 * multisets


def _assemble(config: SearchConfig, factors: Sequence[LaurentPoly], sign: int) -> LaurentPoly:
    product = LaurentPoly.monomial((-config.denominator_power,) * config.dim, sign)
    for factor in factors:
        product = poly_mul(product, factor)
    return product


@dataclass
class _Pending:
    poly: LaurentPoly
    factor_indices: Tuple[int, ...]
    sign: int
    key: CanonicalKey


def _iter_classes(config: SearchConfig) -> Iterator[_Pending]:
    cap = config.max_candidates if config.max_candidates is not None else get_settings().search_max_candidates
    estimate = estimate_space(config)
    if estimate > cap:
        raise SearchSpaceTooLarge(estimate, cap)
    table = factor_table(config)
    seen = set()
    for k in range(config.min_factors, config.max_factors + 1):
        for indices in itertools.combinations_with_replacement(range(len(table)), k):
            for sign in (1, -1):
                poly = _assemble(config, [table[i] for i in indices], sign)
                if poly.is_zero():
                    continue
                key = canonical_form(poly)
                if key in seen:
                    continue
                seen.add(key)
                yield _Pending(poly, indices, sign, key)


def enumerate_candidates(config: SearchConfig) -> Iterator[LaurentPoly]:
    for pending in _iter_classes(config):
        yield pending.poly


# ----------------------------------------------------------------- matching

@dataclass
class Candidate:
    poly: LaurentPoly
    factors: List[LaurentPoly]
    sign: int
    denominator_power: int
    matched_target: str
    prefix: List[int]
    canonical_key: CanonicalKey

    @property
    def canonical_text(self) -> str:
        return LaurentPoly(self.poly.dim, dict(self.canonical_key)).to_text()

    def to_json(self) -> dict:
        return {
            "poly": self.poly.to_text(),
            "poly_json": self.poly.to_json(),
            "factors": [f.to_text() for f in self.factors],
            "sign": self.sign,
            "denominator_power": self.denominator_power,
            "matched_target": self.matched_target,
            "prefix": [str(v) for v in self.prefix],
            "canonical_key": self.canonical_text,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Candidate":
        poly = LaurentPoly.from_json(data["poly_json"])
        return cls(
            poly=poly,
            factors=[poly_parse(text, poly.dim) for text in data["factors"]],
            sign=int(data["sign"]),
            denominator_power=int(data["denominator_power"]),
            matched_target=data["matched_target"],
            prefix=[int(v) for v in data["prefix"]],
            canonical_key=canonical_form(poly),
        )


def match_prefix(poly: LaurentPoly, targets: Dict[str, List[int]], prefix_len: int) -> List[Tuple[str, List[int]]]:
    """Targets whose first prefix_len+3 terms equal CT(poly^i), stopping at the first miss."""
    values = []
    alive = dict(targets)
    for i, power in iter_powers(poly):
        value = power.constant_term()
        values.append(value)
        alive = {name: t for name, t in alive.items() if t[i] == value}
        if not alive:
            return []
        if i == prefix_len + 2:
            break
    return [(name, list(values)) for name in sorted(alive)]


def evaluate_shard(config_json: str, shard: List[_Pending]) -> List[Candidate]:
    config = SearchConfig.model_validate_json(config_json)
    table = factor_table(config)
    found = []
    for pending in shard:
        for name, values in match_prefix(pending.poly, config.targets, config.prefix_len):
            found.append(Candidate(
                poly=pending.poly,
                factors=[table[i] for i in pending.factor_indices],
                sign=pending.sign,
                denominator_power=config.denominator_power,
                matched_target=name,
                prefix=values,
                canonical_key=pending.key,
            ))
    return found


@dataclass
class SearchResult:
    candidates: List[Candidate] = field(default_factory=list)
    evaluated: int = 0
    estimate: int = 0
    partial: bool = False
    shards_completed: int = 0
    resumed_from: int = -1

    def to_json(self, config: SearchConfig) -> dict:
        return {
            "config": config.echo(),
            "estimate": self.estimate,
            "evaluated": self.evaluated,
            "partial": self.partial,
            "shards_completed": self.shards_completed,
            "matches": [c.to_json() for c in self.candidates],
        }


def _shards(stream: Iterator[_Pending], size: int) -> Iterator[List[_Pending]]:
    while True:
        shard = list(itertools.islice(stream, size))
        if not shard:
            return
        yield shard


async def _read_checkpoint(path: Optional[str]) -> int:
    if not path or not Path(path).exists():
        return -1
    async with aiofiles.open(path, "r") as f:
        text = (await f.read()).strip()
    return int(text) if text else -1


async def _write_checkpoint(path: Optional[str], shard_id: int):
    if path:
        async with aiofiles.open(path, "w") as f:
            await f.write(f"{shard_id}\n")


async def _append_matches(path: Optional[str], candidates: List[Candidate]):
    if not path or not candidates:
        return
    async with aiofiles.open(path, "a") as f:
        for candidate in candidates:
            await f.write(json.dumps(candidate.to_json(), sort_keys=True) + "\n")


async def _load_matches(path: Optional[str]) -> List[Candidate]:
    if not path or not Path(path).exists():
        return []
    async with aiofiles.open(path, "r") as f:
        lines = (await f.read()).splitlines()
    return [Candidate.from_json(json.loads(line)) for line in lines if line.strip()]


async def run_search(config: SearchConfig, workers: Optional[int] = None, shard_size: Optional[int] = None,
                     checkpoint_path: Optional[str] = None, output_path: Optional[str] = None,
                     progress: Optional[bool] = None) -> SearchResult:
    settings = get_settings()
    workers = workers or settings.search_workers
    shard_size = shard_size or settings.search_shard_size
    progress = settings.progress if progress is None else progress
    budget = config.max_evaluations if config.max_evaluations is not None else settings.search_max_evaluations

    result = SearchResult(estimate=estimate_space(config))
    if not config.targets:
        raise SearchError("no targets to match")
    result.resumed_from = await _read_checkpoint(checkpoint_path)
    _log(f"Estimated space: {result.estimate} candidates, {len(config.targets)} targets")
    if result.resumed_from >= 0:
        result.candidates = await _load_matches(output_path)
        _log(f"Resuming after shard {result.resumed_from}")
        _log(f"Reloaded {len(result.candidates)} earlier match(es)")

    loop = asyncio.get_running_loop()
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    config_json = config.model_dump_json()
    window = max(1, 2 * workers)
    bar = tqdm(total=result.estimate, unit="cand", file=sys.stderr, disable=not progress)
    try:
        stream = _iter_classes(config)
        shard_iter = enumerate(_shards(stream, shard_size))
        exhausted = False
        truncated = -1
        while not exhausted:
            batch = []
            for shard_id, shard in shard_iter:
                if budget is not None and result.evaluated + len(shard) > budget:
                    shard = shard[:max(0, budget - result.evaluated)]
                    truncated = shard_id
                    result.partial = True
                    exhausted = True
                if shard_id > result.resumed_from and shard:
                    batch.append((shard_id, shard))
                result.evaluated += len(shard)
                bar.update(len(shard))
                if exhausted or len(batch) >= window:
                    break
            else:
                exhausted = True
            futures = [loop.run_in_executor(executor, evaluate_shard, config_json, shard) for _, shard in batch]
            for (shard_id, _), found in zip(batch, await asyncio.gather(*futures)):
                result.candidates.extend(found)
                result.shards_completed += 1
                await _append_matches(output_path, found)
                if shard_id != truncated:
                    await _write_checkpoint(checkpoint_path, shard_id)
                if found:
                    _log(f"✓ Shard {shard_id}: {len(found)} match(es)")
    finally:
        bar.close()
        if executor is not None:
            executor.shutdown()

    unique = {(c.canonical_key, c.matched_target): c for c in result.candidates}
    result.candidates = [unique[key] for key in sorted(unique)]
    if result.partial:
        _log(f"✗ Evaluation budget of {budget} reached; results are partial")
    _log(f"Evaluated {result.evaluated} candidates, {len(result.candidates)} match(es)")
    return result


def search_matches(config: SearchConfig, **kwargs) -> SearchResult:
    return asyncio.run(run_search(config, **kwargs))
