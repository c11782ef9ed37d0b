"""Hyperplane-defined fitness functions.

A function is a list of scored schemas over ``{0, 1, *}``. Binary vectors
score the sum of the schemas they match. Real vectors in ``[0, 1]`` score
each schema partially, weighted by how close the vector is to the schema's
fixed bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .exceptions import ConfigError, FormatError, ParseError

ANY = -1
_CHAR = {0: "0", 1: "1", ANY: "*"}
_SYM = {"0": 0, "1": 1, "*": ANY}

MATCH_FACTOR = "match-factor"
LITERAL_DIFFERENCE = "literal-difference"


@dataclass(frozen=True)
class Schema:
    pattern: tuple[int, ...]
    score: float
    order: int = 1

    def __post_init__(self):
        pattern = tuple(int(x) for x in self.pattern)
        if any(x not in (0, 1, ANY) for x in pattern):
            raise ValueError("schema symbols must be 0, 1 or ANY")
        if all(x == ANY for x in pattern):
            raise ValueError("schema needs at least one fixed position")
        object.__setattr__(self, "pattern", pattern)
        object.__setattr__(self, "score", float(self.score))

    @classmethod
    def from_string(cls, text: str, score: float, order: int = 1) -> "Schema":
        try:
            return cls(tuple(_SYM[c] for c in text), score, order)
        except KeyError as exc:
            raise ParseError(f"bad schema symbol {exc.args[0]!r}") from None

    def __str__(self):
        return "".join(_CHAR[x] for x in self.pattern)

    @property
    def fixed(self) -> list[tuple[int, int]]:
        return [(i, b) for i, b in enumerate(self.pattern) if b != ANY]

    def matches(self, vector) -> bool:
        return all(vector[i] == b for i, b in self.fixed)


@dataclass(frozen=True, eq=False)
class HdfFunction:
    beta: int
    schemas: tuple[Schema, ...]
    _mask: np.ndarray = field(init=False, repr=False)
    _bits: np.ndarray = field(init=False, repr=False)
    _scores: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        schemas = tuple(self.schemas)
        if self.beta < 1:
            raise ConfigError("beta must be positive")
        if not schemas:
            raise ConfigError("an HDF needs at least one schema")
        for s in schemas:
            if len(s.pattern) != self.beta:
                raise ConfigError(f"schema {s} has width {len(s.pattern)}, expected {self.beta}")
        pat = np.array([s.pattern for s in schemas], dtype=np.int64)
        mask = pat != ANY
        mask.setflags(write=False)
        bits = np.where(mask, pat, 0).astype(np.float64)
        bits.setflags(write=False)
        scores = np.array([s.score for s in schemas], dtype=np.float64)
        scores.setflags(write=False)
        object.__setattr__(self, "schemas", schemas)
        object.__setattr__(self, "_mask", mask)
        object.__setattr__(self, "_bits", bits)
        object.__setattr__(self, "_scores", scores)

    def __eq__(self, other):
        return isinstance(other, HdfFunction) and self.beta == other.beta and self.schemas == other.schemas

    def __hash__(self):
        return hash((self.beta, self.schemas))

    def __len__(self):
        return len(self.schemas)

    def __call__(self, vector) -> float:
        return score_real(vector, self)

    @property
    def abs_score_sum(self) -> float:
        return float(np.abs(self._scores).sum())


def example_hdf() -> HdfFunction:
    """The five-schema, width-10 function used as the default experiment HDF."""
    return HdfFunction(
        10,
        (
            Schema.from_string("*01*******", 2, 1),
            Schema.from_string("*****110**", 2, 1),
            Schema.from_string("********10", 3, 1),
            Schema.from_string("*01**110**", -4, 2),
            Schema.from_string("*01*****10", 4, 2),
        ),
    )


def _as_vector(vector, beta: int) -> np.ndarray:
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != beta:
        raise ValueError(f"vector length {v.shape} does not match beta={beta}")
    return v


def score_binary(vector, f: HdfFunction) -> float:
    """Sum of the scores of every schema whose fixed bits all equal the vector's."""
    if isinstance(vector, str):
        vector = [int(c) for c in vector]
    v = _as_vector(vector, f.beta)
    if np.any((v != 0) & (v != 1)):
        raise ValueError("score_binary expects a {0,1} vector")
    matched = np.all(~f._mask | (f._bits == v), axis=1)
    return float(f._scores[matched].sum())


def score_real(vector, f: HdfFunction, mode: str = MATCH_FACTOR) -> float:
    """Partial-credit score of a vector in ``[0, 1]^beta``.

    ``match-factor`` weights each schema by ``prod(1 - |bit - v_i|)`` over
    its fixed positions, so {0,1} vectors score exactly as in
    :func:`score_binary`. ``literal-difference`` weights by the product of
    the nonzero ``|bit - v_i|`` terms (1 when all are zero).
    """
    v = _as_vector(vector, f.beta)
    if np.any(v < 0.0) or np.any(v > 1.0) or np.any(np.isnan(v)):
        raise ValueError("score_real expects entries in [0, 1]")
    diff = np.abs(f._bits - v)
    if mode == MATCH_FACTOR:
        w = np.where(f._mask, 1.0 - diff, 1.0).prod(axis=1)
    elif mode == LITERAL_DIFFERENCE:
        w = np.where(f._mask & (diff != 0.0), diff, 1.0).prod(axis=1)
    else:
        raise ValueError(f"unknown scoring mode {mode!r}")
    return float(w @ f._scores)


def _score_rows(rows: np.ndarray, f: HdfFunction) -> np.ndarray:
    # match-factor scores for a stack of vectors; no validation
    diff = np.abs(f._bits[None, :, :] - rows[:, None, :])
    w = np.where(f._mask[None], 1.0 - diff, 1.0).prod(axis=2)
    return w @ f._scores


def build_random_hdf(beta: int, n_order1: int, n_higher: int, score_low: float,
                     score_high: float, rng, max_tries: int = 1000) -> HdfFunction:
    """Random HDF: ``n_order1`` contiguous-block schemas plus ``n_higher`` overlays.

    Each order-1 schema fixes one contiguous block of random bits whose
    length is uniform in ``[2, max(2, beta // 3)]``. Higher-order schemas
    overlay 2 or 3 distinct order-1 schemas that agree wherever they
    overlap. Scores are uniform in ``[score_low, score_high]`` and never 0.
    """
    if beta < 2:
        raise ConfigError("beta must be at least 2 to place a block")
    if n_order1 < 1 or n_higher < 0:
        raise ConfigError("need n_order1 >= 1 and n_higher >= 0")
    if not score_low < score_high:
        raise ConfigError("score_low must be below score_high")
    if n_higher and n_order1 < 2:
        raise ConfigError("higher-order schemas need at least two order-1 schemas")
    if n_higher > comb(n_order1, 2) + comb(n_order1, 3):
        raise ConfigError(f"{n_order1} order-1 schemas admit at most "
                          f"{comb(n_order1, 2) + comb(n_order1, 3)} overlays")
    rng = np.random.default_rng(rng)

    def draw_score():
        while True:
            s = float(rng.uniform(score_low, score_high))
            if s != 0.0:
                return s

    max_len = max(2, beta // 3)

    def draw_base():
        seen: set[tuple[int, ...]] = set()
        base: list[Schema] = []
        for _ in range(max_tries * n_order1):
            if len(base) == n_order1:
                break
            length = int(rng.integers(2, max_len + 1))
            start = int(rng.integers(0, beta - length + 1))
            pat = [ANY] * beta
            pat[start:start + length] = rng.integers(0, 2, size=length).tolist()
            pat = tuple(pat)
            if pat in seen:
                continue
            seen.add(pat)
            base.append(Schema(pat, draw_score(), 1))
        if len(base) < n_order1:
            raise ConfigError(f"could not place {n_order1} distinct blocks in width {beta}")
        return base, seen

    def draw_higher(base, seen):
        higher: list[Schema] = []
        for _ in range(max_tries * max(n_higher, 1)):
            if len(higher) == n_higher:
                break
            k = int(rng.integers(2, min(3, len(base)) + 1))
            parts = [base[i] for i in rng.choice(len(base), size=k, replace=False)]
            pat = [ANY] * beta
            ok = True
            for p in parts:
                for i, b in p.fixed:
                    if pat[i] not in (ANY, b):
                        ok = False
                        break
                    pat[i] = b
                if not ok:
                    break
            pat = tuple(pat)
            if not ok or pat in seen:
                continue
            seen.add(pat)
            higher.append(Schema(pat, draw_score(), k))
        return higher if len(higher) == n_higher else None

    # a base set whose blocks all conflict admits no overlay; redraw it
    for _ in range(100):
        base, seen = draw_base()
        higher = draw_higher(base, seen)
        if higher is not None:
            return HdfFunction(beta, tuple(base + higher))
    raise ConfigError("could not build the requested higher-order schemas")


def dumps_hdf(f: HdfFunction) -> str:
    return "".join(f"{s} {s.score!r} {s.order}\n" for s in f.schemas)


def loads_hdf(text: str) -> HdfFunction:
    """Parse ``<pattern> <score> [order]`` lines; ``#`` starts a comment line."""
    schemas = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) not in (2, 3):
            raise FormatError(f"line {lineno}: expected '<pattern> <score>'")
        try:
            score = float(toks[1])
            order = int(toks[2]) if len(toks) == 3 else None
        except ValueError:
            raise ParseError(f"line {lineno}: bad number") from None
        s = Schema.from_string(toks[0], score)
        if order is None:
            order = _count_blocks(s.pattern)
        schemas.append(Schema(s.pattern, score, order))
    if not schemas:
        raise FormatError("empty HDF file")
    widths = {len(s.pattern) for s in schemas}
    if len(widths) != 1:
        raise FormatError("schemas have different widths")
    return HdfFunction(widths.pop(), tuple(schemas))


def _count_blocks(pattern: Sequence[int]) -> int:
    blocks, prev = 0, ANY
    for x in pattern:
        if x != ANY and prev == ANY:
            blocks += 1
        prev = x
    return max(blocks, 1)


def load_hdf(path) -> HdfFunction:
    with open(path) as fh:
        return loads_hdf(fh.read())


def dump_hdf(f: HdfFunction, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_hdf(f))
