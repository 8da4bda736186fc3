"""Token sequences, position weights, and the sampling oracles.

Texts and words are sequences of interned integer symbol ids. User tokens
always intern to ids >= 1; id 0 is reserved for the internal separator
symbol used by the repeat-free rewrite and is guaranteed absent from any
ingested input. Positions are 1-based in every public interface.

Weights over positions come in two representations: exact rationals for
the ground-truth oracles and 64-bit floats for the estimator path.
Estimators never touch a text directly; they see it only through a
sampling oracle returning (position, symbol) pairs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

SENTINEL = 0

WeightLike = Union[int, float, str, Fraction]


def as_fraction(value: WeightLike) -> Fraction:
    """Convert a number to an exact Fraction.

    Floats are read through repr, so a parameter written as 0.1 means
    exactly 1/10 rather than the nearest binary double. Strings accept
    decimals ("0.25") and ratios ("1/4").
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact number")


def subseed(seed: int, stream: int) -> np.random.SeedSequence:
    """Derive an independent child seed for one stage of a pipeline."""
    return np.random.SeedSequence(entropy=(int(seed), int(stream)))


class Alphabet:
    """Interns user tokens to dense integer ids starting at 1."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._tokens: list[str] = []

    def intern(self, token: str) -> int:
        sym = self._ids.get(token)
        if sym is None:
            sym = len(self._tokens) + 1
            self._ids[token] = sym
            self._tokens.append(token)
        return sym

    def intern_all(self, tokens: Iterable[str]) -> np.ndarray:
        return np.fromiter((self.intern(t) for t in tokens), dtype=np.int32)

    def token(self, symbol: int) -> str:
        if symbol == SENTINEL:
            return "<sep>"
        return self._tokens[symbol - 1]

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids


def _as_symbol_array(symbols) -> np.ndarray:
    arr = np.asarray(symbols, dtype=np.int32)
    if arr.ndim != 1:
        raise ValueError("symbol sequence must be one-dimensional")
    if arr.size and int(arr.min()) < 0:
        raise ValueError("symbol ids must be non-negative")
    return arr


class Text:
    """Immutable symbol sequence of length n (n = 0 allowed)."""

    __slots__ = ("ids", "alphabet")

    def __init__(self, symbols, alphabet: Optional[Alphabet] = None) -> None:
        self.ids = _as_symbol_array(symbols)
        self.ids.flags.writeable = False
        self.alphabet = alphabet

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], alphabet: Optional[Alphabet] = None) -> "Text":
        alphabet = alphabet if alphabet is not None else Alphabet()
        return cls(alphabet.intern_all(tokens), alphabet)

    @property
    def n(self) -> int:
        return int(self.ids.size)

    def symbol(self, position: int) -> int:
        if not 1 <= position <= self.n:
            raise IndexError(f"position {position} outside [1, {self.n}]")
        return int(self.ids[position - 1])

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Text(n={self.n})"


class Word:
    """Immutable pattern of length k >= 1 whose copies are searched for."""

    __slots__ = ("ids", "alphabet")

    def __init__(self, symbols, alphabet: Optional[Alphabet] = None) -> None:
        self.ids = _as_symbol_array(symbols)
        if self.ids.size == 0:
            raise ValueError("a word needs at least one symbol")
        self.ids.flags.writeable = False
        self.alphabet = alphabet

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], alphabet: Optional[Alphabet] = None) -> "Word":
        alphabet = alphabet if alphabet is not None else Alphabet()
        return cls(alphabet.intern_all(tokens), alphabet)

    @property
    def k(self) -> int:
        return int(self.ids.size)

    @property
    def distinct_count(self) -> int:
        return int(np.unique(self.ids).size)

    @property
    def has_adjacent_repeat(self) -> bool:
        """True when some symbol immediately repeats itself."""
        return bool(self.k > 1 and np.any(self.ids[1:] == self.ids[:-1]))

    def symbol(self, role: int) -> int:
        if not 1 <= role <= self.k:
            raise IndexError(f"role {role} outside [1, {self.k}]")
        return int(self.ids[role - 1])

    def __len__(self) -> int:
        return self.k

    def __repr__(self) -> str:
        return f"Word(k={self.k})"


class Distribution:
    """Non-negative position weights of length n, summing to one.

    Exact construction keeps a tuple of Fractions next to the float view;
    float construction normalizes away accumulation error when the total
    is within 1e-6 of one and rejects anything further off.
    """

    __slots__ = ("_floats", "_exact", "_float_prefix", "_exact_prefix")

    def __init__(self, floats: np.ndarray, exact: Optional[tuple] = None) -> None:
        self._floats = floats
        self._floats.flags.writeable = False
        self._exact = exact
        self._float_prefix: Optional[np.ndarray] = None
        self._exact_prefix: Optional[list] = None

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        if n < 1:
            raise ValueError("uniform weights need n >= 1")
        share = Fraction(1, n)
        return cls(np.full(n, 1.0 / n), (share,) * n)

    @classmethod
    def from_fractions(cls, weights: Sequence[WeightLike]) -> "Distribution":
        exact = tuple(as_fraction(w) for w in weights)
        if not exact:
            raise ValueError("weights must be non-empty")
        if any(w < 0 for w in exact):
            raise ValueError("weights must be non-negative")
        total = sum(exact)
        if total <= 0:
            raise ValueError("weights must have positive total")
        if total != 1:
            if abs(total - 1) > Fraction(1, 10**6):
                raise ValueError(f"weights sum to {float(total):.8f}, too far from 1")
            exact = tuple(w / total for w in exact)
        return cls(np.array([float(w) for w in exact]), exact)

    @classmethod
    def from_floats(cls, weights: Sequence[float]) -> "Distribution":
        arr = np.asarray(weights, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if np.any(arr < 0):
            raise ValueError("weights must be non-negative")
        total = float(arr.sum())
        if total <= 0 or abs(total - 1.0) > 1e-6:
            raise ValueError(f"weights sum to {total:.8f}, too far from 1")
        return cls(arr / total, None)

    @property
    def n(self) -> int:
        return int(self._floats.size)

    @property
    def is_exact(self) -> bool:
        return self._exact is not None

    @property
    def floats(self) -> np.ndarray:
        return self._floats

    @property
    def fractions(self) -> tuple:
        if self._exact is None:
            raise ValueError("this distribution has no exact representation")
        return self._exact

    def weight(self, position: int) -> Fraction:
        self._check_range(position, position)
        if self._exact is not None:
            return self._exact[position - 1]
        return Fraction(float(self._floats[position - 1]))

    def interval_weight(self, lo: int, hi: int):
        """Total weight of positions lo..hi inclusive; exact when possible."""
        self._check_range(lo, hi)
        if self._exact is not None:
            return self.exact_prefix(hi) - self.exact_prefix(lo - 1)
        return self.prefix_weight(hi) - self.prefix_weight(lo - 1)

    def prefix_weight(self, length: int) -> float:
        if self._float_prefix is None:
            self._float_prefix = np.concatenate(([0.0], np.cumsum(self._floats)))
        return float(self._float_prefix[length])

    def exact_prefix(self, length: int) -> Fraction:
        if self._exact is None:
            raise ValueError("exact prefix weights need exact weights")
        if self._exact_prefix is None:
            acc = [Fraction(0)]
            for w in self._exact:
                acc.append(acc[-1] + w)
            self._exact_prefix = acc
        return self._exact_prefix[length]

    def common_denominator(self) -> int:
        denom = 1
        for w in self.fractions:
            denom = denom * w.denominator // math.gcd(denom, w.denominator)
        return denom

    def _check_range(self, lo: int, hi: int) -> None:
        if not 1 <= lo or not hi <= self.n or lo > hi + 1:
            raise ValueError(f"interval [{lo}, {hi}] outside [1, {self.n}]")

    def __repr__(self) -> str:
        kind = "exact" if self.is_exact else "float"
        return f"Distribution(n={self.n}, {kind})"


def drop_zero_weight(text: Text, dist: Distribution) -> tuple[Text, Distribution]:
    """Remove positions of weight zero; the distance is unaffected.

    Such positions can be modified free of charge, so no minimizer ever
    pays for them, and downstream expansion needs strictly positive
    multiplicities.
    """
    if dist.n != text.n:
        raise ValueError("weights and text disagree on length")
    if dist.is_exact:
        keep = [i for i, w in enumerate(dist.fractions) if w > 0]
        if len(keep) == dist.n:
            return text, dist
        kept = tuple(dist.fractions[i] for i in keep)
        return Text(text.ids[keep], text.alphabet), Distribution(
            np.array([float(w) for w in kept]), kept
        )
    keep = np.flatnonzero(dist.floats > 0)
    if keep.size == dist.n:
        return text, dist
    return Text(text.ids[keep], text.alphabet), Distribution(dist.floats[keep], None)


class SamplePair(NamedTuple):
    position: int
    symbol: int


class SampleSet:
    """Multiset of (position, symbol) draws, stored as count vectors.

    Only positions that were actually drawn are kept: `positions` is
    sorted and unique, `symbols` carries the text symbol at each, and
    `multiplicities` counts repeat draws. `size` is the number of draws.
    """

    __slots__ = ("n", "size", "positions", "symbols", "multiplicities")

    def __init__(self, n: int, positions, symbols, multiplicities) -> None:
        self.n = int(n)
        self.positions = np.asarray(positions, dtype=np.int64)
        self.symbols = np.asarray(symbols, dtype=np.int32)
        self.multiplicities = np.asarray(multiplicities, dtype=np.int64)
        if not (self.positions.size == self.symbols.size == self.multiplicities.size):
            raise ValueError("positions, symbols and multiplicities must align")
        if self.positions.size:
            if self.positions[0] < 1 or self.positions[-1] > self.n:
                raise ValueError("sampled positions outside [1, n]")
            if np.any(np.diff(self.positions) <= 0):
                raise ValueError("positions must be sorted and unique")
            if np.any(self.multiplicities < 1):
                raise ValueError("multiplicities must be positive")
        self.size = int(self.multiplicities.sum())

    @classmethod
    def from_counts(cls, counts: np.ndarray, text: Text) -> "SampleSet":
        """Build from a dense per-position draw-count vector."""
        counts = np.asarray(counts, dtype=np.int64)
        if counts.size != text.n:
            raise ValueError("count vector and text disagree on length")
        hit = np.flatnonzero(counts)
        return cls(text.n, hit + 1, text.ids[hit], counts[hit])

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "SampleSet":
        """Build from explicit (position, symbol) pairs, mainly for tests."""
        bag: dict[int, int] = {}
        syms: dict[int, int] = {}
        for pos, sym in pairs:
            bag[pos] = bag.get(pos, 0) + 1
            if syms.setdefault(pos, sym) != sym:
                raise ValueError(f"position {pos} reported with two symbols")
        order = sorted(bag)
        return cls(
            n,
            np.array(order, dtype=np.int64),
            np.array([syms[p] for p in order], dtype=np.int32),
            np.array([bag[p] for p in order], dtype=np.int64),
        )

    def dense_counts(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.int64)
        out[self.positions - 1] = self.multiplicities
        return out

    def symbol_counts(self, symbol: int) -> np.ndarray:
        """Dense draw counts restricted to positions carrying `symbol`."""
        out = np.zeros(self.n, dtype=np.int64)
        mask = self.symbols == symbol
        out[self.positions[mask] - 1] = self.multiplicities[mask]
        return out

    def count_between(self, lo: int, hi: int) -> int:
        if not 1 <= lo or not hi <= self.n or lo > hi + 1:
            raise ValueError(f"interval [{lo}, {hi}] outside [1, {self.n}]")
        a = np.searchsorted(self.positions, lo, side="left")
        b = np.searchsorted(self.positions, hi, side="right")
        return int(self.multiplicities[a:b].sum())

    def interval_weight(self, lo: int, hi: int) -> Fraction:
        """Empirical weight of the interval: draw count over sample size."""
        if self.size == 0:
            raise ValueError("empty sample has no weights")
        return Fraction(self.count_between(lo, hi), self.size)

    def pairs(self) -> Iterator[SamplePair]:
        for pos, sym, mult in zip(self.positions, self.symbols, self.multiplicities):
            for _ in range(int(mult)):
                yield SamplePair(int(pos), int(sym))

    def __repr__(self) -> str:
        return f"SampleSet(n={self.n}, size={self.size})"


class Sampler:
    """Draws positions i.i.d. from fixed position weights over a text.

    Deterministic given (size, seed). Returns a SampleSet built from one
    multinomial count vector, which is distributed identically to size
    independent draws tallied by position.
    """

    def __init__(self, text: Text, pvals: np.ndarray) -> None:
        if text.n < 1:
            raise ValueError("cannot sample from an empty text")
        self._text = text
        total = float(pvals.sum())
        if total <= 0:
            raise ValueError("sampling weights must have positive total")
        self._pvals = pvals / total

    @property
    def n(self) -> int:
        return self._text.n

    def draw(self, size: int, seed) -> SampleSet:
        if size < 0:
            raise ValueError("sample size must be non-negative")
        rng = np.random.default_rng(seed)
        counts = rng.multinomial(size, self._pvals)
        return SampleSet.from_counts(counts, self._text)


class UniformSampler(Sampler):
    def __init__(self, text: Text) -> None:
        super().__init__(text, np.full(text.n, 1.0 / text.n if text.n else 0.0))


class WeightedSampler(Sampler):
    def __init__(self, text: Text, dist: Distribution) -> None:
        if dist.n != text.n:
            raise ValueError("weights and text disagree on length")
        super().__init__(text, dist.floats)
        self.dist = dist


def prefix_count(text: Text, word: Word, role: int, length: int) -> int:
    """Occurrences of the role's symbol among the first `length` positions."""
    if not 1 <= role <= word.k:
        raise ValueError(f"role {role} outside [1, {word.k}]")
    if not 0 <= length <= text.n:
        raise ValueError(f"prefix length {length} outside [0, {text.n}]")
    return int(np.count_nonzero(text.ids[:length] == word.ids[role - 1]))


def role_match(text: Text, word: Word, role: int, position: int) -> bool:
    """True when the text symbol at `position` can play `role`."""
    return text.symbol(position) == word.symbol(role)


def contains_word(text: Text, word: Word) -> bool:
    """Subsequence test: does the word occur in the text at all?"""
    need = 0
    wids = word.ids
    for sym in text.ids:
        if sym == wids[need]:
            need += 1
            if need == word.k:
                return True
    return False


def is_word_free(text: Text, word: Word) -> bool:
    return not contains_word(text, word)
