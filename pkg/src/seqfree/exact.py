"""Ground-truth distances: greedy copy packing, the prefix recursion,
brute-force minimum-modification search, and the exact weighted pipeline
(zero-weight dropping, separator interleaving, multiplicity expansion).

Everything here is exact. Rational arithmetic is used wherever a weight
appears; the only floats are in callers that choose to convert.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    SENTINEL,
    Distribution,
    Text,
    Word,
    contains_word,
    drop_zero_weight,
)

# Exhaustive search explodes past this length; the weighted expansion is
# capped separately by max_expanded below.
BRUTEFORCE_LIMIT = 22
EXPANSION_LIMIT = 10_000_000


@dataclass
class CopySet:
    """Role-disjoint copies of a word, one row of positions per copy."""

    positions: np.ndarray  # shape (count, k), 1-based, int64
    word: Word

    @property
    def count(self) -> int:
        return int(self.positions.shape[0])

    def validate(self, text: Text) -> None:
        """Check the structural invariants; raises AssertionError."""
        rows, k = self.positions.shape
        assert k == self.word.k
        for m in range(rows):
            row = self.positions[m]
            assert np.all(np.diff(row) > 0), f"copy {m} is not increasing"
            for i in range(k):
                assert text.symbol(int(row[i])) == self.word.symbol(i + 1), (
                    f"copy {m} role {i + 1} symbol mismatch"
                )
        for i in range(k):
            col = self.positions[:, i]
            assert np.unique(col).size == col.size, f"role {i + 1} reuses a position"


def greedy_copies(text: Text, word: Word) -> CopySet:
    """Build a maximum set of role-disjoint copies, first-fit forward.

    Copies are constructed one at a time; each role takes the first
    occurrence of its symbol after the previous role's position that no
    earlier copy consumed for the same role. Per-role choices grow
    monotonically across copies, so a single forward cursor per role
    suffices and occurrences skipped once never become usable again.
    """
    occurrences: dict[int, np.ndarray] = {}
    for sym in np.unique(word.ids):
        occurrences[int(sym)] = np.flatnonzero(text.ids == sym).astype(np.int64) + 1
    cursors = [0] * word.k
    lists = [occurrences[int(s)] for s in word.ids]
    rows = []
    while True:
        prev = 0
        row = []
        for i in range(word.k):
            occ = lists[i]
            c = cursors[i]
            while c < occ.size and occ[c] <= prev:
                c += 1
            cursors[i] = c
            if c == occ.size:
                row = None
                break
            prev = int(occ[c])
            row.append(prev)
            cursors[i] = c + 1
        if row is None:
            break
        rows.append(row)
    positions = np.array(rows, dtype=np.int64).reshape(len(rows), word.k)
    return CopySet(positions, word)


def _prefix_count_rows(text: Text, word: Word) -> list[np.ndarray]:
    """Per role, cumulative occurrence counts indexed by prefix length."""
    cache: dict[int, np.ndarray] = {}
    rows = []
    for sym in word.ids:
        sym = int(sym)
        if sym not in cache:
            counts = np.concatenate(
                ([0], np.cumsum(text.ids == sym, dtype=np.int64))
            )
            cache[sym] = counts
        rows.append(cache[sym])
    return rows


def copy_count_table(text: Text, word: Word) -> np.ndarray:
    """Maximum copies of each word prefix within each text prefix.

    Entry [i-1, j] is the copy count of the first i roles within the
    first j positions; the recursion subtracts, from the occurrence
    count of role i, the worst shortfall any earlier cut would leave.
    """
    n = text.n
    table = np.zeros((word.k, n + 1), dtype=np.int64)
    prev: Optional[np.ndarray] = None
    for i, counts in enumerate(_prefix_count_rows(text, word)):
        if i == 0:
            row = counts.copy()
        else:
            row = np.zeros(n + 1, dtype=np.int64)
            if n >= 1:
                deficit = np.maximum.accumulate(counts[1:] - prev[:-1])
                row[1:] = counts[1:] - deficit
        table[i] = row
        prev = row
    return table


def copy_count(text: Text, word: Word) -> int:
    """Maximum number of role-disjoint copies, O(nk) time, O(n) memory."""
    n = text.n
    prev: Optional[np.ndarray] = None
    for i, counts in enumerate(_prefix_count_rows(text, word)):
        if i == 0:
            row = counts
        else:
            row = np.zeros(n + 1, dtype=np.int64)
            if n >= 1:
                deficit = np.maximum.accumulate(counts[1:] - prev[:-1])
                row[1:] = counts[1:] - deficit
        prev = row
    return int(prev[n])


def uniform_distance(text: Text, word: Word) -> Fraction:
    """Distance to word-freeness under uniform position weights."""
    if text.n < 1:
        raise ValueError("distance is undefined for an empty text")
    return Fraction(copy_count(text, word), text.n)


def _free_after_removal(ids: np.ndarray, word_ids: np.ndarray, removed: frozenset) -> bool:
    need = 0
    k = word_ids.size
    for j, sym in enumerate(ids):
        if j in removed:
            continue
        if sym == word_ids[need]:
            need += 1
            if need == k:
                return False
    return True


def bruteforce_distance(
    text: Text, word: Word, dist: Optional[Distribution] = None
) -> Fraction:
    """Independent oracle: exhaustive search for the cheapest breaking set.

    Finds the minimum total weight of positions whose modification leaves
    the text word-free. Modifying a position is equivalent to removing it
    from consideration, since a fresh symbol can never serve any role.
    """
    n = text.n
    if n < 1:
        raise ValueError("distance is undefined for an empty text")
    if n > BRUTEFORCE_LIMIT:
        raise ValueError(f"exhaustive search is capped at n = {BRUTEFORCE_LIMIT}")
    if not contains_word(text, word):
        return Fraction(0)
    ids = text.ids
    wids = word.ids
    if dist is None:
        # Uniform weights: any breaking set of minimum cardinality wins,
        # so scan subsets in increasing size with early exit.
        for size in range(1, n + 1):
            for combo in itertools.combinations(range(n), size):
                if _free_after_removal(ids, wids, frozenset(combo)):
                    return Fraction(size, n)
        raise AssertionError("removing every position always breaks the word")
    if dist.n != n:
        raise ValueError("weights and text disagree on length")
    weights = dist.fractions
    best: Optional[Fraction] = None
    for mask in range(1, 2**n):
        total = Fraction(0)
        m = mask
        over = False
        while m:
            j = (m & -m).bit_length() - 1
            total += weights[j]
            if best is not None and total >= best:
                over = True
                break
            m &= m - 1
        if over:
            continue
        removed = frozenset(j for j in range(n) if mask >> j & 1)
        if _free_after_removal(ids, wids, removed):
            best = total
            if best == 0:
                break
    assert best is not None
    return best


@dataclass
class QuantizedWeights:
    """Weights snapped up to a grid and renormalized."""

    step: Fraction
    rounded: tuple  # each entry a multiple of step, >= the original
    scale: Fraction  # 1 / sum(rounded), <= 1
    normalized: Distribution
    l1_error: Fraction  # total variation x2 against the original


def quantize_weights(dist: Distribution, step) -> QuantizedWeights:
    """Round each weight up to a multiple of `step`, then renormalize.

    The result lives on the grid {scale * step * m : m integer} and is
    within L1 distance 2 * step * n of the original.
    """
    step = Fraction(step) if not isinstance(step, Fraction) else step
    if step <= 0:
        raise ValueError("grid step must be positive")
    original = dist.fractions
    rounded = tuple(math.ceil(w / step) * step for w in original)
    total = sum(rounded)
    scale = 1 / total
    normalized = tuple(scale * w for w in rounded)
    l1 = sum(abs(a - b) for a, b in zip(normalized, original))
    return QuantizedWeights(
        step=step,
        rounded=rounded,
        scale=scale,
        normalized=Distribution(
            np.array([float(w) for w in normalized]), normalized
        ),
        l1_error=l1,
    )


def interleave_sentinel(
    text: Text, word: Word, dist: Optional[Distribution] = None
):
    """Insert the reserved separator symbol after every position.

    The rewritten word alternates real symbols with separators and thus
    never repeats a symbol adjacently; each copy of it must spend one
    separator position per role, which halves the distance. Weights, when
    given, are split evenly between each original position and its
    separator.
    """
    if np.any(text.ids == SENTINEL) or np.any(word.ids == SENTINEL):
        raise ValueError("separator id 0 must not occur in the input")
    t2 = np.zeros(2 * text.n, dtype=np.int32)
    t2[0::2] = text.ids
    w2 = np.zeros(2 * word.k, dtype=np.int32)
    w2[0::2] = word.ids
    out_text = Text(t2, text.alphabet)
    out_word = Word(w2, word.alphabet)
    if dist is None:
        return out_text, out_word, None
    if dist.n != text.n:
        raise ValueError("weights and text disagree on length")
    if dist.is_exact:
        halves = []
        for w in dist.fractions:
            halves.append(w / 2)
            halves.append(w / 2)
        exact = tuple(halves)
        return out_text, out_word, Distribution(
            np.array([float(w) for w in exact]), exact
        )
    floats = np.repeat(dist.floats, 2) / 2.0
    return out_text, out_word, Distribution(floats, None)


class TextExpansion:
    """A text expanded by positive per-position multiplicities.

    Position j of the source becomes a run of multiplicities[j-1] equal
    symbols; `origin` maps expanded positions back to their source. Under
    uniform weights on the expansion, each source position carries weight
    proportional to its multiplicity.
    """

    __slots__ = ("source", "multiplicities", "boundaries", "expanded")

    def __init__(self, source: Text, multiplicities: np.ndarray) -> None:
        self.source = source
        self.multiplicities = np.asarray(multiplicities, dtype=np.int64)
        if self.multiplicities.size != source.n:
            raise ValueError("one multiplicity per source position required")
        if source.n and int(self.multiplicities.min()) < 1:
            raise ValueError("multiplicities must be positive")
        self.boundaries = np.concatenate(
            ([0], np.cumsum(self.multiplicities, dtype=np.int64))
        )
        self.expanded = Text(
            np.repeat(source.ids, self.multiplicities), source.alphabet
        )

    @property
    def expanded_length(self) -> int:
        return int(self.boundaries[-1])

    def origin(self, position: int) -> int:
        """Source position of expanded position `position` (both 1-based)."""
        if not 1 <= position <= self.expanded_length:
            raise IndexError(f"position {position} outside the expansion")
        return int(np.searchsorted(self.boundaries, position, side="left"))

    def origin_map(self) -> np.ndarray:
        return np.repeat(
            np.arange(1, self.source.n + 1, dtype=np.int64), self.multiplicities
        )

    def prefix_boundary(self, source_prefix: int) -> int:
        """Expanded length covering the first `source_prefix` positions."""
        return int(self.boundaries[source_prefix])


def expand_text(text: Text, dist: Distribution, base_weight) -> TextExpansion:
    """Expand each position j into weight(j)/base_weight equal symbols.

    Requires every weight to be a positive integer multiple of
    `base_weight`; the expansion then has length 1/base_weight and makes
    the weighted distance of the source equal the uniform distance of the
    expansion (for words without adjacent equal symbols).
    """
    base = Fraction(base_weight) if not isinstance(base_weight, Fraction) else base_weight
    if base <= 0:
        raise ValueError("base weight must be positive")
    if dist.n != text.n:
        raise ValueError("weights and text disagree on length")
    mult = []
    for j, w in enumerate(dist.fractions, start=1):
        ratio = w / base
        if ratio.denominator != 1 or ratio <= 0:
            raise ValueError(
                f"weight at position {j} is not a positive multiple of the base"
            )
        mult.append(int(ratio))
    return TextExpansion(text, np.array(mult, dtype=np.int64))


def exact_weighted_distance(
    text: Text,
    word: Word,
    dist: Distribution,
    max_expanded: int = EXPANSION_LIMIT,
) -> Fraction:
    """Exact distance to word-freeness under arbitrary rational weights.

    Pipeline: drop zero-weight positions, interleave the separator (which
    makes the word free of adjacent repeats, at the cost of halving), and
    expand by the common denominator so the greedy copy count applies.
    The expansion is materialized, so the common denominator D must keep
    2D within `max_expanded`.
    """
    if text.n < 1:
        raise ValueError("distance is undefined for an empty text")
    if dist.n != text.n:
        raise ValueError("weights and text disagree on length")
    if not dist.is_exact:
        raise ValueError("exact distance needs rational weights")
    kept_text, kept = drop_zero_weight(text, dist)
    denom = kept.common_denominator()
    if 2 * denom > max_expanded:
        raise ValueError(
            f"common denominator {denom} needs an expansion of {2 * denom} "
            f"positions, above the cap of {max_expanded}; use weights with a "
            "smaller common denominator"
        )
    sep_text, sep_word, sep_dist = interleave_sentinel(kept_text, word, kept)
    expansion = expand_text(sep_text, sep_dist, Fraction(1, 2 * denom))
    assert expansion.expanded_length == 2 * denom
    copies = copy_count(expansion.expanded, sep_word)
    return Fraction(2 * copies, expansion.expanded_length)
