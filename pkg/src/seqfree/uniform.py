"""Sample-based distance estimation under uniform position weights.

The estimator never sees the text. It draws positions uniformly, tallies
per-role occurrence counts at a coarse grid of prefix lengths, and runs
a recursion on the resulting matrix that tracks the copy-count recursion
closely enough for an additive guarantee: the output is within the
requested accuracy of the true distance with probability at least 2/3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .core import SampleSet, Sampler, Text, Word, as_fraction

Number = Union[int, float]


def additive_chernoff_size(deviation: float, failure: float) -> int:
    """Draws needed so an empirical mean strays past `deviation` with
    probability at most `failure` (one-sided exponential tail)."""
    if not 0 < deviation or not 0 < failure < 1:
        raise ValueError("need deviation > 0 and failure in (0, 1)")
    return math.ceil(math.log(1.0 / failure) / (2.0 * deviation**2))


@dataclass(frozen=True)
class EstimatorPlan:
    """Grid spacing, grid size and sample size for a requested accuracy."""

    spacing: Fraction
    grid_size: int
    sample_size: int


def uniform_plan(k: int, accuracy) -> EstimatorPlan:
    """Parameters for the uniform estimator at word length k.

    The grid spacing is accuracy/(3k): one third of the error budget per
    source (grid coarseness costs (k-1) gaps, count noise costs (2k-1)
    deviations, both at spacing scale). The sample size makes every cell
    of the count matrix accurate to one spacing with failure probability
    1/3 overall.
    """
    if k < 1:
        raise ValueError("word length must be at least 1")
    acc = as_fraction(accuracy)
    if not 0 < acc < 1:
        raise ValueError("accuracy must lie in (0, 1)")
    spacing = acc / (3 * k)
    grid_size = math.ceil(1 / spacing)
    sample_size = math.ceil(
        math.log(6 * k * grid_size) / (2 * float(spacing) ** 2)
    )
    return EstimatorPlan(spacing, grid_size, sample_size)


@dataclass(frozen=True)
class PrefixGrid:
    """Increasing prefix lengths ending at n, with bounded gaps."""

    n: int
    spacing: Fraction
    columns: np.ndarray  # int64, strictly increasing, last entry n

    @property
    def size(self) -> int:
        return int(self.columns.size)

    @property
    def max_gap(self) -> int:
        """Largest jump between consecutive columns, counting from 0."""
        return int(np.diff(np.concatenate(([0], self.columns))).max())


def prefix_grid(n: int, spacing) -> PrefixGrid:
    """Columns at ceil(r * spacing * n), capped at n and deduplicated."""
    if n < 1:
        raise ValueError("grid needs n >= 1")
    sp = as_fraction(spacing)
    if sp <= 0:
        raise ValueError("spacing must be positive")
    columns: list[int] = []
    r = 1
    while True:
        j = min(math.ceil(r * sp * n), n)
        if not columns or j > columns[-1]:
            columns.append(j)
        if j >= n:
            break
        r += 1
    return PrefixGrid(n, sp, np.array(columns, dtype=np.int64))


@dataclass
class CountMatrix:
    """Per-role occurrence counts at the grid columns, in count scale.

    `counts[i-1, r-1]` approximates (or equals, when exact) the number of
    occurrences of role i's symbol within the first columns[r-1] text
    positions. Estimated matrices also keep `tallies`, the raw per-cell
    sample hit counts, whose scale-free recursion value is exact.
    """

    counts: np.ndarray
    n: int
    estimated: bool
    sample_size: Optional[int] = None
    tallies: Optional[np.ndarray] = None

    def normalized(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64) / self.n


def exact_count_matrix(text: Text, word: Word, grid: PrefixGrid) -> CountMatrix:
    """True occurrence counts at the grid columns."""
    if grid.n != text.n:
        raise ValueError("grid and text disagree on length")
    rows = np.zeros((word.k, grid.size), dtype=np.int64)
    cache: dict[int, np.ndarray] = {}
    for i, sym in enumerate(word.ids):
        sym = int(sym)
        if sym not in cache:
            cache[sym] = np.cumsum(text.ids == sym, dtype=np.int64)
        rows[i] = cache[sym][grid.columns - 1]
    return CountMatrix(rows, text.n, estimated=False)


def tally_prefix_counts(sample: SampleSet, word: Word, grid: PrefixGrid) -> CountMatrix:
    """Estimated occurrence counts from a uniform sample.

    Each draw at position j with symbol equal to role i's symbol adds
    n/size to every cell (i, r) with columns[r] >= j; tallies keep the
    raw hit counts.
    """
    if sample.size < 1:
        raise ValueError("cannot estimate from an empty sample")
    if grid.n != sample.n:
        raise ValueError("grid and sample disagree on length")
    tallies = np.zeros((word.k, grid.size), dtype=np.int64)
    cache: dict[int, np.ndarray] = {}
    for i, sym in enumerate(word.ids):
        sym = int(sym)
        if sym not in cache:
            cache[sym] = np.cumsum(sample.symbol_counts(sym))
        tallies[i] = cache[sym][grid.columns - 1]
    scale = sample.n / sample.size
    return CountMatrix(
        tallies * scale,
        sample.n,
        estimated=True,
        sample_size=sample.size,
        tallies=tallies,
    )


def copies_from_counts(matrix) -> Number:
    """Copy measure of a count matrix over an increasing prefix grid.

    Row one is taken as-is; every later row subtracts the worst running
    shortfall between its own counts and the previous row's measure, the
    empty prefix counting as a zero column. With exact counts on the full
    grid this equals the copy count for words without adjacent equal
    symbols; on coarse grids it stays within (k-1) times the largest gap.
    The measure scales linearly: doubling every entry doubles the result,
    which lets callers run it on raw integer tallies.
    """
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("count matrix must be two-dimensional and non-empty")
    measure = arr[0].copy()
    for row in arr[1:]:
        shortfall = np.maximum.accumulate(row - measure)
        np.maximum(shortfall, 0, out=shortfall)
        measure = row - shortfall
    value = measure[-1]
    if np.issubdtype(arr.dtype, np.integer):
        return int(value)
    if arr.dtype == object:
        return value  # exact arithmetic passes through untouched
    return float(value)


@dataclass(frozen=True)
class UniformEstimate:
    """Result of one uniform-weights estimation run."""

    estimate: float  # clamped to [0, 1]
    raw: Fraction  # exact pre-clamp value, tallies measure over sample size
    sample_size: int
    spacing: Fraction
    grid_size: int
    n: int
    k: int
    seed: int


def estimate_distance_uniform(
    oracle: Sampler, word: Word, accuracy, seed: int
) -> UniformEstimate:
    """Estimate the distance to word-freeness from uniform samples.

    Guarantee: the result is within `accuracy` of the true distance with
    probability at least 2/3 over the draw. The reported raw value is
    exact given the sample: by linearity of the copy measure, dividing
    the integer tally measure by the sample size equals the measure of
    the count-scale matrix divided by n, with no float rounding.
    """
    plan = uniform_plan(word.k, accuracy)
    grid = prefix_grid(oracle.n, plan.spacing)
    sample = oracle.draw(plan.sample_size, seed)
    matrix = tally_prefix_counts(sample, word, grid)
    measure = copies_from_counts(matrix.tallies)
    raw = Fraction(int(measure), plan.sample_size)
    clamped = min(max(raw, Fraction(0)), Fraction(1))
    return UniformEstimate(
        estimate=float(clamped),
        raw=raw,
        sample_size=plan.sample_size,
        spacing=plan.spacing,
        grid_size=grid.size,
        n=oracle.n,
        k=word.k,
        seed=seed,
    )
