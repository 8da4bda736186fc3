"""Distance estimation when the position weights are arbitrary and unknown.

The estimator works in two sampling phases over the same unknown weights
that define the distance. Phase one partitions positions into intervals
of small empirical weight (heavy single positions stay alone). Phase two
estimates, per word role, the cumulative weight of matching positions up
to every interval boundary. A separator-aware reassembly then feeds the
copy measure, whose doubled value estimates the distance within the
requested accuracy with probability at least 2/3.

Diagnostics down to the two good-sample events and exact reference
quantities live here too; they require full knowledge of the weights and
exist for the statistical test harness, not for the estimator itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .core import (
    Distribution,
    SampleSet,
    Sampler,
    Text,
    Word,
    as_fraction,
    subseed,
)
from .exact import interleave_sentinel, quantize_weights
from .uniform import copies_from_counts


@dataclass(frozen=True)
class EstimatorConstants:
    """Dials of the distribution-free estimator.

    The defaults are the production values backing the 2/3 guarantee.
    `relaxed` scales the interval resolution down for smoke tests; any
    result produced that way is off-spec and callers must label it so.
    """

    resolution_factor: Fraction = Fraction(100)
    step_factor: Fraction = Fraction(1, 16)
    first_sample_factor: int = 120
    first_sample_log: int = 240
    second_sample_log: int = 40

    def relaxed(self, factor) -> "EstimatorConstants":
        f = as_fraction(factor)
        if f <= 0:
            raise ValueError("relaxation factor must be positive")
        return replace(self, resolution_factor=self.resolution_factor / f)

    @property
    def is_production(self) -> bool:
        return self == DEFAULT_CONSTANTS


DEFAULT_CONSTANTS = EstimatorConstants()


def interval_resolution(
    k: int, accuracy, constants: EstimatorConstants = DEFAULT_CONSTANTS
) -> Fraction:
    """Target inverse interval weight: intervals aim for weight <= 1/res."""
    if k < 1:
        raise ValueError("word length must be at least 1")
    acc = as_fraction(accuracy)
    if not 0 < acc < 1:
        raise ValueError("accuracy must lie in (0, 1)")
    res = constants.resolution_factor * k / acc
    if res <= 1:
        raise ValueError("interval resolution must exceed 1; relaxation too aggressive")
    return res


def first_sample_size(resolution: Fraction, constants: EstimatorConstants = DEFAULT_CONSTANTS) -> int:
    """Draws for the partition phase."""
    r = float(resolution)
    return math.ceil(constants.first_sample_factor * r * math.log(constants.first_sample_log * r))


def second_sample_size(
    resolution: Fraction, k: int, intervals: int, constants: EstimatorConstants = DEFAULT_CONSTANTS
) -> int:
    """Draws for the density phase; needs the realized interval count."""
    if intervals < 1:
        raise ValueError("interval count must be at least 1")
    r = float(resolution)
    return math.ceil(r * r * math.log(constants.second_sample_log * k * intervals))


def quantization_step(n: int, resolution: Fraction, constants: EstimatorConstants = DEFAULT_CONSTANTS) -> Fraction:
    """Grid step for the weight rounding used by the exact reference path."""
    if n < 1:
        raise ValueError("step needs n >= 1")
    return constants.step_factor / (n * resolution)


@dataclass(frozen=True)
class SampleParameters:
    """All derived sampling parameters for one estimator run."""

    resolution: Fraction
    step: Fraction
    first_size: int
    second_size: Optional[int]


def sample_parameters(
    k: int,
    accuracy,
    n: int,
    intervals: Optional[int] = None,
    constants: EstimatorConstants = DEFAULT_CONSTANTS,
) -> SampleParameters:
    res = interval_resolution(k, accuracy, constants)
    second = None if intervals is None else second_sample_size(res, k, intervals, constants)
    return SampleParameters(
        resolution=res,
        step=quantization_step(n, res, constants),
        first_size=first_sample_size(res, constants),
        second_size=second,
    )


@dataclass
class IntervalPartition:
    """Consecutive intervals covering [1, n], built from sampled weights.

    `boundaries` starts at 0 and ends at n; interval u spans
    boundaries[u-1]+1 .. boundaries[u]. An interval is heavy exactly when
    it is a single position whose empirical weight exceeds 1/resolution;
    every other interval is light with empirical weight at most that.
    """

    n: int
    boundaries: np.ndarray  # int64, leading 0, strictly increasing, last n
    heavy: np.ndarray  # bool, one flag per interval

    @property
    def count(self) -> int:
        return int(self.heavy.size)

    def lower(self, u: int) -> int:
        return int(self.boundaries[u - 1]) + 1

    def upper(self, u: int) -> int:
        return int(self.boundaries[u])

    def intervals(self) -> Iterator[tuple[int, int, bool]]:
        for u in range(1, self.count + 1):
            yield self.lower(u), self.upper(u), bool(self.heavy[u - 1])

    @classmethod
    def from_sample(cls, sample: SampleSet, resolution: Fraction) -> "IntervalPartition":
        """Greedy left-to-right construction.

        A position whose empirical weight exceeds 1/resolution becomes a
        heavy singleton; otherwise the interval extends to the largest
        endpoint keeping empirical weight at most 1/resolution. Unsampled
        suffixes cost nothing and fold into the final light interval.
        """
        if sample.size < 1:
            raise ValueError("partition needs a non-empty sample")
        n = sample.n
        # Comparisons against count/size <= 1/res stay in integers:
        # weight > 1/res iff count > floor(size/res).
        limit = math.floor(Fraction(sample.size) / resolution)
        prefix = np.concatenate(([0], np.cumsum(sample.dense_counts())))
        bounds = [0]
        heavy = []
        start = 1
        while start <= n:
            head = int(prefix[start] - prefix[start - 1])
            if head > limit:
                bounds.append(start)
                heavy.append(True)
                start += 1
                continue
            target = prefix[start - 1] + limit
            end = int(np.searchsorted(prefix, target, side="right")) - 1
            end = min(end, n)
            bounds.append(end)
            heavy.append(False)
            start = end + 1
        return cls(n, np.array(bounds, dtype=np.int64), np.array(heavy, dtype=bool))

    def validate(self, sample: SampleSet, resolution: Fraction) -> None:
        assert self.boundaries[0] == 0 and self.boundaries[-1] == self.n
        assert np.all(np.diff(self.boundaries) > 0)
        cap = Fraction(1) / resolution
        for lo, hi, is_heavy in self.intervals():
            weight = sample.interval_weight(lo, hi)
            if is_heavy:
                assert lo == hi, "heavy intervals must be singletons"
                assert weight > cap
            else:
                assert weight <= cap


_CLASS_SINGLE = "single"
_CLASS_MEDIUM = "medium"
_CLASS_SMALL = "small"


@dataclass
class ReferencePartition:
    """Diagnostic partition built from the true weights.

    Intervals chase a per-interval weight near 1/(4*resolution) subject
    to a per-position cap of 1/(8*resolution); positions over the cap
    stand alone. Classes: `single` for over-cap singletons, `medium` for
    intervals with weight in [1/(8 res), 1/(4 res)], `small` below that.
    """

    n: int
    boundaries: np.ndarray
    labels: tuple

    @property
    def count(self) -> int:
        return len(self.labels)

    def lower(self, u: int) -> int:
        return int(self.boundaries[u - 1]) + 1

    def upper(self, u: int) -> int:
        return int(self.boundaries[u])

    def intervals(self) -> Iterator[tuple[int, int, str]]:
        for u in range(1, self.count + 1):
            yield self.lower(u), self.upper(u), self.labels[u - 1]

    def class_counts(self) -> dict:
        out = {_CLASS_SINGLE: 0, _CLASS_MEDIUM: 0, _CLASS_SMALL: 0}
        for label in self.labels:
            out[label] += 1
        return out

    @classmethod
    def from_weights(cls, dist: Distribution, resolution: Fraction) -> "ReferencePartition":
        weights = dist.fractions
        n = dist.n
        cap_single = Fraction(1) / (8 * resolution)
        cap_run = Fraction(1) / (4 * resolution)
        bounds = [0]
        labels = []
        start = 1
        while start <= n:
            w = weights[start - 1]
            if w > cap_single:
                bounds.append(start)
                labels.append(_CLASS_SINGLE)
                start += 1
                continue
            # Maximal run: cumulative weight capped by cap_run, every
            # member capped by cap_single; stops before the first
            # position that would break either constraint.
            end = start
            total = w
            while end + 1 <= n:
                nxt = weights[end]
                if nxt > cap_single or total + nxt > cap_run:
                    break
                total += nxt
                end += 1
            bounds.append(end)
            labels.append(_CLASS_SMALL if total < cap_single else _CLASS_MEDIUM)
            start = end + 1
        return cls(n, np.array(bounds, dtype=np.int64), tuple(labels))


def weights_well_estimated(
    dist: Distribution,
    sample: SampleSet,
    resolution: Fraction,
    reference: Optional[ReferencePartition] = None,
) -> bool:
    """First good-sample event: the phase-one draw sees representative
    weights. Singles and mediums must be estimated within a factor of
    [1/2, 3/2]; smalls must stay under 1/(2*resolution) empirically."""
    if reference is None:
        reference = ReferencePartition.from_weights(dist, resolution)
    small_cap = Fraction(1) / (2 * resolution)
    for lo, hi, label in reference.intervals():
        estimated = sample.interval_weight(lo, hi)
        if label == _CLASS_SMALL:
            if estimated > small_cap:
                return False
        else:
            true = dist.interval_weight(lo, hi)
            if not Fraction(1, 2) * true <= estimated <= Fraction(3, 2) * true:
                return False
    return True


@dataclass
class DensityEstimate:
    """Phase-two tallies: per-role and total draw counts up to each
    interval boundary. Dividing by the sample size gives the estimated
    cumulative weights."""

    role_tallies: np.ndarray  # int64, (k, U)
    prefix_tallies: np.ndarray  # int64, (U,)
    sample_size: int

    @property
    def densities(self) -> np.ndarray:
        return self.role_tallies / self.sample_size

    @property
    def prefix_weights(self) -> np.ndarray:
        return self.prefix_tallies / self.sample_size

    def density_fraction(self, role: int, u: int) -> Fraction:
        return Fraction(int(self.role_tallies[role - 1, u - 1]), self.sample_size)

    def prefix_fraction(self, u: int) -> Fraction:
        return Fraction(int(self.prefix_tallies[u - 1]), self.sample_size)


def symbol_density_estimate(
    sample: SampleSet, partition: IntervalPartition, word: Word
) -> DensityEstimate:
    """Tally phase-two draws by word role and by interval prefix."""
    if sample.size < 1:
        raise ValueError("density estimation needs a non-empty sample")
    if sample.n != partition.n:
        raise ValueError("sample and partition disagree on length")
    ends = partition.boundaries[1:]
    role_tallies = np.zeros((word.k, partition.count), dtype=np.int64)
    cache: dict[int, np.ndarray] = {}
    for i, sym in enumerate(word.ids):
        sym = int(sym)
        if sym not in cache:
            cache[sym] = np.cumsum(sample.symbol_counts(sym))
        role_tallies[i] = cache[sym][ends - 1]
    prefix_tallies = np.cumsum(sample.dense_counts())[ends - 1]
    return DensityEstimate(role_tallies, prefix_tallies.astype(np.int64), sample.size)


def exact_symbol_density(
    text: Text, dist: Distribution, word: Word, partition: IntervalPartition
) -> tuple[list, list]:
    """True cumulative weights matching `symbol_density_estimate`.

    Returns (per-role rows, prefix weights), all exact Fractions.
    Diagnostic only: requires the text and the true weights.
    """
    if text.n != partition.n or dist.n != partition.n:
        raise ValueError("text, weights and partition disagree on length")
    ends = [int(b) for b in partition.boundaries[1:]]
    weights = dist.fractions
    rows = []
    cache: dict[int, list] = {}
    for sym in word.ids:
        sym = int(sym)
        if sym not in cache:
            acc = Fraction(0)
            at_ends = []
            pos = 0
            for end in ends:
                while pos < end:
                    if int(text.ids[pos]) == sym:
                        acc += weights[pos]
                    pos += 1
                at_ends.append(acc)
            cache[sym] = at_ends
        rows.append(cache[sym])
    prefix = [dist.exact_prefix(end) for end in ends]
    return rows, prefix


def densities_well_estimated(
    text: Text,
    dist: Distribution,
    word: Word,
    sample: SampleSet,
    partition: IntervalPartition,
    resolution: Fraction,
    exact: Optional[tuple] = None,
) -> bool:
    """Second good-sample event: every per-role cumulative density and
    every prefix weight is estimated within 1/resolution."""
    if exact is None:
        exact = exact_symbol_density(text, dist, word, partition)
    exact_rows, exact_prefix = exact
    estimate = symbol_density_estimate(sample, partition, word)
    bound = Fraction(1) / resolution
    for i in range(word.k):
        for u in range(partition.count):
            got = Fraction(int(estimate.role_tallies[i, u]), estimate.sample_size)
            if abs(got - exact_rows[i][u]) > bound:
                return False
    for u in range(partition.count):
        got = Fraction(int(estimate.prefix_tallies[u]), estimate.sample_size)
        if abs(got - exact_prefix[u]) > bound:
            return False
    return True


@dataclass
class SentinelPartition:
    """Interval structure carried through the separator rewrite.

    Boundaries live on the doubled text. A heavy source interval [b, b]
    splits into two merged intervals ending at 2b-1 (the position itself)
    and 2b (its separator); a light interval keeps one merged interval
    ending at twice its endpoint. `source` maps each merged interval back
    to its source interval.
    """

    base: IntervalPartition
    boundaries: np.ndarray  # int64, leading 0, within [0, 2n]
    source: np.ndarray  # int64, 1-based source interval per merged interval

    @property
    def count(self) -> int:
        return int(self.source.size)


def interleave_partition(partition: IntervalPartition) -> SentinelPartition:
    bounds = [0]
    source = []
    for u in range(1, partition.count + 1):
        end = partition.upper(u)
        if partition.heavy[u - 1]:
            bounds.append(2 * end - 1)
            source.append(u)
            bounds.append(2 * end)
            source.append(u)
        else:
            bounds.append(2 * end)
            source.append(u)
    return SentinelPartition(
        partition,
        np.array(bounds, dtype=np.int64),
        np.array(source, dtype=np.int64),
    )


@dataclass
class SentinelDensity:
    """Assembled density matrix for the separator-rewritten word, stored
    as integer numerators over a common denominator (twice the phase-two
    sample size)."""

    numerators: np.ndarray  # int64, (2k, U')
    denominator: int

    @property
    def values(self) -> np.ndarray:
        return self.numerators / self.denominator


def assemble_sentinel_density(
    density: DensityEstimate,
    partition: IntervalPartition,
    sentinel: SentinelPartition,
) -> SentinelDensity:
    """Fill the density matrix of the rewritten word without any text
    access.

    Odd rewritten roles are the original roles: halved role densities at
    the source interval. Even roles are separators; separators occupy
    exactly the even doubled positions, so their cumulative weight up to
    a merged boundary is half the prefix weight of the source prefix it
    covers. A merged boundary that is odd (first half of a heavy pair)
    covers only the separators of the previous source interval.
    """
    k, intervals = density.role_tallies.shape
    if intervals != partition.count:
        raise ValueError("density and partition disagree on interval count")
    merged = sentinel.count
    prefix_with_zero = np.concatenate(([0], density.prefix_tallies))
    source = sentinel.source
    ends = sentinel.boundaries[1:]
    separator_row = np.empty(merged, dtype=np.int64)
    for idx in range(merged):
        src = int(source[idx])
        odd_boundary = int(ends[idx]) % 2 == 1
        if partition.heavy[src - 1] and odd_boundary:
            # First half of a heavy pair: the covered separators are
            # those of the source prefix one interval earlier. Heavy
            # intervals are singletons, so that prefix is src - 1.
            if __debug__:
                if idx > 0:
                    assert int(source[idx - 1]) == src - 1
                else:
                    assert src == 1
            separator_row[idx] = prefix_with_zero[src - 1]
        else:
            separator_row[idx] = prefix_with_zero[src]
    numerators = np.empty((2 * k, merged), dtype=np.int64)
    numerators[0::2] = density.role_tallies[:, source - 1]
    numerators[1::2] = separator_row
    return SentinelDensity(numerators, 2 * density.sample_size)


@dataclass(frozen=True)
class DistFreeEstimate:
    """Result of one distribution-free estimation run."""

    estimate: float  # clamped to [0, 1]
    raw: Fraction  # exact pre-clamp value given the samples
    resolution: Fraction
    first_size: int
    second_size: int
    intervals: int
    merged_intervals: Optional[int]
    seed: int
    production: bool


def estimate_distance(
    oracle: Sampler,
    word: Word,
    accuracy,
    seed: int,
    constants: EstimatorConstants = DEFAULT_CONSTANTS,
) -> DistFreeEstimate:
    """Estimate the distance to word-freeness under unknown weights.

    Two-phase sampling: the phase-two size depends on the interval count
    realized in phase one. The output doubles the copy measure of the
    assembled separator matrix; by linearity that equals the integer
    measure of the numerators divided by the phase-two sample size,
    computed without float rounding. Guarantee: within `accuracy` of the
    true distance with probability at least 2/3.
    """
    resolution = interval_resolution(word.k, accuracy, constants)
    first = first_sample_size(resolution, constants)
    sample1 = oracle.draw(first, subseed(seed, 1))
    partition = IntervalPartition.from_sample(sample1, resolution)
    second = second_sample_size(resolution, word.k, partition.count, constants)
    sample2 = oracle.draw(second, subseed(seed, 2))
    density = symbol_density_estimate(sample2, partition, word)
    sentinel = interleave_partition(partition)
    assembled = assemble_sentinel_density(density, partition, sentinel)
    measure = copies_from_counts(assembled.numerators)
    # Output = 2 * measure(numerators / (2 * second)) = measure / second.
    raw = Fraction(int(measure), second)
    clamped = min(max(raw, Fraction(0)), Fraction(1))
    return DistFreeEstimate(
        estimate=float(clamped),
        raw=raw,
        resolution=resolution,
        first_size=first,
        second_size=second,
        intervals=partition.count,
        merged_intervals=sentinel.count,
        seed=seed,
        production=constants.is_production,
    )


def estimate_distance_repeat_free(
    oracle: Sampler,
    word: Word,
    accuracy,
    seed: int,
    constants: EstimatorConstants = DEFAULT_CONSTANTS,
) -> DistFreeEstimate:
    """Specialized estimator for words without adjacent equal symbols.

    Skips the separator rewrite entirely: the copy measure runs on the
    phase-two role tallies, and the output is not doubled.
    """
    if word.has_adjacent_repeat:
        raise ValueError(
            "this estimator needs a word without adjacent equal symbols; "
            "use estimate_distance for the general case"
        )
    resolution = interval_resolution(word.k, accuracy, constants)
    first = first_sample_size(resolution, constants)
    sample1 = oracle.draw(first, subseed(seed, 1))
    partition = IntervalPartition.from_sample(sample1, resolution)
    second = second_sample_size(resolution, word.k, partition.count, constants)
    sample2 = oracle.draw(second, subseed(seed, 2))
    density = symbol_density_estimate(sample2, partition, word)
    measure = copies_from_counts(density.role_tallies)
    raw = Fraction(int(measure), second)
    clamped = min(max(raw, Fraction(0)), Fraction(1))
    return DistFreeEstimate(
        estimate=float(clamped),
        raw=raw,
        resolution=resolution,
        first_size=first,
        second_size=second,
        intervals=partition.count,
        merged_intervals=None,
        seed=seed,
        production=constants.is_production,
    )


def exact_sentinel_reference(
    text: Text,
    dist: Distribution,
    word: Word,
    partition: IntervalPartition,
    sentinel: SentinelPartition,
    resolution: Fraction,
    constants: EstimatorConstants = DEFAULT_CONSTANTS,
) -> tuple[np.ndarray, int]:
    """Exact counterpart of the assembled density matrix.

    Quantizes the true weights, carries them through the separator
    rewrite, and evaluates the cumulative per-role weights of the
    (never materialized) multiplicity expansion at the merged interval
    boundaries. Returns integer numerators over the expansion length.
    Diagnostic only.
    """
    n = text.n
    step = quantization_step(n, resolution, constants)
    quant = quantize_weights(dist, step)
    mult = np.array(
        [int(w / step) for w in quant.rounded], dtype=np.int64
    )
    sep_text, sep_word, _ = interleave_sentinel(text, word)
    sep_mult = np.repeat(mult, 2)
    expanded_length = int(sep_mult.sum())
    cum_all = np.concatenate(([0], np.cumsum(sep_mult)))
    ends = sentinel.boundaries[1:]
    numerators = np.zeros((sep_word.k, sentinel.count), dtype=np.int64)
    cache: dict[int, np.ndarray] = {}
    for i, sym in enumerate(sep_word.ids):
        sym = int(sym)
        if sym not in cache:
            masked = np.where(sep_text.ids == sym, sep_mult, 0)
            cache[sym] = np.concatenate(([0], np.cumsum(masked)))
        numerators[i] = cache[sym][ends]
    assert int(cum_all[-1]) == expanded_length
    return numerators, expanded_length
