"""Statistical experiments reproducing the estimator guarantees at desk
scale, plus the lower-bound concentration run.

Every experiment is a pure function of its configuration and one master
seed. Per-trial seeds are the master seed XORed with the trial index;
multi-stage pipelines split those further into independent streams.
Reports are JSON-ready dicts; wall-clock times are deliberately kept out
of them so that reports are byte-reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from ..core import (
    Distribution,
    Text,
    UniformSampler,
    WeightedSampler,
    Word,
    as_fraction,
    subseed,
)
from ..distfree import (
    DEFAULT_CONSTANTS,
    EstimatorConstants,
    IntervalPartition,
    ReferencePartition,
    assemble_sentinel_density,
    densities_well_estimated,
    estimate_distance,
    estimate_distance_repeat_free,
    exact_sentinel_reference,
    exact_symbol_density,
    first_sample_size,
    interleave_partition,
    interval_resolution,
    second_sample_size,
    symbol_density_estimate,
    weights_well_estimated,
)
from ..exact import copy_count, exact_weighted_distance, uniform_distance
from ..uniform import estimate_distance_uniform
from .generators import (
    block_ensemble_text,
    identity_word,
    lowerbound_premises,
    lowerbound_rates,
)


def fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def trial_seeds(master: int, trials: int) -> list[int]:
    return [master ^ t for t in range(trials)]


def spread_seeds(seed: int, repeats: int) -> list[int]:
    """Independent integer seeds for repeated runs of one estimator call.

    A single repeat keeps the caller's seed untouched so that one CLI run
    equals one library call.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    if repeats == 1:
        return [seed]
    return [
        int(np.random.SeedSequence((seed, r)).generate_state(1)[0])
        for r in range(repeats)
    ]


def median_low(values: list) -> object:
    """Deterministic median: the lower middle of the sorted values."""
    if not values:
        raise ValueError("median of nothing")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


@dataclass
class TrialOutcome:
    """One estimator run against a known truth.

    Wall time is kept for interactive inspection but never serialized;
    reports must not depend on machine speed.
    """

    trial: int
    seed: int
    estimate: float
    raw: Fraction
    truth: Optional[Fraction]
    error: Optional[float]
    within: Optional[bool]
    samples: dict
    events: Optional[dict] = None
    wall_time: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        out = {
            "trial": self.trial,
            "seed": self.seed,
            "estimate": self.estimate,
            "raw": fraction_str(self.raw),
            "truth": fraction_str(self.truth) if self.truth is not None else None,
            "error": self.error,
            "within": self.within,
            "samples": self.samples,
        }
        if self.events is not None:
            out["events"] = self.events
        return out


def _clamped(raw: Fraction) -> Fraction:
    return min(max(raw, Fraction(0)), Fraction(1))


def run_uniform_trial(
    oracle: UniformSampler,
    word: Word,
    accuracy,
    seed: int,
    trial: int,
    truth: Optional[Fraction],
) -> TrialOutcome:
    start = time.perf_counter()
    result = estimate_distance_uniform(oracle, word, accuracy, seed)
    elapsed = time.perf_counter() - start
    return _outcome_from(result.raw, result.estimate, truth, accuracy, trial, seed,
                         {"draws": result.sample_size}, elapsed)


def run_distfree_trial(
    oracle: WeightedSampler,
    word: Word,
    accuracy,
    seed: int,
    trial: int,
    truth: Optional[Fraction],
    constants: EstimatorConstants = DEFAULT_CONSTANTS,
    repeat_free: bool = False,
) -> TrialOutcome:
    start = time.perf_counter()
    runner = estimate_distance_repeat_free if repeat_free else estimate_distance
    result = runner(oracle, word, accuracy, seed, constants)
    elapsed = time.perf_counter() - start
    samples = {
        "first": result.first_size,
        "second": result.second_size,
        "total": result.first_size + result.second_size,
        "intervals": result.intervals,
    }
    return _outcome_from(result.raw, result.estimate, truth, accuracy, trial, seed,
                         samples, elapsed)


def _outcome_from(raw, estimate, truth, accuracy, trial, seed, samples, elapsed):
    if truth is None:
        error = None
        within = None
    else:
        exact_error = abs(_clamped(raw) - truth)
        error = float(exact_error)
        within = bool(exact_error <= as_fraction(accuracy))
    return TrialOutcome(
        trial=trial,
        seed=seed,
        estimate=estimate,
        raw=raw,
        truth=truth,
        error=error,
        within=within,
        samples=samples,
        wall_time=elapsed,
    )


def estimator_sweep(
    kind: str,
    text: Text,
    word: Word,
    accuracies: list,
    trials: int,
    seed: int,
    dist: Optional[Distribution] = None,
    constants: EstimatorConstants = DEFAULT_CONSTANTS,
) -> dict:
    """Success-rate sweep of one estimator over an accuracy grid.

    Truth comes from the exact oracles. Float weights have no exact
    truth; their rows carry estimates only. Exact weights whose common
    denominator is too large to expand are rejected with advice.
    """
    if kind not in ("uniform", "df"):
        raise ValueError("estimator kind must be 'uniform' or 'df'")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    truth: Optional[Fraction]
    if kind == "uniform":
        if dist is not None:
            raise ValueError("the uniform estimator takes no weights")
        oracle = UniformSampler(text)
        truth = uniform_distance(text, word)
        weights_kind = "uniform"
    else:
        if dist is None:
            dist = Distribution.uniform(text.n)
        oracle = WeightedSampler(text, dist)
        if dist.is_exact:
            try:
                truth = exact_weighted_distance(text, word, dist)
            except ValueError as err:
                raise ValueError(
                    f"no exact truth for this ensemble ({err}); use rational "
                    "weights with a bounded common denominator"
                ) from None
            weights_kind = "exact"
        else:
            truth = None
            weights_kind = "float"
    rows = []
    for accuracy in accuracies:
        acc = as_fraction(accuracy)
        if not 0 < acc < 1:
            raise ValueError("every accuracy must lie in (0, 1)")
        outcomes = []
        for t, tseed in enumerate(trial_seeds(seed, trials)):
            if kind == "uniform":
                outcome = run_uniform_trial(oracle, word, acc, tseed, t, truth)
            else:
                outcome = run_distfree_trial(
                    oracle, word, acc, tseed, t, truth, constants
                )
            outcomes.append(outcome)
        row = {
            "accuracy": float(acc),
            "trials": trials,
            "results": [o.to_json() for o in outcomes],
        }
        if truth is not None and trials > 0:
            successes = sum(1 for o in outcomes if o.within)
            row["successes"] = successes
            row["success_rate"] = successes / trials
            row["mean_abs_error"] = sum(o.error for o in outcomes) / trials
            row["max_abs_error"] = max(o.error for o in outcomes)
        rows.append(row)
    report = {
        "experiment": "error-sweep",
        "estimator": kind,
        "n": text.n,
        "k": word.k,
        "weights": weights_kind,
        "truth": fraction_str(truth) if truth is not None else None,
        "seed": seed,
        "rows": rows,
    }
    if not constants.is_production:
        report["off_spec_constants"] = True
    return report


def concentration_experiment(
    distinct: int, gap, n: int, trials: int, seed: int
) -> dict:
    """Copy-count concentration of the two block ensembles.

    The first ensemble should have its copy count above
    n/(2*distinct) - (2/8)*gap*n, the second below
    n/(2*distinct) - (23/8)*gap*n, each in at least 99 of 100 draws.
    """
    if trials < 0:
        raise ValueError("trials must be non-negative")
    g = as_fraction(gap)
    base_rate, shifted_rate = lowerbound_rates(distinct, g)
    word = identity_word(distinct)
    center = Fraction(n, 2 * distinct)
    base_floor = center - Fraction(2, 8) * g * n
    shifted_cap = center - Fraction(23, 8) * g * n
    base_hits = 0
    shifted_hits = 0
    base_copies = []
    shifted_copies = []
    for t in range(trials):
        tseed = seed ^ t
        text_base = block_ensemble_text(n, distinct, base_rate, subseed(tseed, 0))
        copies = copy_count(text_base, word)
        base_copies.append(copies)
        if copies >= base_floor:
            base_hits += 1
        text_shifted = block_ensemble_text(
            n, distinct, shifted_rate, subseed(tseed, 1)
        )
        copies = copy_count(text_shifted, word)
        shifted_copies.append(copies)
        if copies <= shifted_cap:
            shifted_hits += 1
    report = {
        "experiment": "lowerbound-concentration",
        "distinct": distinct,
        "gap": float(g),
        "n": n,
        "trials": trials,
        "seed": seed,
        "premises": lowerbound_premises(distinct, g, n),
        "filler_rates": [float(base_rate), float(shifted_rate)],
        "thresholds": {
            "base_floor": fraction_str(base_floor),
            "shifted_cap": fraction_str(shifted_cap),
        },
        "base_hits": base_hits,
        "shifted_hits": shifted_hits,
    }
    if trials > 0:
        report["base_success_rate"] = base_hits / trials
        report["shifted_success_rate"] = shifted_hits / trials
        report["mean_copies"] = {
            "base": sum(base_copies) / trials,
            "shifted": sum(shifted_copies) / trials,
        }
    return report


def event_diagnostics(
    text: Text,
    word: Word,
    dist: Distribution,
    accuracy,
    trials: int,
    seed: int,
    constants: EstimatorConstants = DEFAULT_CONSTANTS,
) -> dict:
    """Frequencies of the two good-sample events, with the bounds they
    are supposed to imply checked exactly whenever they hold.

    Conditioned on the first event, every light interval of the sampled
    partition must carry true weight below 6/resolution. Conditioned on
    the second, the assembled density matrix must match the exact
    quantized reference entrywise within step_factor/resolution plus
    1/(2*resolution).
    """
    if not dist.is_exact:
        raise ValueError("event diagnostics need exact weights")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    resolution = interval_resolution(word.k, accuracy, constants)
    first = first_sample_size(resolution, constants)
    reference = ReferencePartition.from_weights(dist, resolution)
    oracle = WeightedSampler(text, dist)
    light_cap = Fraction(6) / resolution
    density_cap = constants.step_factor / resolution + Fraction(1, 2) / resolution
    first_event_hits = 0
    second_event_hits = 0
    light_violations = 0
    density_violations = 0
    second_sizes = []
    for t in range(trials):
        tseed = seed ^ t
        sample1 = oracle.draw(first, subseed(tseed, 1))
        first_event = weights_well_estimated(dist, sample1, resolution, reference)
        partition = IntervalPartition.from_sample(sample1, resolution)
        if first_event:
            first_event_hits += 1
            for lo, hi, is_heavy in partition.intervals():
                if not is_heavy and dist.interval_weight(lo, hi) >= light_cap:
                    light_violations += 1
        second = second_sample_size(resolution, word.k, partition.count, constants)
        second_sizes.append(second)
        sample2 = oracle.draw(second, subseed(tseed, 2))
        exact = exact_symbol_density(text, dist, word, partition)
        second_event = densities_well_estimated(
            text, dist, word, sample2, partition, resolution, exact
        )
        if second_event:
            second_event_hits += 1
            density = symbol_density_estimate(sample2, partition, word)
            sentinel = interleave_partition(partition)
            assembled = assemble_sentinel_density(density, partition, sentinel)
            ref_nums, ref_denom = exact_sentinel_reference(
                text, dist, word, partition, sentinel, resolution, constants
            )
            rows, cols = assembled.numerators.shape
            for i in range(rows):
                for u in range(cols):
                    got = Fraction(
                        int(assembled.numerators[i, u]), assembled.denominator
                    )
                    want = Fraction(int(ref_nums[i, u]), ref_denom)
                    if abs(got - want) > density_cap:
                        density_violations += 1
    report = {
        "experiment": "event-diagnostics",
        "n": text.n,
        "k": word.k,
        "accuracy": float(as_fraction(accuracy)),
        "trials": trials,
        "seed": seed,
        "resolution": fraction_str(resolution),
        "first_sample": first,
        "second_sample_range": (
            [min(second_sizes), max(second_sizes)] if second_sizes else None
        ),
        "first_event_hits": first_event_hits,
        "second_event_hits": second_event_hits,
        "light_weight_violations": light_violations,
        "density_bound_violations": density_violations,
    }
    if trials > 0:
        report["first_event_rate"] = first_event_hits / trials
        report["second_event_rate"] = second_event_hits / trials
    if not constants.is_production:
        report["off_spec_constants"] = True
    return report
