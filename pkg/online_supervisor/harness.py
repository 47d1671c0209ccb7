"""
Seeded simulation of the supervised plant.

The environment picks the next event uniformly at random from the issued
control pattern. Randomness comes from SplitMix64, a 64-bit mixing
generator that is fully specified here, so a seed reproduces the same run
on every platform.

This module provides:
- SplitMix64 and derive_seed
- simulate_run / run_session: one closed-loop run recorded as a RunRecord
- simulate_batch: repeated runs per schedule configuration, summarised
  with numpy (population standard deviation)
- sweep_configs: parser for "b=30;a=-0.25,-0.5,-1,-2"
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .config import settings
from .errors import EmptyPatternError, MaxStepsExceededError, ScheduleError
from .product import ProductAutomaton, product_id
from .ranking import RankingFunction
from .supervisor import LinearSchedule, PermissivenessSchedule, Supervisor, SupervisorSession

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """
    SplitMix64: the state advances by the golden gamma and each output is
    the state passed through two xor-shift-multiply rounds.
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection so there is no modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of run `index`: output index+1 of SplitMix64(master_seed)."""
    return SplitMix64((master_seed + index * GOLDEN_GAMMA) & MASK64).next_u64()


class SimulationConfig(BaseModel):
    """Settings of one supervised run, or of `runs` runs of one schedule."""

    seed: int = 0
    a: float
    b: float
    max_steps: int = Field(default_factory=lambda: settings.max_steps, ge=1)
    runs: int = Field(default=1, ge=1)


def build_config(**fields) -> SimulationConfig:
    """
    Validate simulation settings.

    Fields left as None fall back to their defaults.

    Raises:
        ScheduleError: If a field is out of range, e.g. max_steps < 1 or runs < 1
    """
    try:
        return SimulationConfig(**{name: value for name, value in fields.items() if value is not None})
    except ValidationError as err:
        problems = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in err.errors())
        raise ScheduleError(f"invalid simulation settings: {problems}") from err


class RunRecord(BaseModel):
    """
    One closed-loop run.

    rank_trace, level_trace, states and label_trace have one entry per
    visited state (steps + 1); pattern_sizes and events one per step.
    """

    seed: int
    a: Optional[float] = None
    b: Optional[float] = None
    steps: int
    accepted: bool
    rank_trace: list[int]
    level_trace: list[float]
    pattern_sizes: list[int]
    events: list[str]
    states: list[tuple[str, int]]
    label_trace: list[list[str]]
    legal_count: int
    neutral_count: int
    neutral_steps: list[int] = Field(default_factory=list)

    @property
    def mean_pattern_size(self) -> float:
        return float(np.mean(self.pattern_sizes)) if self.pattern_sizes else 0.0


class BatchSummary(BaseModel):
    a: Optional[float] = None
    b: Optional[float] = None
    runs: int
    mean_steps: float
    std_steps: float
    mean_pattern_size: float
    std_pattern_size: float
    accepted_count: int


def run_session(
    supervisor: Supervisor,
    seed: int,
    max_steps: Optional[int] = None,
    record_transcript: bool = False,
) -> tuple[RunRecord, SupervisorSession]:
    """
    Drive a session to acceptance with a seeded random environment.

    Args:
        supervisor: Supervisor for the product, ranking and schedule
        seed: Generator seed
        max_steps: Step cap (defaults to settings)
        record_transcript: Keep the per-step transcript on the session

    Returns:
        The run record and the finished session

    Raises:
        UnenforceableError: If the initial state has rank alpha
        MaxStepsExceededError: If acceptance is not reached within the cap
        EmptyPatternError: If a running session is issued an empty pattern
    """
    limit = max_steps if max_steps is not None else settings.max_steps
    rng = SplitMix64(seed)
    product = supervisor.product
    session = supervisor.start(record_transcript=record_transcript)

    ranks = [session.rank]
    levels = [session.level]
    states = [(session.state.des, session.state.dfa)]
    labels = [sorted(product.label(session.state))]
    sizes: list[int] = []
    neutral_steps: list[int] = []

    while not session.stopped:
        if session.k >= limit:
            raise MaxStepsExceededError(seed, limit)
        pattern = sorted(session.pattern())
        if not pattern:
            raise EmptyPatternError(
                f"empty pattern at k={session.k} in {product_id(session.state)} (seed {seed})"
            )
        event = pattern[rng.below(len(pattern))]
        neutral_before = session.neutral_count
        session.observe(event)
        if session.neutral_count > neutral_before:
            neutral_steps.append(session.k - 1)

        sizes.append(len(pattern))
        ranks.append(session.rank)
        levels.append(session.level)
        states.append((session.state.des, session.state.dfa))
        labels.append(sorted(product.label(session.state)))

    schedule = supervisor.schedule
    record = RunRecord(
        seed=seed,
        a=getattr(schedule, "a", None),
        b=getattr(schedule, "b", None),
        steps=session.k,
        accepted=ranks[-1] == 0,
        rank_trace=ranks,
        level_trace=levels,
        pattern_sizes=sizes,
        events=list(session.events),
        states=states,
        label_trace=labels,
        legal_count=session.legal_count,
        neutral_count=session.neutral_count,
        neutral_steps=neutral_steps,
    )
    return record, session


def simulate_run(
    product: ProductAutomaton,
    ranking: RankingFunction,
    schedule: PermissivenessSchedule,
    seed: int,
    max_steps: Optional[int] = None,
) -> RunRecord:
    record, _ = run_session(Supervisor(product, ranking, schedule), seed, max_steps)
    return record


def summarize_runs(
    steps: Sequence[int],
    pattern_sizes: Sequence[float],
    accepted: Sequence[bool],
    a: Optional[float] = None,
    b: Optional[float] = None,
) -> BatchSummary:
    """Means and population standard deviations; pattern size is averaged per run first."""
    step_array = np.asarray(steps, dtype=float)
    size_array = np.asarray(pattern_sizes, dtype=float)
    return BatchSummary(
        a=a,
        b=b,
        runs=len(step_array),
        mean_steps=float(step_array.mean()),
        std_steps=float(step_array.std()),
        mean_pattern_size=float(size_array.mean()),
        std_pattern_size=float(size_array.std()),
        accepted_count=int(sum(accepted)),
    )


def summarize_records(records: Sequence[RunRecord]) -> BatchSummary:
    first = records[0]
    return summarize_runs(
        [r.steps for r in records],
        [r.mean_pattern_size for r in records],
        [r.accepted for r in records],
        a=first.a,
        b=first.b,
    )


def _run_many(
    product: ProductAutomaton,
    ranking: RankingFunction,
    schedule: PermissivenessSchedule,
    seeds: Sequence[int],
    max_steps: Optional[int],
) -> list[tuple[int, float, bool]]:
    supervisor = Supervisor(product, ranking, schedule)
    results = []
    for seed in seeds:
        record, _ = run_session(supervisor, seed, max_steps)
        results.append((record.steps, record.mean_pattern_size, record.accepted))
    return results


def simulate_batch(
    product: ProductAutomaton,
    ranking: RankingFunction,
    configs: Sequence[tuple[float, float]],
    runs_per_config: int,
    master_seed: int,
    schedule_factory: Callable[[float, float], PermissivenessSchedule] = LinearSchedule,
    max_steps: Optional[int] = None,
    workers: Optional[int] = None,
) -> list[BatchSummary]:
    """
    Run every (a, b) configuration `runs_per_config` times.

    Run i of every configuration uses derive_seed(master_seed, i), so
    configurations are compared on common random numbers. With workers > 1
    the seeds are split across a process pool; the summaries are the same
    as in the sequential case.

    Returns:
        One summary per configuration, in input order

    Raises:
        ScheduleError: If runs_per_config < 1
        MaxStepsExceededError: Carrying the seed of the offending run
    """
    if runs_per_config < 1:
        raise ScheduleError(f"runs per configuration must be at least 1, got {runs_per_config}")
    pool_size = workers if workers is not None else settings.batch_workers
    seeds = [derive_seed(master_seed, i) for i in range(runs_per_config)]

    summaries = []
    for a, b in configs:
        schedule = schedule_factory(a, b)
        if pool_size > 1:
            chunks = [seeds[i::pool_size] for i in range(pool_size)]
            with ProcessPoolExecutor(max_workers=pool_size) as executor:
                parts = list(
                    executor.map(
                        _run_many,
                        itertools.repeat(product),
                        itertools.repeat(ranking),
                        itertools.repeat(schedule),
                        chunks,
                        itertools.repeat(max_steps),
                    )
                )
            by_seed_order = [None] * runs_per_config
            for offset, part in enumerate(parts):
                for j, result in enumerate(part):
                    by_seed_order[offset + j * pool_size] = result
            results = by_seed_order
        else:
            results = _run_many(product, ranking, schedule, seeds, max_steps)

        summary = summarize_runs(
            [r[0] for r in results], [r[1] for r in results], [r[2] for r in results], a=a, b=b
        )
        logger.info(
            "a=%s b=%s: mean steps %.2f, mean pattern size %.3f", a, b, summary.mean_steps, summary.mean_pattern_size
        )
        summaries.append(summary)
    return summaries


def sweep_configs(text: str) -> list[tuple[float, float]]:
    """
    Parse a sweep such as "b=30;a=-0.25,-0.5,-1,-2".

    Returns:
        (a, b) pairs, b varying slowest

    Raises:
        ScheduleError: On malformed text or a missing parameter
    """
    values: dict[str, list[float]] = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        name, sep, raw = part.partition("=")
        name = name.strip()
        if not sep or name not in ("a", "b"):
            raise ScheduleError(f"cannot parse sweep component '{part}'")
        try:
            values[name] = [float(v) for v in raw.split(",") if v.strip()]
        except ValueError as err:
            raise ScheduleError(f"non-numeric value in '{part}'") from err
    if not values.get("a") or not values.get("b"):
        raise ScheduleError(f"sweep '{text}' must give values for both a and b")
    return [(a, b) for b in values["b"] for a in values["a"]]
