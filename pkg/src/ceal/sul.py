"""Simulated system under learning: noise injection, metering, majority voting.

A SimulatedSystem wraps a hidden target machine. Every probe executes one
reset + one input word and is charged to a meter; noise perturbs either the
input word before execution or the output word after it, one symbol at a
time. Noisy replacement draws uniformly from the full alphabet, so a drawn
symbol may equal the original; the effective flip rate per symbol is
rate * (n - 1) / n for an alphabet of size n.

majority_query is the repeated-voting wrapper a conventional teacher uses to
answer membership queries over a noisy system.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .mealy import MealyMachine, Trace, Word

NOISE_KINDS = ("none", "input", "output")


class BudgetExhausted(RuntimeError):
    """A probe was requested after the test budget was spent."""


@dataclass
class NoiseModel:
    """Per-symbol uniform-replacement noise on one side of the trace."""

    kind: str
    rate: float = 0.0
    rng: random.Random = field(default_factory=random.Random, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not (0.0 <= self.rate <= 1.0):
            raise ValueError(f"noise rate must lie in [0,1], got {self.rate!r}")

    @classmethod
    def from_seed(cls, kind: str, rate: float, seed: int | str) -> "NoiseModel":
        return cls(kind, rate, random.Random(f"{seed}:noise"))

    def perturb(self, word: Word, alphabet_size: int) -> Word:
        """Each symbol independently replaced by a uniform draw with prob rate."""
        if self.kind == "none" or self.rate == 0.0:
            return word
        rng = self.rng
        return tuple(
            rng.randrange(alphabet_size) if rng.random() < self.rate else s
            for s in word
        )


@dataclass
class TestMeter:
    """Monotone interaction counters; symbols = eq_symbols + mq_symbols."""

    tests: int = 0
    symbols: int = 0
    eq_symbols: int = 0
    mq_symbols: int = 0

    def charge(self, n_symbols: int, phase: str) -> None:
        self.tests += 1
        self.symbols += n_symbols
        if phase == "eq":
            self.eq_symbols += n_symbols
        elif phase == "mq":
            self.mq_symbols += n_symbols
        else:
            raise ValueError(f"unknown meter phase {phase!r}")


@dataclass(frozen=True)
class RepeatPolicy:
    """Voting discipline for answering one query over a noisy system."""

    min_repeats: int = 5
    max_repeats: int = 10
    threshold: float = 0.8

    def __post_init__(self) -> None:
        if not (1 <= self.min_repeats <= self.max_repeats):
            raise ValueError("need 1 <= min_repeats <= max_repeats")
        if not (0.5 < self.threshold <= 1.0):
            raise ValueError("agreement threshold must lie in (0.5, 1]")


class SimulatedSystem:
    """The only gateway to the target; every interaction is metered here."""

    def __init__(
        self,
        target: MealyMachine,
        noise: NoiseModel,
        meter: Optional[TestMeter] = None,
        max_tests: Optional[int] = None,
    ) -> None:
        self.target = target
        self.noise = noise
        self.meter = meter if meter is not None else TestMeter()
        self.max_tests = max_tests

    def probe(self, word: Word, phase: str = "mq") -> Trace:
        """One reset + one word on the system; returns the trace as observed.

        Under input noise the returned trace carries the perturbed input word
        that was actually executed, so callers store what really happened.
        """
        if self.max_tests is not None and self.meter.tests >= self.max_tests:
            raise BudgetExhausted(f"test budget of {self.max_tests} spent")
        noise = self.noise
        if noise.kind == "input":
            executed = noise.perturb(word, len(self.target.inputs))
            outputs = self.target.run(executed)
        elif noise.kind == "output":
            executed = word
            outputs = noise.perturb(self.target.run(word), len(self.target.outputs))
        else:
            executed = word
            outputs = self.target.run(word)
        self.meter.charge(len(executed), phase)
        return Trace(executed, outputs)


def majority_query(
    system: SimulatedSystem,
    word: Word,
    policy: RepeatPolicy,
    phase: str = "mq",
) -> Word:
    """Vote the same word repeatedly; return the agreed or plurality output.

    Stops as soon as one output word holds at least the threshold share of
    all votes so far (checked from min_repeats on); at max_repeats the
    plurality wins, ties going to the lexicographically least output word.
    """
    votes: Counter[Word] = Counter()
    for _ in range(policy.min_repeats):
        votes[system.probe(word, phase).outputs] += 1
    while True:
        total = sum(votes.values())
        best_n = max(votes.values())
        winners = [w for w, n in votes.items() if n == best_n]
        # float-robust "best_n / total >= threshold"; the threshold exceeds
        # one half, so a word meeting it is unique
        if best_n >= policy.threshold * total - 1e-9:
            return winners[0]
        if total >= policy.max_repeats:
            return min(winners)
        votes[system.probe(word, phase).outputs] += 1
