"""Test-word generation for equivalence testing.

Two methods feed the tester's word draw: plain random walks, and a
randomized Wp-style scheme that concatenates a uniformly chosen state's
access sequence, a geometric-length uniform infix, and a uniformly chosen
characterization suffix. Randomness is injected as an explicit generator so
configs stay plain data.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .mealy import MealyMachine, Word, minimize

METHODS = ("random_walk", "randomized_wp")


@dataclass(frozen=True)
class SamplerConfig:
    method: str = "randomized_wp"
    mean_infix: float = 4.0
    max_len: int = 50

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.mean_infix < 0:
            raise ValueError("mean_infix must be nonnegative")
        if self.max_len < 1:
            raise ValueError("max_len must be at least 1")


def access_sequences(h: MealyMachine) -> dict[int, Word]:
    """Shortest input word reaching each state, ties by input-symbol order."""
    access: dict[int, Word] = {h.initial: ()}
    queue = deque([h.initial])
    while queue:
        q = queue.popleft()
        for a, succ in enumerate(h.transitions[q]):
            if succ not in access:
                access[succ] = access[q] + (a,)
                queue.append(succ)
    if len(access) != h.n_states:
        missing = sorted(set(range(h.n_states)) - access.keys())
        raise ValueError(f"states unreachable from the initial state: {missing}")
    return access


def characterization_set(h: MealyMachine) -> tuple[Word, ...]:
    """Words that pairwise separate the states of a minimal machine.

    Built by witness-collecting partition refinement: a pair differing on
    some emission gets that single symbol; otherwise a pair inherits
    (a,) + witness(successor pair) once the successors are separated.
    """
    n = h.n_states
    if n == 1:
        return ((0,),)
    ni = len(h.inputs)
    witness: dict[tuple[int, int], Word] = {}
    for p in range(n):
        for q in range(p + 1, n):
            for a in range(ni):
                if h.emissions[p][a] != h.emissions[q][a]:
                    witness[(p, q)] = (a,)
                    break
    changed = True
    while changed:
        changed = False
        for p in range(n):
            for q in range(p + 1, n):
                if (p, q) in witness:
                    continue
                for a in range(ni):
                    sp, sq = h.transitions[p][a], h.transitions[q][a]
                    key = (min(sp, sq), max(sp, sq))
                    if sp != sq and key in witness:
                        witness[(p, q)] = (a,) + witness[key]
                        changed = True
                        break
    return tuple(sorted(set(witness.values())))


class PreparedSampler:
    """Per-hypothesis sampling state: minimized machine, accesses, suffixes."""

    def __init__(self, h: MealyMachine, cfg: SamplerConfig) -> None:
        self.cfg = cfg
        self.n_inputs = len(h.inputs)
        if cfg.method == "randomized_wp":
            m = minimize(h)
            acc = access_sequences(m)
            self.accesses = tuple(acc[q] for q in range(m.n_states))
            self.suffixes = characterization_set(m)
        else:
            self.accesses = ((),)
            self.suffixes = ((),)

    def _infix(self, rng: random.Random) -> Word:
        mean = self.cfg.mean_infix
        stop = 1.0 / (1.0 + mean)
        k = 0
        while rng.random() >= stop and k < self.cfg.max_len:
            k += 1
        return tuple(rng.randrange(self.n_inputs) for _ in range(k))

    def draw(self, rng: random.Random) -> Word:
        if self.cfg.method == "random_walk":
            return self._infix(rng)[: self.cfg.max_len]
        word = (
            self.accesses[rng.randrange(len(self.accesses))]
            + self._infix(rng)
            + self.suffixes[rng.randrange(len(self.suffixes))]
        )
        return word[: self.cfg.max_len]


def sample_word(h: MealyMachine, cfg: SamplerConfig, rng: random.Random) -> Word:
    """One test word for the hypothesis; see PreparedSampler for the shape."""
    return PreparedSampler(h, cfg).draw(rng)
