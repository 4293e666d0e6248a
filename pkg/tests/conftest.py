"""Shared fixtures: tiny reference machines used across the suite."""

import pytest

from ceal.mealy import Alphabet, MealyMachine


@pytest.fixture(scope="session")
def ab_alphabet() -> Alphabet:
    return Alphabet(("a", "b"))


@pytest.fixture(scope="session")
def xy_alphabet() -> Alphabet:
    return Alphabet(("x", "y"))


@pytest.fixture(scope="session")
def toggle(xy_alphabet) -> MealyMachine:
    """2-state toggle: input a flips the state; state 0 emits x, state 1 emits y."""
    return MealyMachine(
        inputs=Alphabet(("a",)),
        outputs=xy_alphabet,
        initial=0,
        transitions=((1,), (0,)),
        emissions=((0,), (1,)),
    )


@pytest.fixture(scope="session")
def constant_x(xy_alphabet) -> MealyMachine:
    """1-state machine that always emits x."""
    return MealyMachine(
        inputs=Alphabet(("a",)),
        outputs=xy_alphabet,
        initial=0,
        transitions=((0,),),
        emissions=((0,),),
    )
