import random

import pytest

from ringauth.group import GroupParams, production_params, toy_params


@pytest.fixture(scope="session")
def toy() -> GroupParams:
    return toy_params()


@pytest.fixture(scope="session")
def prod() -> GroupParams:
    return production_params()


@pytest.fixture()
def rng() -> random.Random:
    return random.Random(2024)


def naive_exp(base: int, e: int, p: int) -> int:
    """Independent oracle: exponentiation by repeated multiplication."""
    acc = 1
    for _ in range(e):
        acc = acc * base % p
    return acc


def toy_subgroup(params: GroupParams) -> list[int]:
    """All elements of the toy group's order-q subgroup, by enumeration."""
    return sorted({naive_exp(params.g, i, params.p) for i in range(params.q)})
