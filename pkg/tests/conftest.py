from __future__ import annotations

import math
import random

import pytest

from beepsim.graphs import FAMILIES, GraphSpec, generate


def random_bits(rng: random.Random, length: int) -> str:
    return "".join(rng.choice("01") for _ in range(length))


def random_connected_graph(rng: random.Random, n_max: int, n_min: int = 2,
                           label_range: int | None = None):
    """Sample a family and a log-uniform size; returns a connected Graph."""
    n = round(math.exp(rng.uniform(math.log(n_min), math.log(n_max))))
    n = max(n_min, min(n_max, n))
    family = rng.choice([f for f in FAMILIES if f != "cycle" or n >= 3])
    spec = GraphSpec(family, n, seed=rng.randrange(1 << 30), label_range=label_range)
    return generate(spec)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xBEE9)
