from __future__ import annotations

import random
from functools import lru_cache

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from colornet.generators import random_network, small_corpus

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@lru_cache(maxsize=None)
def corpus(n: int, max_edges: int | None = None) -> tuple:
    return tuple(small_corpus(n, max_edges=max_edges))


@st.composite
def networks(draw, min_n: int = 2, max_n: int = 6, max_colors: int = 2):
    n = draw(st.integers(min_n, max_n))
    extra = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_network(random.Random(seed), n, extra, max_colors)
