"""Named, derivable random streams.

Every consumer of randomness gets its own ``numpy.random.Generator`` built
from a ``SeedSequence`` whose entropy is ``(master_seed, stream, *keys)``.
Streams never share state, so adding draws in one place (e.g. credit
assignment) cannot shift the environment's possible worlds.
"""

from __future__ import annotations

from typing import Union

import numpy as np

RandomLike = Union[None, int, np.random.Generator, np.random.SeedSequence]

# stream identifiers
ENVIRONMENT = 0
STRATEGY = 1
ORACLE = 2
CREDIT = 3
BENCHMARK = 4
EVALUATION = 5


def check_rng(random_state: RandomLike) -> np.random.Generator:
    """Turn ``None``, an int seed or a generator into a ``Generator``."""
    return np.random.default_rng(random_state)


def derive_rng(master_seed: int, stream: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(stream), *map(int, keys)]))


def derive_seed(master_seed: int, index: int) -> int:
    """A 63-bit child seed for run ``index`` of a multi-seed experiment."""
    state = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))
