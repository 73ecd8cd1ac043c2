"""Counter-based random streams, one per Monte-Carlo path."""

import numpy as np

from src.utils.errors import ParameterError

MAX_SEED = 2 ** 64 - 1


def validate_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) <= MAX_SEED:
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed!r}", "diffuse_mc")
    return int(seed)


def path_generator(seed: int, index: int) -> np.random.Generator:
    """
    Independent Philox stream for path ``index`` of a run seeded with ``seed``.

    The stream depends only on (seed, index), so results do not depend on
    which worker traces the path or in what order.
    """
    sequence = np.random.SeedSequence(entropy=validate_seed(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(sequence))
