"""Seeded random streams with cross-platform, bit-identical output.

All randomness flows through numpy's PCG64 bit generator, whose stream for
a given seed is documented and stable across platforms and numpy versions.
One root seed derives independent substreams via SeedSequence keyed on a
fixed purpose id, so weight init, dropout masks and epoch shuffles never
share state:

    init    -> SeedSequence([seed, 0])
    dropout -> SeedSequence([seed, 1])
    shuffle -> SeedSequence([seed, 2, epoch])   (fresh stream per epoch)
    check   -> SeedSequence([seed, 3])          (gradcheck batch data)
"""

from __future__ import annotations

import numpy as np

STREAM_INIT = 0
STREAM_DROPOUT = 1
STREAM_SHUFFLE = 2
STREAM_CHECK = 3


def substream(seed: int, stream: int, *key: int) -> np.random.Generator:
    """Generator for the (seed, stream, *key) substream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream, *key])))


def init_rng(seed: int) -> np.random.Generator:
    return substream(seed, STREAM_INIT)


def dropout_rng(seed: int) -> np.random.Generator:
    return substream(seed, STREAM_DROPOUT)


def shuffle_rng(seed: int, epoch: int) -> np.random.Generator:
    return substream(seed, STREAM_SHUFFLE, epoch)


def check_rng(seed: int) -> np.random.Generator:
    return substream(seed, STREAM_CHECK)
