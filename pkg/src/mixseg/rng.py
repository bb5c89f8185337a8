"""Named, counter-based random substreams derived from one integer seed."""

from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def substream(seed: int, *names) -> np.random.Generator:
    """Independent Philox generator for ``(seed, *names)``.

    The same arguments always give the same stream, regardless of how many
    other streams were created or in which order.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1), spawn_key=tuple(_key(x) for x in names))
    return np.random.Generator(np.random.Philox(ss))
