"""Counter-based random streams.

Every random draw in a trial comes from a Philox generator keyed by
``(base_seed, trial_index, purpose)``. Streams are independent of the order in
which trials run, so there is no global RNG state anywhere in the package.
"""

import zlib

import numpy as np

PURPOSES = ("objective", "design", "noise", "policy", "pool", "hyper", "validate")


def _purpose_key(purpose):
    # crc32 keeps unknown purpose names usable and stable across processes
    if purpose in PURPOSES:
        return PURPOSES.index(purpose)
    return 1000 + zlib.crc32(purpose.encode())


def stream(base_seed, *keys):
    """Return a Philox ``Generator`` for the given key path.

    Keys may be ints or purpose strings; the same path always yields the same
    stream.
    """
    spawn_key = tuple(_purpose_key(k) if isinstance(k, str) else int(k) for k in keys)
    seq = np.random.SeedSequence(int(base_seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(seq))
