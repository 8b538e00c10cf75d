"""Deterministic random streams on top of numpy's counter-based Philox generator.

Every random draw in the library comes from a stream addressed by a root
seed, a short ASCII purpose tag, and a tuple of nonnegative integer indices
(replication, iteration, ...).  Distinct addresses yield statistically
independent streams; the same address always reproduces the same draws, no
matter what other streams were consumed in between.  There is no shared
mutable generator state anywhere, which is what makes replications safe to
run in parallel and runs bitwise replayable.
"""

from __future__ import annotations

import numpy as np


def _tag_to_int(tag: str) -> int:
    data = tag.encode("ascii")
    if not data:
        raise ValueError("stream tag must be a nonempty ASCII string")
    return int.from_bytes(data, "little")


def stream(root: int, tag: str, *path: int) -> np.random.Generator:
    """Return the generator addressed by (root, tag, path).

    Parameters
    ----------
    root : int
        Nonnegative root seed of the component that owns the stream.
    tag : str
        Short purpose label, e.g. ``"smoothing-dirs"``.
    path : int
        Index coordinates such as (replication, iteration).
    """
    key = (_tag_to_int(tag),) + tuple(int(p) for p in path)
    if any(p < 0 for p in key[1:]):
        raise ValueError(f"stream path indices must be nonnegative, got {path}")
    seq = np.random.SeedSequence(entropy=int(root), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(root: int, tag: str, *path: int) -> int:
    """Stable sub-seed for a nested component (e.g. a per-replication root)."""
    key = (_tag_to_int(tag),) + tuple(int(p) for p in path)
    seq = np.random.SeedSequence(entropy=int(root), spawn_key=key)
    return int(seq.generate_state(1, np.uint64)[0])
