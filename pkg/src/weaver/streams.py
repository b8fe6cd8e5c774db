"""Counter-based random streams.

Every uniform is a pure function of ``(master_seed, stream index, counter)``,
so any replication can be regenerated on its own and a vectorised batch over
many replications produces exactly the numbers a one-at-a-time loop would.

Recipe (generator ``splitmix64-ctr/1``; changing any constant is a new version):

* ``base = mix64(seed + G)``
* ``key(stream) = mix64(base + (stream + 1) * H)``
* ``u(stream, counter) = ((mix64(key + (counter + 1) * G) >> 11) + 0.5) * 2**-53``

with ``G = 0x9E3779B97F4A7C15``, ``H = 0xD1B54A32D192ED03`` and ``mix64`` the
SplitMix64 finaliser.  All arithmetic is modulo ``2**64``; uniforms lie in
the open interval (0, 1).
"""

from __future__ import annotations

import numpy as np

GENERATOR = "splitmix64-ctr/1"

_MASK = (1 << 64) - 1
_G = 0x9E3779B97F4A7C15
_H = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def substream_key(master_seed: int, stream: int) -> int:
    base = mix64(master_seed + _G)
    return mix64(base + (stream + 1) * _H)


def substream_keys(master_seed: int, streams: np.ndarray) -> np.ndarray:
    base = np.uint64(mix64(master_seed + _G))
    s = np.asarray(streams, dtype=np.uint64) + np.uint64(1)
    return _mix64_array(base + s * np.uint64(_H))


def uniforms(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    """Array of shape ``(len(keys), count)``: counters ``start .. start + count - 1``."""
    keys = np.asarray(keys, dtype=np.uint64).reshape(-1, 1)
    ctr = np.arange(start + 1, start + count + 1, dtype=np.uint64).reshape(1, -1)
    bits = _mix64_array(keys + ctr * np.uint64(_G)) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


class CounterStream:
    """Sequential view of one substream, with the ``random(size)`` call shape of numpy generators."""

    def __init__(self, master_seed: int, stream: int = 0):
        self.master_seed = master_seed
        self.stream = stream
        self.key = substream_key(master_seed, stream)
        self.counter = 0

    def random(self, size: int | None = None):
        count = 1 if size is None else int(size)
        out = uniforms(np.array([self.key], dtype=np.uint64), self.counter, count)[0]
        self.counter += count
        return float(out[0]) if size is None else out

    def __repr__(self) -> str:
        return f"CounterStream(seed={self.master_seed}, stream={self.stream}, counter={self.counter})"
