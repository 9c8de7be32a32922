"""Counter-based uniform draws.

Every uniform is a pure function of ``(seed, stream, agent, stimulus)``, so
any partition of the agents over workers reproduces the serial result bit for
bit. The mixing function is the SplitMix64 finalizer applied once per
coordinate.
"""

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _fold(h, c):
    with np.errstate(over="ignore"):
        return _mix(h ^ (np.asarray(c, dtype=np.uint64) * _GOLDEN + _GOLDEN))


def stream_id(name):
    """Stable 64-bit stream identifier for a string key."""
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def counter_uniforms(seed, stream, agents, stimuli):
    """Uniforms in [0, 1) of shape ``(len(agents), len(stimuli))``.

    Parameters
    ----------
    seed, stream : int
        64-bit master seed and stream key.
    agents, stimuli : array_like of int
        Counter coordinates.
    """
    h = _fold(np.array([seed & _MASK64], dtype=np.uint64), np.uint64(stream & _MASK64))
    a = np.asarray(agents, dtype=np.uint64)[:, None]
    s = np.asarray(stimuli, dtype=np.uint64)[None, :]
    h = _fold(_fold(h, a), s)
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
