"""Counter-based uniform random numbers (SplitMix64 finaliser).

Every draw is addressed, not sequenced: the value consumed by agent ``i``
in phase ``ph`` of step ``s`` under seed ``q`` is

    u = finalize(key(q, s, ph) + (i + 1) * PHI) * 2**-53

where ``finalize`` is the SplitMix64 output function and ``key`` chains it
over (STREAM_VERSION, seed, step, phase).  Because nothing depends on
evaluation order, the vectorised NumPy path and the per-agent numba loops
produce bit-identical streams, and any draw can be recomputed in isolation.

STREAM_VERSION is bumped if the layout ever changes; results are only
reproducible across versions with equal STREAM_VERSION.
"""

import numpy as np

STREAM_VERSION = 1

_MASK = (1 << 64) - 1
PHI = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_SEED_SALT = 0x71EE2147A6D4B7A1
_STEP_SALT = 0x9FB21C651E98DF25
_PHASE_SALT = 0xD1B54A32D192ED03

# uint64 copies for the vectorised path
_U_PHI = np.uint64(PHI)
_U_MUL1 = np.uint64(_MUL1)
_U_MUL2 = np.uint64(_MUL2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_INV53 = 2.0 ** -53


def mix64(z):
    """SplitMix64 finaliser on a Python int, reduced mod 2**64."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK
    return z ^ (z >> 31)


def stream_key(seed, step, phase):
    """Combine (version, seed, step, phase) into one 64-bit key."""
    h = mix64(STREAM_VERSION * PHI)
    h = mix64(h ^ ((int(seed) * _SEED_SALT) & _MASK))
    h = mix64(h ^ ((int(step) * _STEP_SALT) & _MASK))
    h = mix64(h ^ ((int(phase) * _PHASE_SALT) & _MASK))
    return h


def uniform_at(key, index):
    """The single u in [0,1) addressed by (key, index). Scalar reference path."""
    z = mix64((key + (int(index) + 1) * PHI) & _MASK)
    return (z >> 11) * _INV53


def uniforms_at(key, indices):
    """Vectorised ``uniform_at`` for an integer index array."""
    idx = np.asarray(indices, dtype=np.uint64)
    z = np.uint64(key) + (idx + np.uint64(1)) * _U_PHI
    z = (z ^ (z >> _U30)) * _U_MUL1
    z = (z ^ (z >> _U27)) * _U_MUL2
    z = z ^ (z >> _U31)
    return (z >> _U11).astype(np.float64) * _INV53


def uniforms(key, n):
    """First ``n`` uniforms of the stream (indices 0..n-1)."""
    return uniforms_at(key, np.arange(n, dtype=np.uint64))
