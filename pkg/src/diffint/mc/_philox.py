"""Counter-based random numbers: Philox4x32-10 mapped to unit normals.

Sample ``i`` of a stream owns blocks ``(i_lo32, i_hi32, b, 0)`` for block
index ``b``; the 64-bit seed is the key.  Each 4-word block yields two
doubles built from 53 mantissa bits, mapped through the inverse normal CDF.
Every draw is therefore a pure function of ``(seed, sample, block)``:
samples can be generated in any order, in any partition, on any worker, and
always reproduce bit-identically.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

# Multipliers and key schedule (Weyl) constants of Philox4x32.
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_ROUNDS = 10

#: Normal draws consumed per Monte Carlo sample (2 per 4-word block).
N_SLOTS = 18
_N_BLOCKS = N_SLOTS // 2

_U32 = np.uint64(0xFFFFFFFF)
_TWO_POW_26 = float(1 << 26)
_INV_TWO_POW_53 = 1.0 / float(1 << 53)


def philox4x32(counter: np.ndarray, key: np.ndarray) -> np.ndarray:
    """Apply the 10-round Philox4x32 bijection.

    ``counter``: uint32 array (..., 4); ``key``: uint32 array (..., 2),
    broadcastable against the counter's leading shape.  Returns the output
    words as a uint32 array shaped like ``counter``.
    """
    counter = np.asarray(counter, dtype=np.uint32)
    key = np.asarray(key, dtype=np.uint32)
    c0 = counter[..., 0].copy()
    c1 = counter[..., 1].copy()
    c2 = counter[..., 2].copy()
    c3 = counter[..., 3].copy()
    k0 = key[..., 0].copy()
    k1 = key[..., 1].copy()
    # uint32 wraparound is the intended modular arithmetic of the key
    # schedule; silence the scalar overflow warning it triggers.
    with np.errstate(over="ignore"):
        for round_index in range(_ROUNDS):
            if round_index:
                k0 = (k0 + _W0).astype(np.uint32)
                k1 = (k1 + _W1).astype(np.uint32)
            prod0 = _M0 * c0.astype(np.uint64)
            prod1 = _M1 * c2.astype(np.uint64)
            hi0 = (prod0 >> np.uint64(32)).astype(np.uint32)
            lo0 = (prod0 & _U32).astype(np.uint32)
            hi1 = (prod1 >> np.uint64(32)).astype(np.uint32)
            lo1 = (prod1 & _U32).astype(np.uint32)
            c0 = hi1 ^ c1 ^ k0
            c1 = lo1
            c2 = hi0 ^ c3 ^ k1
            c3 = lo0
    return np.stack([c0, c1, c2, c3], axis=-1)


def _uniforms_from_words(w_hi: np.ndarray, w_lo: np.ndarray) -> np.ndarray:
    """53-bit open-interval uniforms from two 32-bit words."""
    mant = (w_hi >> np.uint32(5)).astype(np.float64) * _TWO_POW_26
    mant += (w_lo >> np.uint32(6)).astype(np.float64)
    return (mant + 0.5) * _INV_TWO_POW_53


def generate_normals(seed: int, n_samples: int, start: int = 0) -> np.ndarray:
    """Unit normals for samples ``start .. start + n_samples - 1``.

    Returns an (n_samples, N_SLOTS) float64 array.  Partitioning the range
    and concatenating reproduces a single full call exactly.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    if start < 0:
        raise ValueError(f"start must be nonnegative, got {start}")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    out = np.empty((n_samples, N_SLOTS), dtype=np.float64)
    index = np.arange(start, start + n_samples, dtype=np.uint64)[:, None]
    counter = np.empty((n_samples, _N_BLOCKS, 4), dtype=np.uint32)
    counter[..., 0] = (index & _U32).astype(np.uint32)
    counter[..., 1] = (index >> np.uint64(32)).astype(np.uint32)
    counter[..., 2] = np.arange(_N_BLOCKS, dtype=np.uint32)[None, :]
    counter[..., 3] = np.uint32(0)
    key = np.array([seed & 0xFFFFFFFF, seed >> 32], dtype=np.uint32)
    words = philox4x32(counter, key)
    out[:, 0::2] = ndtri(_uniforms_from_words(words[..., 0], words[..., 1]))
    out[:, 1::2] = ndtri(_uniforms_from_words(words[..., 2], words[..., 3]))
    return out
