"""Numba-jitted implementations of the hot kernels.

First call of each kernel pays the JIT cost; ``cache=True`` persists the
compiled artifacts across processes.  No fastmath: decode scores must be
plain sequential IEEE adds so they match the numpy backend bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._scalar import hash_state

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True)
def _hash_codes_jit(codes, h0):
    out = np.empty_like(codes)
    for i in range(codes.size):
        v = (h0 ^ codes[i]) + _GOLDEN
        v = (v ^ (v >> _S30)) * _M1
        v = (v ^ (v >> _S27)) * _M2
        out[i] = v ^ (v >> _S31)
    return out


def hash_codes(codes: np.ndarray, seed: int, tag: int) -> np.ndarray:
    """Keyed 64-bit hash of each code (vector form of chain_hash)."""
    codes = np.ascontiguousarray(codes, dtype=np.uint64)
    return _hash_codes_jit(codes, np.uint64(hash_state(seed, tag)))


@njit(cache=True)
def _decode_pair_jit(own, cand_u, cand_v, logp, pow_u, pow_v, card_u, card_v):
    n = own.size
    ku = cand_u.size
    kv = cand_v.size
    # Hoist the mixed-radix digit extraction out of the pair loop.
    us = np.empty((ku, n), dtype=np.int64)
    for i in range(ku):
        for t in range(n):
            us[i, t] = (cand_u[i] // pow_u[t]) % card_u
    vs = np.empty((kv, n), dtype=np.int64)
    for j in range(kv):
        for t in range(n):
            vs[j, t] = (cand_v[j] // pow_v[t]) % card_v
    best_u = np.int64(-1)
    best_v = np.int64(-1)
    best_s = -np.inf
    for i in range(ku):
        for j in range(kv):
            s = 0.0
            for t in range(n):
                term = logp[own[t], us[i, t], vs[j, t]]
                s = s + term
            # Candidates arrive sorted ascending; strict > keeps the
            # lexicographically first maximizer.
            if best_u < 0 or s > best_s:
                best_s = s
                best_u = cand_u[i]
                best_v = cand_v[j]
    return best_u, best_v


def decode_pair(own, cand_u, cand_v, logp, pow_u, pow_v, card_u, card_v):
    """Most likely (u, v) candidate pair given the decoder's own sequence."""
    u, v = _decode_pair_jit(
        own, cand_u, cand_v, logp, pow_u, pow_v, np.int64(card_u), np.int64(card_v)
    )
    return int(u), int(v)
