"""Pure-numpy implementations of the hot kernels.

Kept semantically identical to the numba backend: hashing is exact integer
arithmetic, and decode scores are accumulated symbol-by-symbol in the same
order, so both backends produce bit-identical results.
"""

from __future__ import annotations

import numpy as np

from ._scalar import hash_state

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


def _mix_vec(v: np.ndarray) -> np.ndarray:
    v = (v ^ (v >> _S30)) * _M1
    v = (v ^ (v >> _S27)) * _M2
    return v ^ (v >> _S31)


def hash_codes(codes: np.ndarray, seed: int, tag: int) -> np.ndarray:
    """Keyed 64-bit hash of each code (vector form of chain_hash)."""
    codes = np.ascontiguousarray(codes, dtype=np.uint64)
    h0 = np.uint64(hash_state(seed, tag))
    return _mix_vec((h0 ^ codes) + _GOLDEN)


def decode_pair(own, cand_u, cand_v, logp, pow_u, pow_v, card_u, card_v):
    """Most likely (u, v) candidate pair given the decoder's own sequence.

    ``logp`` is the per-symbol log-mass table permuted to (own, u, v) axis
    order; candidates are integer sequence codes sorted ascending, so the
    row-major argmax realizes the lexicographic tie-break.  Scores are
    accumulated over symbol positions in order (one add per position per
    pair), matching the numba kernel's summation order exactly.
    """
    ku = cand_u.size
    kv = cand_v.size
    us = (cand_u[:, None] // pow_u[None, :]) % card_u
    vs = (cand_v[:, None] // pow_v[None, :]) % card_v
    scores = np.zeros((ku, kv), dtype=np.float64)
    for t in range(own.size):
        scores += logp[own[t]][us[:, t][:, None], vs[:, t][None, :]]
    flat = int(np.argmax(scores))
    return int(cand_u[flat // kv]), int(cand_v[flat % kv])
