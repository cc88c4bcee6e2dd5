"""Reference scalar implementations of the seeded hash chain.

These pure-Python versions define the codebook: both array backends must
reproduce them bit for bit (integer arithmetic, so there is no rounding to
argue about).  The mixer is the splitmix64 finalizer; keying folds the
seed and a purpose tag into the initial state so bin assignments and key
maps drawn from the same seed are independent streams.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# Purpose tags: 0, 1, 2 are the per-terminal bin codebooks.
TAG_SK_MAP = 3
TAG_PK_MAP = 4


def mix64(v: int) -> int:
    """splitmix64 finalizer on a 64-bit value."""
    v &= MASK64
    v = ((v ^ (v >> 30)) * _M1) & MASK64
    v = ((v ^ (v >> 27)) * _M2) & MASK64
    return v ^ (v >> 31)


def hash_state(seed: int, tag: int) -> int:
    """Initial chain state for a (seed, purpose tag) pair."""
    return mix64((seed + GOLDEN * (tag + 1)) & MASK64)


def chain_hash(values, seed: int, tag: int) -> int:
    """Fold a sequence of integers into one keyed 64-bit hash."""
    h = hash_state(seed, tag)
    for v in values:
        h = mix64(((h ^ (int(v) & MASK64)) + GOLDEN) & MASK64)
    return h


def key_of(values, seed: int, tag: int, bits: int) -> int:
    """Uniform random map of an integer tuple into [0, 2**bits)."""
    if bits <= 0:
        return 0
    return chain_hash(values, seed, tag) & ((1 << bits) - 1)
