"""Hot numeric kernels with a selectable backend.

The binning protocol's inner loops (codebook hashing over whole sequence
spaces, maximum-likelihood candidate search) dominate simulation runtime,
so they exist twice: a numba-jitted version and a pure-numpy fallback.
The environment variable ``TRIKEY_BACKEND`` picks one:

    TRIKEY_BACKEND=numba   require the jitted kernels (error if numba is missing)
    TRIKEY_BACKEND=numpy   force the pure-numpy path
    unset / auto           numba when importable, else numpy

Both paths produce bit-identical outputs (see tests/test_kernels.py); the
choice only affects speed.  ``benchmarks/bench_backends.py`` compares them.
"""

from __future__ import annotations

import os

from ..errors import TrikeyError
from ._scalar import (
    GOLDEN,
    MASK64,
    TAG_PK_MAP,
    TAG_SK_MAP,
    chain_hash,
    hash_state,
    key_of,
    mix64,
)

_choice = os.environ.get("TRIKEY_BACKEND", "auto").strip().lower() or "auto"

if _choice == "auto":
    try:
        from . import numba_backend as _backend

        BACKEND = "numba"
    except ImportError:
        from . import numpy_backend as _backend

        BACKEND = "numpy"
elif _choice == "numba":
    from . import numba_backend as _backend

    BACKEND = "numba"
elif _choice == "numpy":
    from . import numpy_backend as _backend

    BACKEND = "numpy"
else:
    raise TrikeyError(
        f"TRIKEY_BACKEND must be 'numba', 'numpy' or 'auto', got {_choice!r}"
    )

hash_codes = _backend.hash_codes
decode_pair = _backend.decode_pair


def backend_name() -> str:
    """Name of the active kernel backend ("numba" or "numpy")."""
    return BACKEND


__all__ = [
    "BACKEND",
    "GOLDEN",
    "MASK64",
    "TAG_PK_MAP",
    "TAG_SK_MAP",
    "backend_name",
    "chain_hash",
    "decode_pair",
    "hash_codes",
    "hash_state",
    "key_of",
    "mix64",
]
