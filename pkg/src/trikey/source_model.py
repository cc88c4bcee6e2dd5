"""Finite-alphabet three-component sources and i.i.d. block sampling.

A source is a joint probability mass function over a triple (X, Y, Z) of
finite-valued symbols, stored dense and row-major with X outermost.  The
storage order is part of the file-format contract, not an implementation
detail.  All values here are immutable after construction and safe to
share across threads; sampling takes its seed explicitly so parallel
trials can partition the seed space (seed = base + trial index).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadSumError,
    CardTooLargeError,
    NegativeMassError,
    ParamOutOfRangeError,
    ShapeMismatchError,
    SourceSpecError,
)

#: |sum - 1| tolerated on a constructed pmf (after any renormalization).
SUM_TOL = 1e-12
#: |sum - 1| beyond which make_joint_pmf refuses to renormalize.
RENORM_TOL = 1e-9
#: Largest per-axis cardinality random_pmf will generate (keeps exhaustive
#: oracles over its outputs cheap).
RANDOM_PMF_MAX_CARD = 4


class ParameterOrderWarning(UserWarning):
    """Cascade parameters outside the 0 < q < p < 1/2 regime.

    The closed-form region of the two-cascade source assumes that ordering;
    other values are allowed for exploration but flagged.
    """


@dataclass(frozen=True)
class JointPmf3:
    """Dense joint distribution p(x, y, z) on a finite triple alphabet.

    ``probs`` is flat, length |X|*|Y|*|Z|, row-major with x outermost,
    then y, then z.  Invariants (checked at construction): every mass is
    a finite nonnegative float and the masses sum to 1 within ``SUM_TOL``.
    """

    card: tuple[int, int, int]
    probs: np.ndarray

    def __post_init__(self):
        card = tuple(int(c) for c in self.card)
        if len(card) != 3 or any(c < 1 for c in card):
            raise ShapeMismatchError(f"card must be three sizes >= 1, got {self.card!r}")
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "card", card)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size != card[0] * card[1] * card[2]:
            raise ShapeMismatchError(
                f"need {card[0] * card[1] * card[2]} masses for card {card}, got {probs.size}"
            )
        if not np.all(np.isfinite(probs)):
            raise NegativeMassError("masses must be finite")
        if np.any(probs < 0):
            raise NegativeMassError(f"negative mass (min {probs.min():.3e})")
        total = float(probs.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise BadSumError(f"masses sum to {total!r}, not 1 within {SUM_TOL}")
        probs.setflags(write=False)

    @property
    def table(self) -> np.ndarray:
        """The same masses as a read-only (|X|, |Y|, |Z|) array."""
        return self.probs.reshape(self.card)

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.probs))


@dataclass(frozen=True)
class SampleBlock:
    """One n-length i.i.d. realization (x^n, y^n, z^n) of a source."""

    n: int
    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ParamOutOfRangeError(f"blocklength must be >= 1, got {self.n}")
        for name in ("xs", "ys", "zs"):
            seq = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            if seq.shape != (self.n,):
                raise ShapeMismatchError(f"{name} must have length n={self.n}")
            if seq.size and seq.min() < 0:
                raise ShapeMismatchError(f"{name} contains a negative symbol")
            seq.setflags(write=False)
            object.__setattr__(self, name, seq)

    def component(self, terminal: int) -> np.ndarray:
        """Sequence observed by terminal 0 (X), 1 (Y) or 2 (Z)."""
        return (self.xs, self.ys, self.zs)[terminal]


def make_joint_pmf(card, probs) -> JointPmf3:
    """Validate (and, within tolerance, renormalize) a mass table.

    Masses are renormalized only when their sum deviates from 1 by at most
    ``RENORM_TOL``; a larger deviation raises :class:`BadSumError` rather
    than silently rescaling what is probably a mistyped table.
    """
    arr = np.ascontiguousarray(probs, dtype=np.float64)
    card = tuple(int(c) for c in card)
    if len(card) != 3 or any(c < 1 for c in card):
        raise ShapeMismatchError(f"card must be three sizes >= 1, got {card!r}")
    if arr.ndim != 1 or arr.size != card[0] * card[1] * card[2]:
        raise ShapeMismatchError(
            f"need {card[0] * card[1] * card[2]} masses for card {card}, got {arr.size}"
        )
    if not np.all(np.isfinite(arr)):
        raise NegativeMassError("masses must be finite")
    if np.any(arr < 0):
        raise NegativeMassError(f"negative mass (min {arr.min():.3e})")
    total = float(arr.sum())
    if abs(total - 1.0) > RENORM_TOL:
        raise BadSumError(f"masses sum to {total!r}; |sum-1| > {RENORM_TOL}")
    if total != 1.0:
        arr = arr / total
    return JointPmf3(card, arr)


def xor_source() -> JointPmf3:
    """Uniform independent binary (X, Y) with Z = X xor Y."""
    table = np.zeros((2, 2, 2))
    for x in range(2):
        for y in range(2):
            table[x, y, x ^ y] = 0.25
    return JointPmf3((2, 2, 2), table.ravel())


def cascade_bsc_source(p: float, q: float) -> JointPmf3:
    """Binary cascade: uniform X, Y a p-flip of X, Z a q-flip of X.

    The joint is built from the chain factorization P(x) P(y|x) P(z|x), so
    Y and Z are conditionally independent given X by construction.  The
    pairwise tables alone would not pin the joint without that condition.
    """
    for name, value in (("p", p), ("q", q)):
        if not 0.0 <= value <= 1.0:
            raise ParamOutOfRangeError(f"{name}={value!r} outside [0, 1]")
    if not 0.0 < q < p < 0.5:
        warnings.warn(
            f"cascade parameters (p={p}, q={q}) violate 0 < q < p < 1/2; "
            "the closed-form region formulas assume that ordering",
            ParameterOrderWarning,
            stacklevel=2,
        )
    table = np.empty((2, 2, 2))
    for x in range(2):
        for y in range(2):
            py = 1.0 - p if y == x else p
            for z in range(2):
                pz = 1.0 - q if z == x else q
                table[x, y, z] = 0.5 * py * pz
    return make_joint_pmf((2, 2, 2), table.ravel())


def point_mass_source() -> JointPmf3:
    """The degenerate constant source on a single-point alphabet."""
    return JointPmf3((1, 1, 1), np.array([1.0]))


def sample_iid(pmf: JointPmf3, n: int, seed: int) -> SampleBlock:
    """Draw n i.i.d. symbol triples, deterministically in (pmf, n, seed).

    Each position draws one uniform variate and inverts the CDF of the
    flattened mass array in index order, so the stream of symbols is a
    pure function of the seed.
    """
    if n < 1:
        raise ParamOutOfRangeError(f"blocklength must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    cdf = np.cumsum(pmf.probs)
    flat = np.searchsorted(cdf, u, side="right")
    np.minimum(flat, pmf.probs.size - 1, out=flat)
    _, cy, cz = pmf.card
    xs = flat // (cy * cz)
    rem = flat % (cy * cz)
    return SampleBlock(n, xs, rem // cz, rem % cz)


def random_pmf(card, seed: int) -> JointPmf3:
    """Simplex-uniform random pmf (normalized exponential variates).

    Cardinalities are capped at ``RANDOM_PMF_MAX_CARD`` so that property
    tests built on exhaustive enumeration stay cheap.
    """
    card = tuple(int(c) for c in card)
    if len(card) != 3:
        raise ShapeMismatchError(f"card must be a triple, got {card!r}")
    if any(c < 1 or c > RANDOM_PMF_MAX_CARD for c in card):
        raise CardTooLargeError(
            f"cardinalities must lie in [1, {RANDOM_PMF_MAX_CARD}], got {card}"
        )
    rng = np.random.default_rng(seed)
    masses = rng.standard_exponential(card[0] * card[1] * card[2])
    return make_joint_pmf(card, masses / masses.sum())


# Source-spec records: {"type": "table", "card": [...], "p": [...]},
# {"type": "xor"}, or {"type": "cascade_bsc", "p": ..., "q": ...}.
_SPEC_FIELDS = {
    "table": {"type", "card", "p"},
    "xor": {"type"},
    "cascade_bsc": {"type", "p", "q"},
}


def parse_source_spec(record: dict) -> JointPmf3:
    """Build a source from a parsed source-spec record.

    Field names are exact; unknown fields are rejected rather than ignored
    so typos do not silently fall back to defaults.
    """
    if not isinstance(record, dict):
        raise SourceSpecError(f"source spec must be an object, got {type(record).__name__}")
    kind = record.get("type")
    if kind not in _SPEC_FIELDS:
        raise SourceSpecError(f"unknown source type {kind!r}")
    extra = set(record) - _SPEC_FIELDS[kind]
    missing = _SPEC_FIELDS[kind] - set(record)
    if extra or missing:
        raise SourceSpecError(
            f"source type {kind!r}: unexpected fields {sorted(extra)}, missing {sorted(missing)}"
        )
    if kind == "xor":
        return xor_source()
    if kind == "cascade_bsc":
        try:
            return cascade_bsc_source(float(record["p"]), float(record["q"]))
        except (TypeError, ValueError) as exc:
            raise SourceSpecError(f"bad cascade parameters: {exc}") from exc
    try:
        return make_joint_pmf(record["card"], record["p"])
    except (TypeError, ValueError) as exc:
        raise SourceSpecError(f"bad table: {exc}") from exc


def load_source_spec(path) -> JointPmf3:
    """Read a JSON source-spec file and build the source."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            record = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SourceSpecError(f"{path}: not valid JSON ({exc})") from exc
    return parse_source_spec(record)
