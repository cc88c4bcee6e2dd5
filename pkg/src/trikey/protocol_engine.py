"""Deterministic public-discussion protocols on the slot-indexed broadcast model.

Communication happens in rounds of three consecutive time slots; the slot-t
sender is terminal ((t-1) mod 3), i.e. X, Y, Z cyclically.  A slot map sees
only its sender's own observed sequence and the strictly prior public
messages; key maps see the own sequence plus the full transcript.  No
terminal randomization exists anywhere: randomness enters only through the
public codebook seed fixed in the protocol description before any
observation, so every run is a pure function of (protocol, block).

Built-in constructions:

* two tiny perfect schemes for the xor source (one 1-bit all-terminal key
  at blocklength 2, one 1-bit private key at blocklength 1),
* ``time_share``: block concatenation, realizing convex combinations of
  rate pairs,
* ``binning_protocol``: one autonomous hash-bin broadcast per terminal,
  maximum-likelihood reconstruction of the other two sequences, then
  seeded uniform key extraction from the reconstruction.  Whatever
  secrecy/recoverability this achieves is measured by the auditor, never
  assumed.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import (
    InternalConsistencyError,
    LengthMismatchError,
    ParamOutOfRangeError,
    ProtocolSpecError,
    RateInfeasibleError,
)
from .info_measures import conditional_entropy
from .source_model import JointPmf3, SampleBlock

#: Cap on materialized sequence spaces and on per-decode candidate pairs.
DEFAULT_ML_BUDGET = 1 << 24

SlotMap = Callable[[np.ndarray, tuple], int]
KeyMap = Callable[[np.ndarray, tuple], int]


@dataclass(frozen=True)
class Transcript:
    """All public messages of one run: ((slot, sender, payload), ...).

    Senders are 1-indexed (X=1, Y=2, Z=3) and determined by the slot, so
    the sender law i = t mod 3 (with 3 for 0) is checked, not trusted.
    """

    messages: tuple
    rounds: int
    payload_cards: tuple

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "payload_cards", tuple(self.payload_cards))
        if self.rounds < 0:
            raise ParamOutOfRangeError("rounds must be nonnegative")
        if len(self.messages) != 3 * self.rounds or len(self.payload_cards) != len(self.messages):
            raise LengthMismatchError("transcript must carry exactly 3*rounds slots")
        for pos, (slot, sender, payload) in enumerate(self.messages):
            if slot != pos + 1:
                raise InternalConsistencyError(f"slots must be consecutive; slot {slot} at {pos}")
            if sender != ((slot - 1) % 3) + 1:
                raise InternalConsistencyError(f"slot {slot} sender {sender} breaks i = t mod 3")
            if not 0 <= payload < self.payload_cards[pos]:
                raise InternalConsistencyError(f"slot {slot} payload {payload} out of range")

    @property
    def payloads(self) -> tuple:
        return tuple(m[2] for m in self.messages)


@dataclass(frozen=True, eq=False)
class Protocol:
    """A deterministic protocol: slot maps, key maps, declared key ranges.

    ``z_statistic`` is an optional map (z-sequence, transcript payloads) ->
    hashable value used only by the Monte Carlo auditor as a coarsened
    stand-in for the raw Z^n when estimating private-key leakage;
    ``z_statistic_lossless`` records whether it determines Z^n exactly.
    """

    n: int
    rounds: int
    slot_maps: tuple
    payload_cards: tuple
    sk_maps: tuple
    pk_maps: tuple
    sk_range: int
    pk_range: int
    codebook_seed: int = 0
    descriptor: dict = field(default_factory=dict)
    z_statistic: Optional[KeyMap] = None
    z_statistic_lossless: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ParamOutOfRangeError("blocklength must be >= 1")
        if self.rounds < 0 or len(self.slot_maps) != 3 * self.rounds:
            raise LengthMismatchError("need exactly 3*rounds slot maps")
        if len(self.payload_cards) != len(self.slot_maps):
            raise LengthMismatchError("need one payload alphabet per slot")
        if len(self.sk_maps) != 3 or len(self.pk_maps) != 2:
            raise LengthMismatchError("need 3 shared-key maps and 2 private-key maps")
        if self.sk_range < 1 or self.pk_range < 1:
            raise ParamOutOfRangeError("key ranges must be >= 1")


@dataclass(frozen=True)
class ProtocolOutcome:
    """Transcript plus every terminal's key estimates for one block.

    The reference key values are terminal X's outputs; audits measure the
    other terminals' recoverability against them.
    """

    transcript: Transcript
    sk_estimates: tuple
    pk_estimates: tuple
    reference_sk: int
    reference_pk: int


def run(protocol: Protocol, block: SampleBlock) -> ProtocolOutcome:
    """Execute the protocol on one block; pure and bit-reproducible.

    Slot maps are fed only the sender's own component and the strictly
    prior payloads, enforcing causality structurally.
    """
    if block.n != protocol.n:
        raise LengthMismatchError(f"block length {block.n} != protocol blocklength {protocol.n}")
    comps = (block.xs, block.ys, block.zs)
    payloads: list = []
    messages = []
    for t in range(1, 3 * protocol.rounds + 1):
        sender = (t - 1) % 3
        payload = int(protocol.slot_maps[t - 1](comps[sender], tuple(payloads)))
        if not 0 <= payload < protocol.payload_cards[t - 1]:
            raise InternalConsistencyError(
                f"slot {t} produced payload {payload} outside its declared alphabet"
            )
        payloads.append(payload)
        messages.append((t, sender + 1, payload))
    transcript = Transcript(tuple(messages), protocol.rounds, protocol.payload_cards)
    f = transcript.payloads
    sk_estimates = tuple(int(m(comps[i], f)) for i, m in enumerate(protocol.sk_maps))
    pk_estimates = tuple(int(m(comps[i], f)) for i, m in enumerate(protocol.pk_maps))
    for est in sk_estimates:
        if not 0 <= est < protocol.sk_range:
            raise InternalConsistencyError(f"shared-key estimate {est} out of declared range")
    for est in pk_estimates:
        if not 0 <= est < protocol.pk_range:
            raise InternalConsistencyError(f"private-key estimate {est} out of declared range")
    return ProtocolOutcome(transcript, sk_estimates, pk_estimates, sk_estimates[0], pk_estimates[0])


def example1_sk_protocol() -> Protocol:
    """1-bit all-terminal key at n = 2 (perfect on the xor source).

    X announces its first symbol, Y its second, Z the xor of its two; each
    terminal then recovers all six symbols through the xor relations and
    outputs X's second symbol as the key.  Run on any other source the
    maps still execute (masked to one bit) and the auditor just measures
    the resulting errors.
    """

    def f1(own, prior):
        return int(own[0]) & 1

    def f2(own, prior):
        return int(own[1]) & 1

    def f3(own, prior):
        return (int(own[0]) ^ int(own[1])) & 1

    def sk_x(own, f):
        return int(own[1]) & 1

    def sk_y(own, f):
        # X2 = F3 ^ Z1 ^ Z2 ... = F3 ^ (X1^Y1) ^ (X2^Y2) ^ X2; via F1 and own ys.
        return (f[2] ^ f[0] ^ int(own[0]) ^ int(own[1])) & 1

    def sk_z(own, f):
        return (int(own[1]) ^ f[1]) & 1

    def const(own, f):
        return 0

    def z_stat(zs, f):
        return (int(zs[0]) << 1) | (int(zs[1]) & 1)

    return Protocol(
        n=2,
        rounds=1,
        slot_maps=(f1, f2, f3),
        payload_cards=(2, 2, 2),
        sk_maps=(sk_x, sk_y, sk_z),
        pk_maps=(const, const),
        sk_range=2,
        pk_range=1,
        descriptor={"type": "example1_sk"},
        z_statistic=z_stat,
        z_statistic_lossless=True,
    )


def example1_pk_protocol() -> Protocol:
    """1-bit X-Y private key at n = 1 (perfect on the xor source).

    Only slot 3 carries a message: Z announces its symbol, X xors it with
    its own to recover Y's symbol, and Y outputs its symbol directly.
    """

    def silent(own, prior):
        return 0

    def f3(own, prior):
        return int(own[0]) & 1

    def const(own, f):
        return 0

    def pk_x(own, f):
        return (int(own[0]) ^ f[2]) & 1

    def pk_y(own, f):
        return int(own[0]) & 1

    def z_stat(zs, f):
        return int(zs[0]) & 1

    return Protocol(
        n=1,
        rounds=1,
        slot_maps=(silent, silent, f3),
        payload_cards=(1, 1, 2),
        sk_maps=(const, const, const),
        pk_maps=(pk_x, pk_y),
        sk_range=1,
        pk_range=2,
        descriptor={"type": "example1_pk"},
        z_statistic=z_stat,
        z_statistic_lossless=True,
    )


def time_share(proto_a: Protocol, proto_b: Protocol, repeats_a: int, repeats_b: int) -> Protocol:
    """Block-concatenate repeats_a copies of A then repeats_b copies of B.

    Blocklengths and rounds add; each copy's maps see only its own symbol
    segment and its own slots of the transcript (constituents are
    autonomous, so no interleaving is needed).  Keys are the tuples of
    constituent keys, encoded mixed-radix in copy order, so the declared
    ranges multiply and achieved key bits add exactly.
    """
    if repeats_a < 0 or repeats_b < 0 or repeats_a + repeats_b < 1:
        raise ParamOutOfRangeError("need a nonnegative number of copies, at least one total")
    copies = [proto_a] * repeats_a + [proto_b] * repeats_b
    segments = []
    sym0 = 0
    slot0 = 0
    for copy in copies:
        segments.append((copy, sym0, slot0))
        sym0 += copy.n
        slot0 += 3 * copy.rounds

    slot_maps = []
    payload_cards = []
    for copy, s0, t0 in segments:
        for j, fmap in enumerate(copy.slot_maps):
            def wrapped(own, prior, _f=fmap, _s0=s0, _n=copy.n, _t0=t0, _j=j):
                return _f(own[_s0:_s0 + _n], tuple(prior[_t0:_t0 + _j]))

            slot_maps.append(wrapped)
        payload_cards.extend(copy.payload_cards)

    def combined(maps_index, which):
        def keymap(own, f):
            k = 0
            for copy, s0, t0 in segments:
                sub = f[t0:t0 + 3 * copy.rounds]
                maps = copy.sk_maps if which == "sk" else copy.pk_maps
                rng = copy.sk_range if which == "sk" else copy.pk_range
                k = k * rng + int(maps[maps_index](own[s0:s0 + copy.n], sub))
            return k

        return keymap

    sk_range = math.prod(c.sk_range for c in copies)
    pk_range = math.prod(c.pk_range for c in copies)

    z_statistic = None
    lossless = False
    if all(c.z_statistic is not None for c in copies):
        def z_statistic(zs, f, _segs=tuple(segments)):
            return tuple(
                copy.z_statistic(zs[s0:s0 + copy.n], f[t0:t0 + 3 * copy.rounds])
                for copy, s0, t0 in _segs
            )

        lossless = all(c.z_statistic_lossless for c in copies)

    return Protocol(
        n=sum(c.n for c in copies),
        rounds=sum(c.rounds for c in copies),
        slot_maps=tuple(slot_maps),
        payload_cards=tuple(payload_cards),
        sk_maps=tuple(combined(i, "sk") for i in range(3)),
        pk_maps=tuple(combined(i, "pk") for i in range(2)),
        sk_range=sk_range,
        pk_range=pk_range,
        descriptor={
            "type": "timeshare",
            "a": dict(proto_a.descriptor),
            "b": dict(proto_b.descriptor),
            "repeats_a": repeats_a,
            "repeats_b": repeats_b,
        },
        z_statistic=z_statistic,
        z_statistic_lossless=lossless,
    )


def _ceil_bits(x: float) -> int:
    # Snap fp noise at integer boundaries before taking the ceiling.
    return max(0, math.ceil(x - 1e-9))


def binning_protocol(
    pmf: JointPmf3,
    n: int,
    slack: float,
    sk_rate: float,
    pk_rate: float,
    seed: int,
    ml_budget: int = DEFAULT_ML_BUDGET,
) -> Protocol:
    """One-round hash-binning protocol with ML reconstruction.

    Each terminal broadcasts a seeded-hash bin index of its own sequence at
    rate (conditional entropy given both other terminals) + slack bits per
    symbol; the per-decoder pair of announced rates then sits at the corner
    sufficient for reconstructing the two unknown sequences.  Decoding is
    an exhaustive likelihood maximization over the announced bins under
    the product law, ties broken by lexicographic sequence order; it is
    deterministic and testable where typicality decoders at desk-scale n
    are neither.  Keys are independent seeded uniform maps of the
    reconstructed sequences: the shared key hashes (x, y, z), the private
    key hashes (x, y) only.

    The codebook seed is part of the protocol description, fixed before
    any observation; audits condition on it.
    """
    if n < 1:
        raise ParamOutOfRangeError("blocklength must be >= 1")
    if slack <= 0:
        raise ParamOutOfRangeError("slack must be positive")
    if sk_rate < 0 or pk_rate < 0:
        raise ParamOutOfRangeError("key rates must be nonnegative")
    cards = pmf.card
    others = ((1, 2), (0, 2), (0, 1))
    labels = "XYZ"
    bin_bits = []
    for i in range(3):
        h = conditional_entropy(pmf, labels[i], labels[others[i][0]] + labels[others[i][1]])
        bin_bits.append(_ceil_bits(n * (h + slack)))
    sk_bits = _ceil_bits(n * sk_rate)
    pk_bits = _ceil_bits(n * pk_rate)
    if max(*bin_bits, sk_bits, pk_bits) > 62:
        raise RateInfeasibleError("bin or key index exceeds 62 bits")

    spaces = [cards[i] ** n for i in range(3)]
    for i in range(3):
        if spaces[i] > ml_budget:
            raise RateInfeasibleError(
                f"terminal {labels[i]} sequence space {spaces[i]} exceeds budget {ml_budget}"
            )

    # Codebooks: bin index of every sequence code, plus bin-sorted order
    # arrays so members of a bin are a contiguous, code-ascending slice.
    bins_by_code = []
    order_by_bin = []
    sorted_bins = []
    max_occ = []
    for i in range(3):
        codes = np.arange(spaces[i], dtype=np.uint64)
        mask = np.uint64((1 << bin_bits[i]) - 1)
        bins = (kernels.hash_codes(codes, seed, i) & mask).astype(np.int64)
        order = np.argsort(bins, kind="stable").astype(np.int64)
        bins_by_code.append(bins)
        order_by_bin.append(order)
        sorted_bins.append(bins[order])
        _, counts = np.unique(bins, return_counts=True)
        max_occ.append(int(counts.max()))
    for d in range(3):
        u, v = others[d]
        if max_occ[u] * max_occ[v] > ml_budget:
            raise RateInfeasibleError(
                f"decoder {labels[d]} may face {max_occ[u] * max_occ[v]} candidate pairs "
                f"(budget {ml_budget}); increase slack or lower n"
            )

    pows = [
        np.array([cards[i] ** (n - 1 - t) for t in range(n)], dtype=np.int64) for i in range(3)
    ]
    with np.errstate(divide="ignore"):
        logp = np.log(pmf.table)
    perms = ((0, 1, 2), (1, 0, 2), (2, 0, 1))
    lp_perm = [np.ascontiguousarray(np.transpose(logp, perms[d])) for d in range(3)]

    def encode(i, seq):
        return int(np.dot(np.asarray(seq, dtype=np.int64), pows[i]))

    def members(i, b):
        lo = int(np.searchsorted(sorted_bins[i], b, side="left"))
        hi = int(np.searchsorted(sorted_bins[i], b, side="right"))
        return order_by_bin[i][lo:hi]

    @functools.lru_cache(maxsize=1 << 20)
    def reconstruct(d, own_code, b_u, b_v):
        """Decoder d's ML reconstruction (x, y, z) of all three codes."""
        u, v = others[d]
        cand_u = members(u, b_u)
        cand_v = members(v, b_v)
        own_syms = (np.int64(own_code) // pows[d]) % cards[d]
        code_u, code_v = kernels.decode_pair(
            own_syms, cand_u, cand_v, lp_perm[d], pows[u], pows[v], cards[u], cards[v]
        )
        triple = [0, 0, 0]
        triple[d] = own_code
        triple[u] = code_u
        triple[v] = code_v
        return tuple(triple)

    def make_slot_map(i):
        def slot_map(own, prior):
            return int(bins_by_code[i][encode(i, own)])

        return slot_map

    def make_sk_map(d):
        def sk_map(own, f):
            u, v = others[d]
            triple = reconstruct(d, encode(d, own), f[u], f[v])
            return kernels.key_of(triple, seed, kernels.TAG_SK_MAP, sk_bits)

        return sk_map

    def make_pk_map(d):
        def pk_map(own, f):
            u, v = others[d]
            triple = reconstruct(d, encode(d, own), f[u], f[v])
            return kernels.key_of(triple[:2], seed, kernels.TAG_PK_MAP, pk_bits)

        return pk_map

    def z_stat(zs, f):
        # The coarsened statistic the MC auditor pairs with the transcript:
        # the private-key map applied to Z's own reconstruction (Z's bin
        # index already rides along inside the transcript itself).
        triple = reconstruct(2, encode(2, zs), f[0], f[1])
        return kernels.key_of(triple[:2], seed, kernels.TAG_PK_MAP, pk_bits)

    return Protocol(
        n=n,
        rounds=1,
        slot_maps=tuple(make_slot_map(i) for i in range(3)),
        payload_cards=tuple(1 << b for b in bin_bits),
        sk_maps=tuple(make_sk_map(d) for d in range(3)),
        pk_maps=tuple(make_pk_map(d) for d in range(2)),
        sk_range=1 << sk_bits,
        pk_range=1 << pk_bits,
        codebook_seed=seed,
        descriptor={
            "type": "binning",
            "n": n,
            "slack": slack,
            "sk_rate": sk_rate,
            "pk_rate": pk_rate,
            "seed": seed,
        },
        z_statistic=z_stat,
        z_statistic_lossless=False,
    )


_DESCRIPTOR_FIELDS = {
    "example1_sk": {"type"},
    "example1_pk": {"type"},
    "binning": {"type", "n", "slack", "sk_rate", "pk_rate", "seed"},
    "timeshare": {"type", "a", "b", "repeats_a", "repeats_b"},
}


def protocol_from_descriptor(
    record: dict, pmf: JointPmf3 | None = None, ml_budget: int = DEFAULT_ML_BUDGET
) -> Protocol:
    """Rebuild a protocol from its serialized descriptor record.

    Binning descriptors need the source distribution to reconstruct their
    codebook tables, so ``pmf`` is required for them (and for time-shares
    that contain them).
    """
    if not isinstance(record, dict):
        raise ProtocolSpecError(f"protocol descriptor must be an object, got {type(record).__name__}")
    kind = record.get("type")
    if kind not in _DESCRIPTOR_FIELDS:
        raise ProtocolSpecError(f"unknown protocol type {kind!r}")
    extra = set(record) - _DESCRIPTOR_FIELDS[kind]
    missing = _DESCRIPTOR_FIELDS[kind] - set(record)
    if extra or missing:
        raise ProtocolSpecError(
            f"protocol type {kind!r}: unexpected fields {sorted(extra)}, missing {sorted(missing)}"
        )
    if kind == "example1_sk":
        return example1_sk_protocol()
    if kind == "example1_pk":
        return example1_pk_protocol()
    if kind == "timeshare":
        try:
            repeats_a = int(record["repeats_a"])
            repeats_b = int(record["repeats_b"])
        except (TypeError, ValueError) as exc:
            raise ProtocolSpecError(f"bad repeat counts: {exc}") from exc
        return time_share(
            protocol_from_descriptor(record["a"], pmf, ml_budget),
            protocol_from_descriptor(record["b"], pmf, ml_budget),
            repeats_a,
            repeats_b,
        )
    if pmf is None:
        raise ProtocolSpecError("binning descriptors need a source distribution")
    try:
        return binning_protocol(
            pmf,
            int(record["n"]),
            float(record["slack"]),
            float(record["sk_rate"]),
            float(record["pk_rate"]),
            int(record["seed"]),
            ml_budget=ml_budget,
        )
    except (TypeError, ValueError) as exc:
        raise ProtocolSpecError(f"bad binning parameters: {exc}") from exc


def with_corrupted_slot(protocol: Protocol, slot: int) -> Protocol:
    """Copy of the protocol whose given slot (1-based) sends a constant.

    Fault-injection hook used by the CLI's negative-path check of the
    reproduction suite; keys and declared alphabets are untouched.
    """
    if not 1 <= slot <= len(protocol.slot_maps):
        raise ParamOutOfRangeError(f"slot {slot} out of range")

    def broken(own, prior):
        return 0

    maps = list(protocol.slot_maps)
    maps[slot - 1] = broken
    return replace(protocol, slot_maps=tuple(maps))
