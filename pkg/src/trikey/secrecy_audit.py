"""Exact and Monte Carlo measurement of key secrecy, uniformity and errors.

The exact auditor enumerates every positive-probability source block with
its product-law probability, runs the protocol on each, and accumulates
the exact joint law of (keys, transcript, Z^n): no sampling noise, every
reported field is a finite sum.  Probability accumulation uses Kahan
compensation so the 1e-12-level claims stay honest even near the state
budget; entropy sums use ``math.fsum``.

The Monte Carlo auditor replaces enumeration by i.i.d. sampled blocks and
plug-in estimates on empirical frequencies.  One caveat is structural:
private-key leakage is measured against (transcript, Z^n), and a plug-in
estimate against raw Z^n is meaningless once the sequence alphabet blows
up.  The estimator therefore pairs the transcript with a coarsened,
decoder-relevant statistic of Z^n (see ``Protocol.z_statistic``) and the
report labels the resulting figure a lower bound; the exact audit is the
authoritative check at small n.

All audited quantities are rates: divide bits by blocklength.  Reference
key values are terminal X's outputs; recoverability of the other
terminals is measured against them.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .capacity_region import RatePair
from .errors import (
    InternalConsistencyError,
    ParamOutOfRangeError,
    StateSpaceTooLargeError,
)
from .protocol_engine import Protocol, run
from .source_model import JointPmf3, SampleBlock

#: Largest full state space (|X||Y||Z|)^n the exact auditor will touch.
DEFAULT_STATE_BUDGET = 1 << 22
#: Z-sequence spaces up to this size are used raw by the MC auditor when a
#: protocol declares no coarsening statistic.
_MC_FULL_Z_LIMIT = 4096

MODE_EXACT = "exact"
MODE_MONTE_CARLO = "monte_carlo"

ESTIMATOR_EXACT = "exact"
ESTIMATOR_PLUGIN = "plugin"
ESTIMATOR_PLUGIN_LOWER_BOUND = "plugin_lower_bound"


@dataclass(frozen=True)
class SecrecyReport:
    """Every quantity in the epsilon-pair definition, for one protocol run.

    Errors are worst-case-over-terminals probabilities of disagreeing with
    the reference key; leak rates are (1/n) I(key ; adversary view);
    uniformity deficits are (1/n)(log2 |range| - H(key)); cross_key_rate
    is (1/n) I(K_S ; K_P).  ``pk_leak_estimator`` says how the private-key
    leak figure was obtained ("exact", "plugin", or "plugin_lower_bound"
    when Z^n was coarsened).
    """

    n: int
    mode: str
    trials: Optional[int]
    sk_error: float
    pk_error: float
    sk_leak_rate: float
    pk_leak_rate: float
    sk_unif_deficit: float
    pk_unif_deficit: float
    cross_key_rate: float
    sk_rate: float
    pk_rate: float
    pk_leak_estimator: str

    def to_record(self) -> dict:
        """Flat serializable record with exactly the report fields."""
        return {
            "n": self.n,
            "mode": self.mode,
            "trials": self.trials,
            "sk_error": self.sk_error,
            "pk_error": self.pk_error,
            "sk_leak_rate": self.sk_leak_rate,
            "pk_leak_rate": self.pk_leak_rate,
            "sk_unif_deficit": self.sk_unif_deficit,
            "pk_unif_deficit": self.pk_unif_deficit,
            "cross_key_rate": self.cross_key_rate,
            "sk_rate": self.sk_rate,
            "pk_rate": self.pk_rate,
            "pk_leak_estimator": self.pk_leak_estimator,
        }


@dataclass(frozen=True)
class ComplianceVerdict:
    """Pass/fail of the epsilon-pair conditions with per-condition margins.

    ``margins`` carries all six sub-conditions (value minus eps); the four
    ``flags`` group them the way the definition does: both recoverability
    conditions stand alone, secrecy and uniformity are paired per key, and
    a pair flag passes iff the larger of its two margins is <= 0.
    """

    eps: float
    flags: dict
    margins: dict

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_record(self) -> dict:
        return {"eps": self.eps, "passed": self.passed, "flags": dict(self.flags), "margins": dict(self.margins)}


class _KahanMap:
    """Compensated per-key accumulation of probability mass."""

    __slots__ = ("_sums", "_comps")

    def __init__(self):
        self._sums = {}
        self._comps = {}

    def add(self, key, value):
        s = self._sums.get(key, 0.0)
        c = self._comps.get(key, 0.0)
        y = value - c
        t = s + y
        self._comps[key] = (t - s) - y
        self._sums[key] = t

    def total(self, key) -> float:
        return self._sums.get(key, 0.0)

    def as_dict(self) -> dict:
        return dict(self._sums)


def _entropy_of(dist: dict) -> float:
    """Entropy in bits of a {key: probability} table.

    Accumulated masses can overshoot 1 by an ulp or two, which would make
    a point-mass table come out at a tiny negative entropy; that noise is
    clamped to 0 (+ 0.0 also normalizes -0.0 from negating an empty sum).
    """
    value = -math.fsum(p * math.log2(p) for p in dist.values() if p > 0.0) + 0.0
    return _clamp_rate(value, "entropy")


def _project(joint: dict, pick) -> dict:
    grouped = defaultdict(list)
    for key, p in joint.items():
        grouped[pick(key)].append(p)
    return {k: math.fsum(v) for k, v in grouped.items()}


def _mutual_information_of(joint: dict) -> float:
    """I between the two components of a {(a, b): probability} table."""
    h_a = _entropy_of(_project(joint, lambda k: k[0]))
    h_b = _entropy_of(_project(joint, lambda k: k[1]))
    return _clamp_rate(h_a + h_b - _entropy_of(joint), "mutual information")


def _clamp_rate(value: float, what: str) -> float:
    if value < 0.0:
        if value < -1e-10:
            raise InternalConsistencyError(f"{what} = {value!r} negative beyond rounding")
        return 0.0
    return value


def _clip_probability(value: float) -> float:
    return min(1.0, max(0.0, value))


def _finish_report(
    protocol: Protocol,
    mode: str,
    trials: Optional[int],
    joint_ks_f: dict,
    joint_kp_fz: dict,
    joint_keys: dict,
    sk_errors,
    pk_errors,
    pk_leak_estimator: str,
) -> SecrecyReport:
    n = protocol.n
    h_ks = _entropy_of(_project(joint_ks_f, lambda k: k[0]))
    h_f = _entropy_of(_project(joint_ks_f, lambda k: k[1]))
    sk_leak = _clamp_rate(h_ks + h_f - _entropy_of(joint_ks_f), "shared-key leakage")

    h_kp = _entropy_of(_project(joint_kp_fz, lambda k: k[0]))
    h_fz = _entropy_of(_project(joint_kp_fz, lambda k: (k[1], k[2])))
    pk_leak = _clamp_rate(h_kp + h_fz - _entropy_of(joint_kp_fz), "private-key leakage")

    cross = _mutual_information_of(joint_keys)

    return SecrecyReport(
        n=n,
        mode=mode,
        trials=trials,
        sk_error=_clip_probability(max(sk_errors)),
        pk_error=_clip_probability(max(pk_errors)),
        sk_leak_rate=sk_leak / n,
        pk_leak_rate=pk_leak / n,
        sk_unif_deficit=_clamp_rate(math.log2(protocol.sk_range) - h_ks, "shared-key deficit") / n,
        pk_unif_deficit=_clamp_rate(math.log2(protocol.pk_range) - h_kp, "private-key deficit") / n,
        cross_key_rate=cross / n,
        sk_rate=h_ks / n,
        pk_rate=h_kp / n,
        pk_leak_estimator=pk_leak_estimator,
    )


def exact_audit(
    protocol: Protocol, pmf: JointPmf3, state_budget: int = DEFAULT_STATE_BUDGET
) -> SecrecyReport:
    """Audit by exhaustive enumeration of the block space.

    The budget precondition is on the full space (|X||Y||Z|)^n; the
    enumeration itself visits only positive-probability blocks, since
    zero-mass blocks contribute nothing to any accumulated law.
    """
    cx, cy, cz = pmf.card
    n = protocol.n
    full_space = (cx * cy * cz) ** n
    if full_space > state_budget:
        raise StateSpaceTooLargeError(
            f"(|X||Y||Z|)^n = {full_space} exceeds the audit budget {state_budget}"
        )
    flat = np.flatnonzero(pmf.probs > 0)
    sx = (flat // (cy * cz)).astype(np.int64)
    rem = flat % (cy * cz)
    sy = (rem // cz).astype(np.int64)
    sz = (rem % cz).astype(np.int64)
    sp = [float(p) for p in pmf.probs[flat]]
    zpow = [cz ** (n - 1 - t) for t in range(n)]

    joint_ks_f = _KahanMap()
    joint_kp_fz = _KahanMap()
    joint_keys = _KahanMap()
    err_sk = _KahanMap()
    err_pk = _KahanMap()

    for idx in itertools.product(range(len(flat)), repeat=n):
        prob = 1.0
        for i in idx:
            prob *= sp[i]
        sel = np.array(idx, dtype=np.intp)
        block = SampleBlock(n, sx[sel], sy[sel], sz[sel])
        out = run(protocol, block)
        f = out.transcript.payloads
        zcode = sum(int(z) * w for z, w in zip(block.zs, zpow))
        joint_ks_f.add((out.reference_sk, f), prob)
        joint_kp_fz.add((out.reference_pk, f, zcode), prob)
        joint_keys.add((out.reference_sk, out.reference_pk), prob)
        for i, est in enumerate(out.sk_estimates):
            if est != out.reference_sk:
                err_sk.add(i, prob)
        for i, est in enumerate(out.pk_estimates):
            if est != out.reference_pk:
                err_pk.add(i, prob)

    return _finish_report(
        protocol,
        MODE_EXACT,
        None,
        joint_ks_f.as_dict(),
        joint_kp_fz.as_dict(),
        joint_keys.as_dict(),
        [err_sk.total(i) for i in range(3)],
        [err_pk.total(i) for i in range(2)],
        ESTIMATOR_EXACT,
    )


def mc_audit(protocol: Protocol, pmf: JointPmf3, trials: int, seed: int) -> SecrecyReport:
    """Audit by i.i.d. sampling and plug-in estimation.

    Deterministic given (protocol, pmf, trials, seed).  Entropies and
    mutual informations are plug-in values of the empirical joint
    frequencies; error probabilities are empirical frequencies.  For the
    private-key leak, Z^n enters through the protocol's declared
    ``z_statistic``; a protocol without one falls back to the raw Z-code
    when the Z sequence space is small, else to Z's own shared-key
    estimate (always a function of (Z^n, transcript), so the plug-in
    figure only underestimates).
    """
    if trials < 1:
        raise ParamOutOfRangeError("trials must be >= 1")
    n = protocol.n
    cx, cy, cz = pmf.card
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(pmf.probs)
    u = rng.random((trials, n))
    flat = np.searchsorted(cdf, u.ravel(), side="right")
    np.minimum(flat, pmf.probs.size - 1, out=flat)
    flat = flat.reshape(trials, n)
    xs_all = (flat // (cy * cz)).astype(np.int64)
    rem = flat % (cy * cz)
    ys_all = (rem // cz).astype(np.int64)
    zs_all = (rem % cz).astype(np.int64)

    z_stat = protocol.z_statistic
    lossless = protocol.z_statistic_lossless and z_stat is not None
    if z_stat is None and cz ** n <= _MC_FULL_Z_LIMIT:
        zpow = [cz ** (n - 1 - t) for t in range(n)]

        def z_stat(zs, f):
            return sum(int(z) * w for z, w in zip(zs, zpow))

        lossless = True
    # A still-missing statistic falls back to Z's shared-key estimate below.

    count_ks_f: Counter = Counter()
    count_kp_fz: Counter = Counter()
    count_keys: Counter = Counter()
    miss_sk = [0, 0, 0]
    miss_pk = [0, 0]

    for i in range(trials):
        block = SampleBlock(n, xs_all[i], ys_all[i], zs_all[i])
        out = run(protocol, block)
        f = out.transcript.payloads
        stat = z_stat(block.zs, f) if z_stat is not None else out.sk_estimates[2]
        count_ks_f[(out.reference_sk, f)] += 1
        count_kp_fz[(out.reference_pk, f, stat)] += 1
        count_keys[(out.reference_sk, out.reference_pk)] += 1
        for t, est in enumerate(out.sk_estimates):
            if est != out.reference_sk:
                miss_sk[t] += 1
        for t, est in enumerate(out.pk_estimates):
            if est != out.reference_pk:
                miss_pk[t] += 1

    def freq(counter):
        return {k: c / trials for k, c in counter.items()}

    return _finish_report(
        protocol,
        MODE_MONTE_CARLO,
        trials,
        freq(count_ks_f),
        freq(count_kp_fz),
        freq(count_keys),
        [m / trials for m in miss_sk],
        [m / trials for m in miss_pk],
        ESTIMATOR_PLUGIN if lossless else ESTIMATOR_PLUGIN_LOWER_BOUND,
    )


def check_definition(report: SecrecyReport, eps: float) -> ComplianceVerdict:
    """Compare a report against a single shared threshold eps."""
    if eps <= 0:
        raise ParamOutOfRangeError("eps must be positive")
    margins = {
        "sk_error": report.sk_error - eps,
        "pk_error": report.pk_error - eps,
        "sk_leak": report.sk_leak_rate - eps,
        "sk_uniformity": report.sk_unif_deficit - eps,
        "pk_leak": report.pk_leak_rate - eps,
        "pk_uniformity": report.pk_unif_deficit - eps,
    }
    flags = {
        "sk_recoverable": margins["sk_error"] <= 0,
        "pk_recoverable": margins["pk_error"] <= 0,
        "sk_secret_uniform": max(margins["sk_leak"], margins["sk_uniformity"]) <= 0,
        "pk_secret_uniform": max(margins["pk_leak"], margins["pk_uniformity"]) <= 0,
    }
    return ComplianceVerdict(eps, flags, margins)


def achieved_rate_pair(report: SecrecyReport) -> RatePair:
    """The audited ((1/n) H(K_S), (1/n) H(K_P)) point."""
    return RatePair(report.sk_rate, report.pk_rate)
