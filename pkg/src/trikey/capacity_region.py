"""Rate-region bounds for simultaneous secret-key / private-key generation.

The two rates are R_S (key shared by all three terminals) and R_P (key for
terminals X and Y, concealed from Z).  Regions are stored as intersections
of half-planes over (R_S, R_P), implicitly cut with the nonnegative
quadrant; that matches how the bounds are naturally stated and makes
containment O(#planes).  Convexity is automatic in this representation.

Three scalar quantities drive everything:

    a = I(Z ; X,Y)
    b = min{ I(X ; Y,Z), I(Y ; X,Z) }
    c = (H(X) + H(Y) + H(Z) - H(X,Y,Z)) / 2

The largest all-terminal key rate is min{a, b, c}; the largest private-key
rate is I(X ; Y | Z).  The outer bound stacks four inequalities on top of
those; the inner bound is a two-plane region whose slanted plane has slope
(min{a,b,c} - min{I(X;Z), I(Y;Z)}) / I(X;Y|Z).  When min{a,b,c} = b the
two coincide and the region is known exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import ParamOutOfRangeError, ShapeMismatchError, UnboundedRegionError
from .info_measures import (
    conditional_mutual_information,
    entropy,
    mutual_information,
)
from .source_model import JointPmf3

logger = logging.getLogger(__name__)

#: Geometric tolerance for vertex feasibility, dedup and snapping.  Fixed
#: so exported polygons are bit-stable across runs.
GEOM_TOL = 1e-9
#: Below this the private-key direction is treated as degenerate.
DEGENERATE_TOL = 1e-12

REGION_KINDS = ("outer", "inner", "exact")

CASE_THEOREM3 = "theorem3"
CASE_ONE = "case1"
CASE_TWO = "case2"
CASE_IMPOSSIBLE = "impossible_case"


@dataclass(frozen=True)
class RatePair:
    """A nonnegative (R_S, R_P) point, bits per source symbol."""

    rs: float
    rp: float

    def __post_init__(self):
        if self.rs < 0 or self.rp < 0:
            raise ParamOutOfRangeError(f"rates must be nonnegative, got ({self.rs}, {self.rp})")


@dataclass(frozen=True)
class AbcTriple:
    """The three scalar bound ingredients, bits per source symbol."""

    a: float
    b: float
    c: float

    def min_value(self) -> float:
        return min(self.a, self.b, self.c)


@dataclass(frozen=True)
class HalfPlane:
    """Constraint coef_rs * rs + coef_rp * rp <= bound.

    Stored canonically with max(|coef_rs|, |coef_rp|) = 1 so half-planes
    from different constructions compare directly.
    """

    coef_rs: float
    coef_rp: float
    bound: float
    label: str

    def __post_init__(self):
        scale = max(abs(self.coef_rs), abs(self.coef_rp))
        if scale == 0.0:
            raise ShapeMismatchError(f"half-plane {self.label!r} has zero normal")
        if scale != 1.0:
            object.__setattr__(self, "coef_rs", self.coef_rs / scale)
            object.__setattr__(self, "coef_rp", self.coef_rp / scale)
            object.__setattr__(self, "bound", self.bound / scale)

    def value(self, rs: float, rp: float) -> float:
        return self.coef_rs * rs + self.coef_rp * rp

    def satisfied(self, rs: float, rp: float, tol: float = GEOM_TOL) -> bool:
        return self.value(rs, rp) <= self.bound + tol


def _recession_directions(halfplanes):
    """Candidate extreme rays of the feasible cone inside the quadrant."""
    dirs = [(1.0, 0.0), (0.0, 1.0)]
    for h in halfplanes:
        for d in ((h.coef_rp, -h.coef_rs), (-h.coef_rp, h.coef_rs)):
            if d[0] >= -DEGENERATE_TOL and d[1] >= -DEGENERATE_TOL:
                norm = math.hypot(d[0], d[1])
                if norm > 0:
                    dirs.append((max(d[0], 0.0) / norm, max(d[1], 0.0) / norm))
    return dirs


def _check_bounded(halfplanes, kind: str):
    # Unbounded iff some nonzero quadrant direction escapes every cut; it
    # suffices to test the axes and each constraint's boundary directions.
    for dx, dy in _recession_directions(halfplanes):
        if all(h.coef_rs * dx + h.coef_rp * dy <= DEGENERATE_TOL for h in halfplanes):
            raise UnboundedRegionError(
                f"{kind} region is unbounded along direction ({dx:.3g}, {dy:.3g})"
            )


@dataclass(frozen=True)
class RegionSpec:
    """A 2D rate region: half-planes intersected with the quadrant."""

    halfplanes: tuple[HalfPlane, ...]
    kind: str

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ShapeMismatchError(f"kind must be one of {REGION_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "halfplanes", tuple(self.halfplanes))
        if not self.halfplanes:
            raise ShapeMismatchError("region needs at least one half-plane")
        _check_bounded(self.halfplanes, self.kind)


@dataclass(frozen=True)
class LabeledPoint:
    """A named rate point; ``clamped`` marks coordinates lifted to 0."""

    label: str
    point: RatePair
    clamped: bool = False


def compute_abc(pmf: JointPmf3) -> AbcTriple:
    """Evaluate the three scalar ingredients a, b, c for a source."""
    a = mutual_information(pmf, "Z", "XY")
    b = min(mutual_information(pmf, "X", "YZ"), mutual_information(pmf, "Y", "XZ"))
    c = 0.5 * (
        entropy(pmf, "X") + entropy(pmf, "Y") + entropy(pmf, "Z") - entropy(pmf, "XYZ")
    )
    return AbcTriple(a, b, max(c, 0.0))


def sk_capacity(pmf: JointPmf3) -> float:
    """Largest achievable rate of a key shared by all three terminals."""
    return compute_abc(pmf).min_value()


def pk_capacity(pmf: JointPmf3) -> float:
    """Largest achievable rate of an X-Y key concealed from Z: I(X;Y|Z)."""
    return conditional_mutual_information(pmf, "X", "Y", "Z")


def outer_bound(pmf: JointPmf3) -> RegionSpec:
    """The four-plane outer bound.

    Redundant half-planes are retained with their labels: which constraint
    binds is data worth exporting, not an error.
    """
    abc = compute_abc(pmf)
    p_cap = pk_capacity(pmf)
    planes = (
        HalfPlane(1.0, 0.0, abc.a, "eq6"),
        HalfPlane(0.0, 1.0, p_cap, "eq7"),
        HalfPlane(1.0, 1.0, abc.b, "eq8"),
        HalfPlane(2.0, 1.0, 2.0 * abc.c, "eq9"),
    )
    return RegionSpec(planes, "outer")


def inner_bound(pmf: JointPmf3) -> RegionSpec:
    """The two-plane achievable region.

    The slanted plane's slope is implemented literally, including a
    negative value if min{a,b,c} < min{I(X;Z), I(Y;Z)} ever occurred; no
    clamping is applied.  Such an occurrence is logged for investigation
    (it should be impossible: each of a, b, c dominates both pairwise
    informations).  A degenerate private-key direction short-circuits to
    {rs <= min{a,b,c}, rp <= 0}, the pointwise limit of the constraint.
    """
    abc = compute_abc(pmf)
    m_cap = abc.min_value()
    m_pair = min(mutual_information(pmf, "X", "Z"), mutual_information(pmf, "Y", "Z"))
    p_cap = pk_capacity(pmf)
    if p_cap <= DEGENERATE_TOL:
        planes = (
            HalfPlane(1.0, 0.0, m_cap, "eq10a"),
            HalfPlane(0.0, 1.0, 0.0, "eq10b"),
        )
    else:
        slope = (m_cap - m_pair) / p_cap
        if slope < 0:
            logger.warning(
                "inner bound slope is negative (min{a,b,c}=%.12g < min pairwise=%.12g); "
                "keeping the literal coefficient",
                m_cap,
                m_pair,
            )
        planes = (
            HalfPlane(1.0, slope, m_cap, "eq10a"),
            HalfPlane(0.0, 1.0, p_cap, "eq10b"),
        )
    return RegionSpec(planes, "inner")


def exact_region(pmf: JointPmf3, tol: float = GEOM_TOL) -> RegionSpec | None:
    """The exact region when min{a,b,c} = b (within tol); None otherwise.

    When present its half-planes are exactly the eq7 and eq8 planes of the
    outer bound.  The remaining cases are open, so no region is claimed.
    """
    if tol <= 0:
        raise ParamOutOfRangeError(f"tol must be positive, got {tol}")
    abc = compute_abc(pmf)
    if abc.min_value() < abc.b - tol:
        return None
    planes = (
        HalfPlane(0.0, 1.0, pk_capacity(pmf), "eq7"),
        HalfPlane(1.0, 1.0, abc.b, "eq8"),
    )
    return RegionSpec(planes, "exact")


def _snap(v: float) -> float:
    return 0.0 if abs(v) <= GEOM_TOL else v


def vertices(region: RegionSpec) -> list[RatePair]:
    """Extreme points of the region, counterclockwise.

    Computed by pairwise line intersection (constraint boundaries plus the
    two axes), feasibility filtering, dedup at ``GEOM_TOL``, and removal of
    non-extreme collinear points.  The cycle starts from the origin-side
    vertex on the rs-axis.
    """
    _check_bounded(region.halfplanes, region.kind)
    lines = [(h.coef_rs, h.coef_rp, h.bound) for h in region.halfplanes]
    lines.append((1.0, 0.0, 0.0))  # rs = 0
    lines.append((0.0, 1.0, 0.0))  # rp = 0
    candidates = []
    for i in range(len(lines)):
        a1, b1, c1 = lines[i]
        for j in range(i + 1, len(lines)):
            a2, b2, c2 = lines[j]
            det = a1 * b2 - a2 * b1
            if abs(det) < DEGENERATE_TOL:
                continue
            rs = (c1 * b2 - c2 * b1) / det
            rp = (a1 * c2 - a2 * c1) / det
            if rs < -GEOM_TOL or rp < -GEOM_TOL:
                continue
            if all(h.satisfied(rs, rp) for h in region.halfplanes):
                candidates.append((_snap(rs), _snap(rp)))
    kept: list[tuple[float, float]] = []
    for pt in candidates:
        if all(math.hypot(pt[0] - q[0], pt[1] - q[1]) >= GEOM_TOL for q in kept):
            kept.append(pt)
    kept = _drop_non_extreme(kept)
    if len(kept) > 2:
        cx = sum(p[0] for p in kept) / len(kept)
        cy = sum(p[1] for p in kept) / len(kept)
        kept.sort(key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    start = min(range(len(kept)), key=lambda i: (kept[i][1], kept[i][0])) if kept else 0
    ordered = kept[start:] + kept[:start]
    return [RatePair(rs, rp) for rs, rp in ordered]


def _drop_non_extreme(points):
    """Remove points lying strictly inside a segment between two others."""
    out = []
    for i, p in enumerate(points):
        interior = False
        for j, q in enumerate(points):
            if interior:
                break
            for k, r in enumerate(points):
                if j == i or k == i or j >= k:
                    continue
                cross = (r[0] - q[0]) * (p[1] - q[1]) - (r[1] - q[1]) * (p[0] - q[0])
                if abs(cross) > GEOM_TOL:
                    continue
                dot = (p[0] - q[0]) * (r[0] - q[0]) + (p[1] - q[1]) * (r[1] - q[1])
                seg = (r[0] - q[0]) ** 2 + (r[1] - q[1]) ** 2
                if seg > 0 and GEOM_TOL < dot < seg - GEOM_TOL:
                    interior = True
                    break
        if not interior:
            out.append(p)
    return out


def contains(region: RegionSpec, pair: RatePair, tol: float = GEOM_TOL) -> bool:
    """True iff the (nonnegative) pair satisfies every half-plane within tol."""
    return all(h.satisfied(pair.rs, pair.rp, tol) for h in region.halfplanes)


def _clamped_point(label: str, rs: float, rp: float) -> LabeledPoint:
    clamped = rs < 0 or rp < 0
    return LabeledPoint(label, RatePair(max(rs, 0.0), max(rp, 0.0)), clamped)


def notable_points(pmf: JointPmf3, tol: float = GEOM_TOL) -> tuple[list[LabeledPoint], str]:
    """The labeled candidate corner points and the case tag.

    Returns (points, case) with case one of ``theorem3`` (min = b, region
    known exactly), ``case1`` (min = c), ``case2`` (a < c <= b), or
    ``impossible_case`` if a < b < c is detected within tolerance, which
    should never happen and is surfaced for investigation rather than
    assumed away.  Negative coordinates are clamped to 0 and flagged.
    """
    abc = compute_abc(pmf)
    p_cap = pk_capacity(pmf)
    ixz = mutual_information(pmf, "X", "Z")
    iyz = mutual_information(pmf, "Y", "Z")
    ixy = mutual_information(pmf, "X", "Y")
    lo, hi = min(ixz, iyz), max(ixz, iyz)
    points = [
        _clamped_point("P1", 0.0, p_cap),
        _clamped_point("P2", abc.min_value(), 0.0),
        _clamped_point("P3", lo, p_cap),
        _clamped_point("P4", hi, abc.b - hi),
        _clamped_point("P5", abc.a, ixy - abc.a),
    ]
    m_cap = abc.min_value()
    if m_cap >= abc.b - tol:
        case = CASE_THEOREM3
    elif m_cap >= abc.c - tol:
        case = CASE_ONE
    elif abc.c <= abc.b + tol:
        case = CASE_TWO
    else:
        case = CASE_IMPOSSIBLE
    return points, case
