import numpy as np
import pytest

from oracles import mi_oracle, shoelace_area
from trikey.capacity_region import (
    CASE_IMPOSSIBLE,
    CASE_ONE,
    CASE_THEOREM3,
    CASE_TWO,
    HalfPlane,
    RatePair,
    RegionSpec,
    compute_abc,
    contains,
    exact_region,
    inner_bound,
    notable_points,
    outer_bound,
    pk_capacity,
    sk_capacity,
    vertices,
)
from trikey.errors import ParamOutOfRangeError, UnboundedRegionError
from trikey.source_model import (
    cascade_bsc_source,
    make_joint_pmf,
    point_mass_source,
    random_pmf,
    xor_source,
)

# Frozen by direct evaluation of the binary entropy formula.
H_P = 0.8112781244591328  # h(0.25)
H_Q = 0.4689955935892812  # h(0.1)
H_PQ = 0.8812908992306927  # h(0.25 + 0.1 - 2*0.25*0.1) = h(0.3)
B_CASCADE = 1 - H_P  # 0.18872187554086717
RBAR_CASCADE = H_PQ - H_P  # 0.07001277477155987

UNIFORM8 = make_joint_pmf((2, 2, 2), [0.125] * 8)


def _vertex_tuples(region):
    return [(v.rs, v.rp) for v in vertices(region)]


def _nearly_same_set(points_a, points_b, tol):
    if len(points_a) != len(points_b):
        return False
    left = list(points_b)
    for p in points_a:
        for i, q in enumerate(left):
            if abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol:
                del left[i]
                break
        else:
            return False
    return True


class TestAbcAndCapacities:
    def test_xor_triple(self):
        abc = compute_abc(xor_source())
        assert (abc.a, abc.b, abc.c) == (1.0, 1.0, 0.5)

    def test_cascade_closed_forms(self):
        abc = compute_abc(cascade_bsc_source(0.25, 0.1))
        assert abs(abc.a - (1 - H_Q)) <= 1e-12
        assert abs(abc.b - (1 - H_P)) <= 1e-12
        assert abs(abc.c - (1 - (H_P + H_Q) / 2)) <= 1e-12

    def test_independent_triple_zero(self):
        abc = compute_abc(UNIFORM8)
        assert (abc.a, abc.b, abc.c) == (0.0, 0.0, 0.0)

    def test_sk_capacity(self):
        assert sk_capacity(xor_source()) == 0.5
        assert abs(sk_capacity(cascade_bsc_source(0.25, 0.1)) - (1 - H_P)) <= 1e-12
        assert sk_capacity(point_mass_source()) == 0.0

    def test_pk_capacity(self):
        assert pk_capacity(xor_source()) == 1.0
        assert abs(pk_capacity(cascade_bsc_source(0.25, 0.1)) - RBAR_CASCADE) <= 1e-12
        assert pk_capacity(UNIFORM8) == 0.0


class TestHalfPlane:
    def test_canonical_scaling(self):
        h = HalfPlane(2.0, 1.0, 1.0, "eq9")
        assert (h.coef_rs, h.coef_rp, h.bound) == (1.0, 0.5, 0.5)

    def test_zero_normal_rejected(self):
        with pytest.raises(Exception):
            HalfPlane(0.0, 0.0, 1.0, "bad")


class TestOuterBound:
    def test_xor_planes(self):
        region = outer_bound(xor_source())
        by_label = {h.label: h for h in region.halfplanes}
        assert by_label["eq6"].bound == 1.0
        assert by_label["eq7"].bound == 1.0
        assert by_label["eq8"].bound == 1.0
        # 2rs + rp <= 1 stored canonically as rs + 0.5 rp <= 0.5.
        assert (by_label["eq9"].coef_rs, by_label["eq9"].coef_rp) == (1.0, 0.5)
        assert by_label["eq9"].bound == 0.5

    def test_xor_vertices(self):
        got = _vertex_tuples(outer_bound(xor_source()))
        assert _nearly_same_set(got, [(0, 0), (0.5, 0), (0, 1)], 1e-12)

    def test_cascade_sum_bound(self):
        region = outer_bound(cascade_bsc_source(0.25, 0.1))
        eq8 = next(h for h in region.halfplanes if h.label == "eq8")
        assert abs(eq8.bound - 0.18872187554086717) <= 1e-9

    def test_point_mass_origin_only(self):
        got = _vertex_tuples(outer_bound(point_mass_source()))
        assert got == [(0.0, 0.0)]

    def test_redundant_planes_retained(self):
        assert len(outer_bound(xor_source()).halfplanes) == 4


class TestInnerBound:
    def test_xor_eq10(self):
        region = inner_bound(xor_source())
        slanted = next(h for h in region.halfplanes if h.label == "eq10a")
        cap = next(h for h in region.halfplanes if h.label == "eq10b")
        # min{a,b,c}=0.5, min pairwise = 0, I(X;Y|Z)=1 -> rs + 0.5 rp <= 0.5.
        assert (slanted.coef_rs, slanted.coef_rp, slanted.bound) == (1.0, 0.5, 0.5)
        assert cap.bound == 1.0

    def test_xor_matches_outer(self):
        assert _nearly_same_set(
            _vertex_tuples(inner_bound(xor_source())),
            _vertex_tuples(outer_bound(xor_source())),
            1e-12,
        )

    def test_cascade_slope_one(self):
        # For the cascade the slanted constraint collapses to rs + rp <= b:
        # min{a,b,c} - I(Y;Z) equals I(X;Y|Z) exactly.
        region = inner_bound(cascade_bsc_source(0.25, 0.1))
        slanted = next(h for h in region.halfplanes if h.label == "eq10a")
        assert abs(slanted.coef_rp - 1.0) <= 1e-9
        assert abs(slanted.bound - B_CASCADE) <= 1e-9

    def test_degenerate_private_direction(self):
        region = inner_bound(UNIFORM8)
        got = _vertex_tuples(region)
        assert got == [(0.0, 0.0)]

    def test_slope_never_negative_on_random_sources(self):
        # min{a,b,c} >= min{I(X;Z), I(Y;Z)} should always hold; the
        # implementation keeps the literal coefficient and would log if not.
        for seed in range(100):
            pmf = random_pmf((3, 3, 3), seed)
            slanted = next(h for h in inner_bound(pmf).halfplanes if h.label == "eq10a")
            assert slanted.coef_rp >= -1e-12


class TestExactRegion:
    def test_cascade_present_with_expected_planes(self):
        region = exact_region(cascade_bsc_source(0.25, 0.1))
        assert region is not None
        eq7 = next(h for h in region.halfplanes if h.label == "eq7")
        eq8 = next(h for h in region.halfplanes if h.label == "eq8")
        assert abs(eq7.bound - RBAR_CASCADE) <= 1e-9
        assert abs(eq8.bound - B_CASCADE) <= 1e-9

    def test_xor_absent(self):
        assert exact_region(xor_source()) is None

    def test_independent_triple_present_and_degenerate(self):
        region = exact_region(UNIFORM8)
        assert region is not None
        assert _vertex_tuples(region) == [(0.0, 0.0)]

    def test_matches_outer_planes_exactly_when_present(self):
        for seed in range(60):
            pmf = random_pmf((2, 3, 2), seed)
            region = exact_region(pmf)
            if region is None:
                continue
            outer = {h.label: h for h in outer_bound(pmf).halfplanes}
            for h in region.halfplanes:
                assert abs(h.coef_rs - outer[h.label].coef_rs) <= 1e-12
                assert abs(h.coef_rp - outer[h.label].coef_rp) <= 1e-12
                assert abs(h.bound - outer[h.label].bound) <= 1e-12

    def test_bad_tol(self):
        with pytest.raises(ParamOutOfRangeError):
            exact_region(xor_source(), tol=0.0)


class TestVertices:
    def test_cascade_trapezoid_order(self):
        region = exact_region(cascade_bsc_source(0.25, 0.1))
        got = _vertex_tuples(region)
        want = [
            (0.0, 0.0),
            (B_CASCADE, 0.0),
            (B_CASCADE - RBAR_CASCADE, RBAR_CASCADE),
            (0.0, RBAR_CASCADE),
        ]
        assert len(got) == 4
        for g, w in zip(got, want):
            assert abs(g[0] - w[0]) <= 1e-9 and abs(g[1] - w[1]) <= 1e-9

    def test_unbounded_region_rejected(self):
        with pytest.raises(UnboundedRegionError):
            RegionSpec((HalfPlane(0.0, 1.0, 1.0, "cap"),), "outer")
        with pytest.raises(UnboundedRegionError):
            RegionSpec((HalfPlane(1.0, -1.0, 0.0, "diag"),), "outer")

    def test_counterclockwise_and_start(self):
        got = _vertex_tuples(outer_bound(cascade_bsc_source(0.25, 0.1)))
        assert got[0] == (0.0, 0.0)
        assert shoelace_area(got) > 0  # positive signed area == CCW


class TestContains:
    def test_xor_points(self):
        region = outer_bound(xor_source())
        assert contains(region, RatePair(0.5, 0.0))
        assert not contains(region, RatePair(0.3, 0.5))  # 2*0.3 + 0.5 > 1
        assert contains(region, RatePair(0.0, 0.0))

    def test_negative_pair_rejected_at_construction(self):
        with pytest.raises(ParamOutOfRangeError):
            RatePair(-0.1, 0.0)


class TestNotablePoints:
    def test_xor_case1(self):
        points, case = notable_points(xor_source())
        assert case == CASE_ONE
        by_label = {p.label: p for p in points}
        assert (by_label["P2"].point.rs, by_label["P2"].point.rp) == (0.5, 0.0)
        assert (by_label["P3"].point.rs, by_label["P3"].point.rp) == (0.0, 1.0)
        # P5 = (a, I(X;Y) - a) clamps to rp = 0 for the xor source.
        assert by_label["P5"].clamped

    def test_cascade_theorem3(self):
        _, case = notable_points(cascade_bsc_source(0.25, 0.1))
        assert case == CASE_THEOREM3

    def test_case2_construction(self):
        # Y = X (identical uniform bits), Z a 0.45-flip of X: a is tiny,
        # b = 1, c about 1 - h(0.45)/2, so a < c <= b.
        table = np.zeros((2, 2, 2))
        for x in range(2):
            for z in range(2):
                table[x, x, z] = 0.5 * (0.55 if z == x else 0.45)
        pmf = make_joint_pmf((2, 2, 2), table.ravel())
        _, case = notable_points(pmf)
        assert case == CASE_TWO

    def test_independent_triple_all_origin(self):
        points, _ = notable_points(UNIFORM8)
        for p in points:
            assert (p.point.rs, p.point.rp) == (0.0, 0.0)

    def test_impossible_case_never_seen_on_random_sources(self):
        for seed in range(200):
            _, case = notable_points(random_pmf((3, 2, 3), seed))
            assert case != CASE_IMPOSSIBLE


class TestRegionProperties:
    CARDS = [(2, 2, 2), (3, 2, 3), (2, 3, 2), (3, 3, 3)]

    def test_inner_inside_outer(self):
        # Every inner-bound vertex satisfies every outer-bound half-plane.
        count = 0
        for seed in range(50):
            for card in self.CARDS:
                pmf = random_pmf(card, seed)
                outer = outer_bound(pmf)
                for v in vertices(inner_bound(pmf)):
                    for h in outer.halfplanes:
                        assert h.value(v.rs, v.rp) <= h.bound + 1e-9
                count += 1
        assert count == 200

    def test_pk_capacity_below_b(self):
        for seed in range(50):
            for card in self.CARDS:
                pmf = random_pmf(card, seed)
                assert pk_capacity(pmf) <= compute_abc(pmf).b + 1e-12

    def test_sk_capacity_is_argmin(self):
        for seed in range(50):
            pmf = random_pmf((3, 3, 2), seed)
            abc = compute_abc(pmf)
            cap = sk_capacity(pmf)
            assert cap <= abc.a and cap <= abc.b and cap <= abc.c

    def test_downward_closure(self):
        for seed in range(40):
            pmf = random_pmf((2, 3, 3), seed)
            for region in (outer_bound(pmf), inner_bound(pmf)):
                for v in vertices(region):
                    for fx in (0.0, 0.5, 1.0):
                        for fy in (0.0, 0.5, 1.0):
                            assert contains(region, RatePair(v.rs * fx, v.rp * fy), 1e-9)

    def test_inner_area_at_most_outer_area(self):
        for seed in range(60):
            pmf = random_pmf((3, 2, 2), seed)
            inner_area = shoelace_area(_vertex_tuples(inner_bound(pmf)))
            outer_area = shoelace_area(_vertex_tuples(outer_bound(pmf)))
            assert inner_area <= outer_area + 1e-12

    def test_midpoint_convexity(self):
        for seed in range(30):
            pmf = random_pmf((3, 3, 2), seed)
            region = outer_bound(pmf)
            verts = vertices(region)
            for i, v in enumerate(verts):
                for w in verts[i:]:
                    mid = RatePair((v.rs + w.rs) / 2, (v.rp + w.rp) / 2)
                    assert contains(region, mid, 1e-9)

    def test_plane_orientation(self):
        # coef_rs >= 0 always; coef_rp >= 0 apart from the literal slanted
        # inner constraint (which never goes negative in practice).
        for seed in range(40):
            pmf = random_pmf((2, 2, 3), seed)
            for region in (outer_bound(pmf), inner_bound(pmf)):
                for h in region.halfplanes:
                    assert h.coef_rs >= 0.0
                    if h.label != "eq10a":
                        assert h.coef_rp >= 0.0


class TestAgainstOracles:
    def test_abc_matches_brute_force(self):
        for seed in range(30):
            pmf = random_pmf((3, 2, 3), seed)
            abc = compute_abc(pmf)
            assert abs(abc.a - mi_oracle(pmf, (2,), (0, 1))) <= 1e-12
            b_oracle = min(mi_oracle(pmf, (0,), (1, 2)), mi_oracle(pmf, (1,), (0, 2)))
            assert abs(abc.b - b_oracle) <= 1e-12
