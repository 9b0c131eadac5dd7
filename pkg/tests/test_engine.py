import math

import numpy as np
import pytest

from gaugesets import oracles
from gaugesets.engine import (
    GridSpec,
    RegionRequest,
    conditional_core,
    conditional_hull,
    conditional_regions,
    cone_gauge_g9,
    cone_gauge_quantile,
    depth_region,
    gaussian_closed_form_region,
    resolve_grid,
    run_request,
    selection_expectation,
    singleton_collapse_check,
    translated_cone_gauge,
    vorobev_arcs,
    vorobev_directions,
    vorobev_quantile,
    wulff_region,
)
from gaugesets.errors import (
    DomainError,
    MissingHRepError,
    NotPositiveDefiniteError,
    PreconditionError,
)
from gaugesets.geometry import ConvexBody, direction_grid, planar_cone, support, support_many
from gaugesets.scalar import GaugeSpec, quantile_lower
from gaugesets.scenario import Partition, RandomSetModel, Scenario, scalarize

INF = math.inf
W720 = direction_grid(2, 720)


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def same_rays(A, B):
    A = sorted(tuple(np.round(unit(r), 9)) for r in A)
    B = sorted(tuple(np.round(unit(r), 9)) for r in B)
    return A == B


def sector_cone(a_deg, b_deg):
    """Cone whose polar is the angular sector [a, b] (degrees, b - a < 180)."""
    a, b = math.radians(a_deg), math.radians(b_deg)
    return ConvexBody.cone([[math.cos(b + math.pi / 2), math.sin(b + math.pi / 2)],
                            [math.cos(a - math.pi / 2), math.sin(a - math.pi / 2)]])


BID_ASK = [(2, 0.5), (2, 1), (3, 0.5), (3, 1)]


def is_bid_ask_halfplane(body):
    # {x : x1 + 2 x2 <= 0}, bounded by the line through (1, -0.5) and (-2, 1)
    return (planar_cone(body.rays).kind == "halfplane"
            and support(body, [1, 2]) == 0.0 and support(body, [-1, -2]) == INF
            and support(body, [1, 1]) == INF)


def two_squares():
    return RandomSetModel([Scenario(0.5, ConvexBody.box([0, 0], [1, 1])),
                           Scenario(0.5, ConvexBody.box([0, 0], [3, 3]))])


class TestGrid:
    def test_resolve(self):
        assert resolve_grid(2, None).shape == (720, 2)
        assert resolve_grid(3, None).shape == (2048, 3)
        assert resolve_grid(2, 8).shape == (8, 2)
        assert resolve_grid(3, GridSpec(20, "random", 1)).shape == (20, 3)
        with pytest.raises(DomainError):
            resolve_grid(2, [[1, 0], [0, 1], [-1, 0]])
        with pytest.raises(DomainError):
            resolve_grid(2, [[1, 0], [0, 1], [-1, 0], [0, 0]])

    def test_request_path(self):
        with pytest.raises(DomainError):
            RegionRequest(GaugeSpec.mean(), exact_path="bogus")


class TestWulff:
    def test_deterministic_body(self):
        body = ConvexBody([[0, 0], [2, 0], [2, 1], [0, 1]])
        for g in ("quantile:0.2", "avgq-left:0.3", "mean", "norm:2:1"):
            r = wulff_region(RandomSetModel.deterministic(body), GaugeSpec.parse(g), 8)
            assert sorted(map(tuple, np.round(r.vertices, 12))) == [(0, 0), (0, 1), (2, 0), (2, 1)]

    def test_esssup_is_hull(self, rng):
        P = rng.normal(size=(30, 2))
        r = wulff_region(RandomSetModel.from_points(P), GaugeSpec.esssup(), W720)
        hull = ConvexBody(P)
        assert r.support_many(W720) == pytest.approx(support_many(hull, W720), abs=1e-12)

    def test_gaussian_quantile(self):
        mu, S = np.array([1.0, 2.0]), np.array([[0.09, 0.09], [0.09, 0.25]])
        X = oracles.mc_gaussian(mu, S, 20000, 11)
        W = direction_grid(2, 72)
        r = wulff_region(RandomSetModel.from_points(X), GaugeSpec.quantile(0.1), W)
        ref = W @ mu + oracles.normal_quantile(0.1) * np.sqrt(np.einsum("ij,jk,ik->i", W, S, W))
        # quantile standard error sqrt(a(1-a))/(phi(q) sqrt n) times sigma_u, with slack
        assert np.abs(r.offsets - ref).max() < 0.03

    def test_infinite_offsets_dropped(self):
        m = RandomSetModel([Scenario(1.0, ConvexBody.translated_cone([1, 1], [[-1, 0], [0, -1]]))])
        res = conditional_regions(m, None, GaugeSpec.mean(), 8)
        assert res.dropped["all"] == 5
        r = res["all"]
        assert r.vertices.tolist() == [[1.0, 1.0]] and same_rays(r.rays, [[-1, 0], [0, -1]])

    def test_empty(self):
        m = RandomSetModel.from_points([[0, 0], [1, 0]])
        r = wulff_region(m, GaugeSpec.avgq_left(0.5), 8)
        assert r.is_empty()


class TestConditional:
    def rect(self):
        spec = [(1, 1, 0.1), (3, 1, 0.3), (2, 2, 0.2), (4, 2, 0.2), (6, 2, 0.2)]
        return RandomSetModel([Scenario(p, ConvexBody.box([0, 0], [a, b]), f"V2={b}") for a, b, p in spec])

    def test_rectangle_mean(self):
        m = self.rect()
        res = conditional_regions(m, m.partition(), GaugeSpec.mean(), 360)
        assert sorted(map(tuple, np.round(res["V2=1"].vertices, 12))) == [(0, 0), (0, 1), (2.5, 0), (2.5, 1)]
        assert sorted(map(tuple, np.round(res["V2=2"].vertices, 12))) == [(0, 0), (0, 2), (4, 0), (4, 2)]

    def test_quadrant(self):
        spec = [(1, 1, 0.25), (3, 1, 0.25), (2, 5, 0.5)]
        m = RandomSetModel([Scenario(p, ConvexBody.translated_cone([a, b], [[-1, 0], [0, -1]]), str(b))
                            for a, b, p in spec])
        for g in ("mean", "quantile:0.5", "avgq-right:0.5", "essinf"):
            res = conditional_regions(m, m.partition(), GaugeSpec.parse(g), 360)
            s = scalarize(m.restrict([0, 1], [0.5, 0.5]), [1, 0])
            from gaugesets.scalar import eval_gauge
            g1 = eval_gauge(GaugeSpec.parse(g), s)
            assert res["1"].vertices == pytest.approx(np.array([[g1, 1]]), abs=1e-9)
            assert res["5"].vertices == pytest.approx(np.array([[2, 5]]), abs=1e-9)
            assert same_rays(res["1"].rays, [[-1, 0], [0, -1]])

    def test_scaled(self):
        # X = xi * Z, atoms generated by Z
        Z = {"z1": np.array([1.0, 2.0]), "z2": np.array([-1.0, 0.5])}
        xi = [(0.5, 0.25), (2.0, 0.25)]
        scen = [Scenario(p * q, ConvexBody.point(x * Z[k]), k) for k, q in (("z1", 0.4), ("z2", 0.6))
                for x, p in ((xi[0][0], 0.5), (xi[1][0], 0.5))]
        m = RandomSetModel(scen)
        res = conditional_regions(m, m.partition(), GaugeSpec.mean(), 360)
        for k in Z:
            assert res[k].vertices == pytest.approx(np.array([1.25 * Z[k]]))

    def test_trivial_equals_unconditional(self, rng):
        m = RandomSetModel.from_points(rng.normal(size=(15, 2)))
        g = GaugeSpec.expectile(0.8)
        a = conditional_regions(m, Partition.trivial(m), g, 36)["all"]
        b = wulff_region(m, g, 36)
        assert a.offsets.tolist() == b.offsets.tolist()


class TestBodies:
    def test_expectation(self):
        e = selection_expectation(two_squares())["all"]
        assert sorted(map(tuple, e.vertices)) == [(0, 0), (0, 2), (2, 0), (2, 2)]

    def test_expectation_points(self):
        m = RandomSetModel.from_points([[0, 0], [2, 0], [1, 3]])
        assert selection_expectation(m)["all"].vertices == pytest.approx(np.array([[1, 1]]))

    def test_expectation_support_identity(self, rng):
        for _ in range(20):
            bodies = [ConvexBody(rng.normal(size=(4, 2))) for _ in range(3)]
            p = rng.dirichlet(np.ones(3))
            m = RandomSetModel([Scenario(q, b) for q, b in zip(p, bodies)])
            e = selection_expectation(m)["all"]
            for w in rng.normal(size=(10, 2)):
                assert support(e, w) == pytest.approx(scalarize(m, w).mean(), abs=1e-9)

    def test_core_and_hull(self):
        m = RandomSetModel([Scenario(0.5, ConvexBody.box([0, 0], [2, 1])),
                            Scenario(0.5, ConvexBody.box([1, 0], [3, 1]))])
        core = conditional_core(m)["all"]
        hull = conditional_hull(m)["all"]
        assert sorted(map(tuple, core.vertices)) == [(1, 0), (1, 1), (2, 0), (2, 1)]
        assert sorted(map(tuple, hull.vertices)) == [(0, 0), (0, 1), (3, 0), (3, 1)]

    def test_core_disjoint(self):
        m = RandomSetModel([Scenario(0.5, ConvexBody.box([0, 0], [1, 1])),
                            Scenario(0.5, ConvexBody.box([2, 0], [3, 1]))])
        assert conditional_core(m)["all"].is_empty

    def test_core_of_cones(self):
        m = oracles.bid_ask_model([(3, 1), (4, 0.5)])
        core = conditional_core(m)["all"]
        # fixed points: the intersection of the two wedges
        assert same_rays(core.rays, [[-4, 1], [1, -1]])
        # a line cone meets the wedge only at the origin
        core = conditional_core(oracles.bid_ask_model([(2, 0.5), (3, 1)]))["all"]
        assert core.rays.shape[0] == 0

    def test_core_3d(self):
        m = RandomSetModel([Scenario(0.5, ConvexBody.box([0, 0, 0], [2, 2, 2])),
                            Scenario(0.5, ConvexBody.box([1, 1, 1], [3, 3, 3]))])
        core = conditional_core(m)["all"]
        assert support(core, [1, 1, 1]) == pytest.approx(6)
        m = RandomSetModel([Scenario(1.0, ConvexBody([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]))])
        with pytest.raises(MissingHRepError):
            conditional_core(m)

    def test_hull_single_and_esssup(self, rng):
        b = ConvexBody(rng.normal(size=(5, 2)))
        h = conditional_hull(RandomSetModel.deterministic(b))["all"]
        W = direction_grid(2, 90)
        assert support_many(h, W) == pytest.approx(support_many(b, W))
        m = RandomSetModel([Scenario(0.3, ConvexBody.box([0, 0], [2, 1])),
                            Scenario(0.7, ConvexBody.box([1, -1], [3, 0.5]))])
        h = conditional_hull(m)["all"]
        r = wulff_region(m, GaugeSpec.esssup(), W)
        assert r.support_many(W) == pytest.approx(support_many(h, W), abs=1e-12)


class TestCones:
    def test_bid_ask_g9(self):
        m = oracles.bid_ask_model(BID_ASK)
        c = cone_gauge_g9(m)
        assert is_bid_ask_halfplane(c)

    def test_g9_requires_flag(self):
        m = oracles.bid_ask_model([(2, 0.5)])
        with pytest.raises(PreconditionError):
            cone_gauge_g9(m, GaugeSpec.quantile(0.5))

    def test_deterministic(self):
        cone = ConvexBody.cone([[-1, 0.2], [0.3, -1]])
        m = RandomSetModel.deterministic(cone)
        assert same_rays(cone_gauge_g9(m).rays, cone.rays)
        assert same_rays(cone_gauge_quantile(m, 0.3).rays, cone.rays)

    def test_vorobev_sectors(self):
        m = RandomSetModel([Scenario(1 / 3, sector_cone(0, 90)), Scenario(1 / 3, sector_cone(30, 120)),
                            Scenario(1 / 3, sector_cone(60, 150))])
        arcs = vorobev_arcs(m, 0.5)
        assert len(arcs) == 1
        assert np.degrees(arcs[0]) == pytest.approx([30, 120])
        assert np.degrees(vorobev_arcs(m, 1.0)[0]) == pytest.approx([60, 90])
        assert np.degrees(vorobev_arcs(m, 1e-9)[0]) == pytest.approx([0, 150])
        q = vorobev_quantile(m, 0.5)
        assert same_rays([r for r in q.rays if abs(np.linalg.norm(r)) > 0][:1] + [q.rays[-1]],
                         [[math.cos(math.radians(30)), math.sin(math.radians(30))],
                          [math.cos(math.radians(120)), math.sin(math.radians(120))]])

    def test_quantile_bid_ask(self):
        m = oracles.bid_ask_model(BID_ASK)
        c = cone_gauge_quantile(m, 0.5)
        # directions of coverage >= 1/2 form the sector [45, 71.6] degrees
        assert same_rays(c.rays, [[1, -1], [-3, 1]])

    def test_quantile_one_is_g9(self):
        m = oracles.bid_ask_model([(2, 0.5), (3, 1), (2.5, 0.8)])
        assert same_rays(cone_gauge_quantile(m, 1.0).rays, cone_gauge_g9(m).rays)

    def test_directions_grid(self):
        m = RandomSetModel([Scenario(0.5, sector_cone(0, 90)), Scenario(0.5, sector_cone(45, 180))])
        W = direction_grid(2, 8)
        D = vorobev_directions(m, 1.0, W)
        assert np.degrees(np.arctan2(D[:, 1], D[:, 0])) == pytest.approx([45, 90])


class TestTranslatedCone:
    def test_zero_cone(self, rng):
        m = RandomSetModel.from_points(rng.normal(size=(10, 2)))
        g = GaugeSpec.avgq_right(0.5)
        a = translated_cone_gauge(m, ConvexBody.cone([], dim=2), g, 36)
        b = wulff_region(m, g, 36)
        W = direction_grid(2, 36)
        assert a.support_many(W) == pytest.approx(b.support_many(W))

    def test_zonoid_plus_cone(self, rng):
        m = RandomSetModel.from_points(rng.normal(size=(12, 2)))
        cone = ConvexBody.cone([[-1, 0], [0, -1]])
        g = GaugeSpec.avgq_right(0.6)
        r = translated_cone_gauge(m, cone, g, 72)
        z = wulff_region(m, g, 72)
        # the region is the zonoid region plus the negative quadrant
        for w in direction_grid(2, 72):
            expect = INF if (w < -1e-12).any() else z.support(w)
            got = r.support(w)
            assert got == expect or got == pytest.approx(expect)

    def test_not_sublinear(self):
        m = RandomSetModel.from_points([[0, 0], [1, 1]])
        cone = ConvexBody.cone([[-1, 0], [0, -1]])
        with pytest.raises(PreconditionError):
            translated_cone_gauge(m, cone, GaugeSpec.quantile(0.5), 8)
        r = translated_cone_gauge(m, cone, GaugeSpec.quantile(0.5), 8, fallback=True)
        assert r.support([1, 1]) == 0.0

    def test_expectation_plus_cone(self):
        mu = np.array([1.0, 2.0])
        X = oracles.mc_gaussian(mu, [[0.09, 0.09], [0.09, 0.25]], 2000, 5)
        m = RandomSetModel.from_points(X)
        cone = ConvexBody.cone([[-2, -1], [-1, -2]])
        r = translated_cone_gauge(m, cone, GaugeSpec.mean(), 72)
        xbar = X.mean(axis=0)
        assert r.vertices == pytest.approx(xbar[None, :])
        assert same_rays(r.rays, [[-2, -1], [-1, -2]])


class TestDepth:
    def test_tukey_one_is_hull(self, rng):
        P = rng.normal(size=(20, 2))
        r = depth_region("tukey:1", RandomSetModel.from_points(P), 36)
        W = direction_grid(2, 36)
        assert r.support_many(W) == pytest.approx(support_many(ConvexBody(P), W))

    def test_zonoid_zero_is_mean(self, rng):
        P = rng.normal(size=(20, 2))
        r = depth_region(("zonoid", 0.0), RandomSetModel.from_points(P), 36)
        assert r.vertices == pytest.approx(P.mean(axis=0)[None, :], abs=1e-12)

    def test_tukey_quantiles(self):
        X = oracles.mc_gaussian([0, 0], np.eye(2), 4000, 1)
        m = RandomSetModel.from_points(X)
        W = direction_grid(2, 36)
        r = depth_region("tukey:0.8", m, W)
        for w, t in zip(W, r.offsets):
            assert t == pytest.approx(quantile_lower(scalarize(m, w), 0.8), rel=1e-14)

    def test_bad_preset(self):
        with pytest.raises(DomainError):
            depth_region("spatial:1", RandomSetModel.from_points([[0, 0]]), 8)
        with pytest.raises(PreconditionError):
            depth_region("tukey:0.5", RandomSetModel.deterministic(ConvexBody.box([0, 0], [1, 1])), 8)


class TestGaussianClosedForm:
    def test_ball(self, rng):
        e = gaussian_closed_form_region([0, 0], np.eye(2), 1.0)
        for u in rng.normal(size=(10, 2)):
            assert e(u) == pytest.approx(np.linalg.norm(u))

    def test_point(self):
        e = gaussian_closed_form_region([1, 2], np.eye(2), 0.0)
        assert e([3, -1]) == 1.0

    def test_worked_example_parameters(self):
        S = np.array([[0.09, 0.09], [0.09, 0.25]])
        g1 = oracles.normal_gauge_constants(GaugeSpec.avgq_right(0.9))
        e = gaussian_closed_form_region([1, 2], S, g1)
        u = unit([1, 1])
        assert e(u) == pytest.approx(u @ [1, 2] + 1.755 * math.sqrt(u @ S @ u), abs=1e-4)

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            gaussian_closed_form_region([0, 0], [[1, 0], [0, -1]], 1.0)


class TestCollapse:
    def test_mean_point(self):
        m = RandomSetModel.from_points([[0, 0], [2, 2], [4, 0], [0, 6]], atoms=["a", "a", "b", "b"])
        out = singleton_collapse_check(m, m.partition(), GaugeSpec.mean(), 36)
        assert out["a"].vertices.tolist() == [[1, 1]]
        assert out["b"].vertices.tolist() == [[2, 3]]

    def test_empty(self):
        m = RandomSetModel.from_points([[0, 0], [2, 2]])
        out = singleton_collapse_check(m, None, GaugeSpec.avgq_left(0.5), 8)
        assert out["all"].is_empty

    def test_requires_superlinear(self):
        m = RandomSetModel.from_points([[0, 0], [2, 2]])
        with pytest.raises(PreconditionError):
            singleton_collapse_check(m, None, GaugeSpec.avgq_right(0.5), 8)

    def test_subadditive_bound(self, rng):
        # a sublinear gauge of a random point sits below g(X) + R_-^d in positive directions
        X = rng.normal(size=(30, 2))
        m = RandomSetModel.from_points(X)
        g = GaugeSpec.avgq_right(0.7)
        r = wulff_region(m, g, 72)
        from gaugesets.scalar import eval_gauge
        corner = np.array([eval_gauge(g, scalarize(m, e)) for e in np.eye(2)])
        for w in direction_grid(2, 72):
            if (w >= 0).all():
                assert r.support(w) <= corner @ w + 1e-9


class TestRunRequest:
    def test_cone_path(self):
        m = oracles.bid_ask_model([(2, 0.5), (3, 1)])
        m = oracles.bid_ask_model(BID_ASK)
        out = run_request(m, RegionRequest(GaugeSpec.mean(), exact_path="cone"))
        assert is_bid_ask_halfplane(out["all"])
        out = run_request(m, RegionRequest(GaugeSpec.quantile(0.5), exact_path="cone"))
        assert same_rays(out["all"].rays, [[1, -1], [-3, 1]])

    def test_translated_cone_path(self):
        m = RandomSetModel([Scenario(0.5, ConvexBody.translated_cone([0, 0], [[-1, 0], [0, -1]])),
                            Scenario(0.5, ConvexBody.translated_cone([2, 4], [[-1, 0], [0, -1]]))])
        res = run_request(m, RegionRequest(GaugeSpec.mean(), 8, exact_path="translated_cone"))
        assert res["all"].vertices.tolist() == [[1, 2]]

    def test_gaussian_path(self):
        X = oracles.mc_gaussian([1, 2], [[0.09, 0.09], [0.09, 0.25]], 5000, 2)
        m = RandomSetModel.from_points(X)
        res = run_request(m, RegionRequest(GaugeSpec.norm(2, 1), 36, exact_path="gaussian"))
        W = direction_grid(2, 36)
        C = np.cov(X.T, bias=True)
        ref = W @ X.mean(axis=0) + math.sqrt(0.5) * np.sqrt(np.einsum("ij,jk,ik->i", W, C, W))
        assert res["all"].offsets == pytest.approx(ref)
