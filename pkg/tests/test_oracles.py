import math

import numpy as np
import pytest
from scipy import stats

from gaugesets import oracles
from gaugesets.errors import DomainError, NotPositiveDefiniteError, SizeLimitError, UnsupportedGauge
from gaugesets.geometry import ConvexBody
from gaugesets.scalar import GaugeSpec, WeightedSample, eval_gauge, quantile_lower, quantile_upper
from gaugesets.scenario import RandomSetModel, Scenario

from conftest import SPECS, random_sample


class TestNormal:
    def test_values(self):
        assert oracles.normal_quantile(0.5) == 0.0
        assert oracles.normal_quantile(0.9) == pytest.approx(1.2815515655446004, abs=1e-12)
        assert oracles.normal_pdf(0.0) == 1 / math.sqrt(2 * math.pi)

    def test_against_scipy(self):
        u = np.concatenate([np.linspace(1e-6, 1 - 1e-6, 2001), [1e-10, 0.02425, 0.97575]])
        for x in u:
            assert oracles.normal_quantile(x) == pytest.approx(stats.norm.ppf(x), abs=1e-9)
            assert oracles.normal_cdf(oracles.normal_quantile(x)) == pytest.approx(x, abs=1e-9)

    def test_bisection_cross_check(self):
        lo, hi = 0.0, 5.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if oracles.normal_cdf(mid) < 0.9 else (lo, mid)
        assert oracles.normal_quantile(0.9) == pytest.approx(lo, abs=1e-12)

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, u):
        with pytest.raises(DomainError):
            oracles.normal_quantile(u)


class TestNormalConstants:
    def test_printed_constants(self):
        c = oracles.normal_gauge_constants
        assert c(GaugeSpec.avgq_right(0.9)) == pytest.approx(1.7549833193248683, abs=1e-9)
        assert c(GaugeSpec.avgq_left(0.1)) == pytest.approx(-1.7549833193248683, abs=1e-9)
        assert c(GaugeSpec.quantile(0.1)) == pytest.approx(-1.2815515655446004, abs=1e-12)
        assert c(GaugeSpec.norm(2, 1)) == pytest.approx(1 / math.sqrt(2), abs=1e-14)
        assert c(GaugeSpec.expectile(0.5)) == 0.0
        assert c(GaugeSpec.mean()) == 0.0

    def test_expectile_constant_vs_scipy(self):
        z = oracles.normal_gauge_constants(GaugeSpec.expectile(0.9))
        up = stats.norm.expect(lambda x: max(x - z, 0.0))
        down = stats.norm.expect(lambda x: max(z - x, 0.0))
        assert 0.9 * up == pytest.approx(0.1 * down, abs=1e-9)

    def test_unsupported(self):
        with pytest.raises(UnsupportedGauge):
            oracles.normal_gauge_constants(GaugeSpec.esssup())


class TestMcGaussian:
    mu = np.array([1.0, 2.0])
    sigma = np.array([[0.09, 0.09], [0.09, 0.25]])

    def test_reproducible(self):
        a = oracles.mc_gaussian(self.mu, self.sigma, 1000, 7)
        b = oracles.mc_gaussian(self.mu, self.sigma, 1000, 7)
        assert a.tobytes() == b.tobytes()
        assert not np.array_equal(a, oracles.mc_gaussian(self.mu, self.sigma, 1000, 8))

    def test_moments(self):
        n = 50000
        X = oracles.mc_gaussian(self.mu, self.sigma, n, 3)
        sd = np.sqrt(np.diag(self.sigma))
        assert (np.abs(X.mean(axis=0) - self.mu) <= 4 * sd / math.sqrt(n)).all()
        # var of a sample covariance entry is (s_ij^2 + s_ii s_jj)/n
        C = np.cov(X.T)
        tol = 4 * np.sqrt((self.sigma ** 2 + np.outer(sd ** 2, sd ** 2)) / n)
        assert (np.abs(C - self.sigma) <= tol).all()

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            oracles.mc_gaussian([0, 0], [[1, 2], [2, 1]], 10, 0)


class TestScalarOracles:
    def test_quantiles_agree_exactly(self, rng):
        # full-expansion sort over integer counts against the weighted scan
        for _ in range(1000):
            n = int(rng.integers(1, 8))
            v = rng.integers(-5, 6, size=n).astype(float)
            counts = rng.integers(1, 5, size=n)
            w = counts / counts.sum()
            s = WeightedSample(v, w)
            for a in rng.uniform(0.01, 1.0, size=3):
                assert quantile_lower(s, a) == oracles.oracle_quantile_expanded(v, counts, a)
            assert quantile_lower(s, 1.0) == oracles.oracle_quantile_expanded(v, counts, 1.0)

    def test_quantile_at_cumulative_level(self):
        v, c = np.array([1.0, 2.0, 3.0]), np.array([1, 1, 2])
        assert oracles.oracle_quantile_expanded(v, c, 0.5) == 2.0
        assert quantile_lower(WeightedSample(v, c / 4), 0.5) == 2.0
        assert quantile_upper(WeightedSample(v, c / 4), 0.5) == 3.0

    def test_gauges_agree(self, rng):
        for _ in range(300):
            v, w = random_sample(rng)
            s = WeightedSample(v, w)
            for g in SPECS:
                assert eval_gauge(g, s) == pytest.approx(oracles.oracle_gauge(g, v, w), abs=1e-9)

    def test_batched_matches_single(self, rng):
        for g in [GaugeSpec.mean(), GaugeSpec.quantile(0.4), GaugeSpec.quantile_upper(0.4),
                  GaugeSpec.avgq_right(0.7), GaugeSpec.avgq_left(0.3), GaugeSpec.expectile(0.8),
                  GaugeSpec.norm(2, 0.5), GaugeSpec.essinf(), GaugeSpec.esssup()]:
            V = rng.integers(-3, 4, size=(40, 5)).astype(float)
            V[::7, 2] = math.inf
            w = rng.dirichlet(np.ones(5))
            got = oracles.batched_gauge(g, V, w)
            for row, x in zip(V, got):
                assert x == pytest.approx(oracles.oracle_gauge(g, row, w), abs=1e-9)


class TestMembership:
    square = RandomSetModel([Scenario(1.0, ConvexBody.box([0, 0], [2, 2]))])

    def test_inside_outside(self):
        lat = oracles.angular_lattice(64)
        assert oracles.brute_region_membership(self.square, GaugeSpec.mean(), lat, [1, 1])
        assert not oracles.brute_region_membership(self.square, GaugeSpec.mean(), lat, [2.5, 1])

    def test_esssup_hull(self):
        m = RandomSetModel.from_points([[0, 0], [1, 0], [0, 1]])
        lat = oracles.angular_lattice(64)
        assert oracles.brute_region_membership(m, GaugeSpec.esssup(), lat, [0.2, 0.2])
        assert not oracles.brute_region_membership(m, GaugeSpec.esssup(), lat, [0.6, 0.6])

    def test_hrep_membership(self):
        cons = [([1, 0], 1.0), ([0, 1], math.inf)]
        assert oracles.hrep_membership(cons, [1, 100])
        assert not oracles.hrep_membership(cons, [1.1, 0])
        assert not oracles.hrep_membership([([1, 0], -math.inf)], [0, 0])


class TestEnumeration:
    def test_size_limits(self):
        m = RandomSetModel.from_points(np.eye(2).tolist() * 4)
        with pytest.raises(SizeLimitError):
            oracles.brute_conditional_enumeration(m, ["a"] * 8, GaugeSpec.mean(),
                                                  oracles.angular_lattice(8))
        m = RandomSetModel.from_points([[0, 0], [1, 1]])
        with pytest.raises(SizeLimitError):
            oracles.brute_conditional_enumeration(m, ["a", "b"], GaugeSpec.mean(),
                                                  oracles.angular_lattice(49))

    def test_trivial_partition(self):
        m = RandomSetModel.from_points([[0, 0], [2, 0], [0, 1]], [0.5, 0.25, 0.25])
        lat = oracles.angular_lattice(12)
        out = oracles.brute_conditional_enumeration(m, ["all"] * 3, GaugeSpec.avgq_right(0.5), lat)
        for w, t in out["all"]:
            vals = [float(np.dot(w, x)) for x in m.points]
            assert t == pytest.approx(oracles.oracle_gauge(GaugeSpec.avgq_right(0.5), vals, m.probs))

    def test_rectangle(self):
        # V2 = 1: V1 in {1, 3};  V2 = 2: V1 in {2, 4, 6}
        bodies = [((1, 1), 0.2), ((3, 1), 0.2), ((2, 2), 0.2), ((4, 2), 0.2), ((6, 2), 0.2)]
        m = RandomSetModel([Scenario(p, ConvexBody.box([0, 0], v)) for v, p in bodies])
        labels = ["v1", "v1", "v2", "v2", "v2"]
        lat = oracles.angular_lattice(8)
        out = oracles.brute_conditional_enumeration(m, labels, GaugeSpec.mean(), lat)
        t1 = dict((tuple(np.round(w, 12)), t) for w, t in out["v1"])
        t2 = dict((tuple(np.round(w, 12)), t) for w, t in out["v2"])
        assert t1[(1.0, 0.0)] == pytest.approx(2.0) and t1[(0.0, 1.0)] == pytest.approx(1.0)
        assert t2[(1.0, 0.0)] == pytest.approx(4.0) and t2[(0.0, 1.0)] == pytest.approx(2.0)
        assert t2[(-1.0, 0.0)] == pytest.approx(0.0, abs=1e-12)


class TestVorobevOracle:
    def test_conventions(self):
        z = oracles.normal_quantile(0.9)
        assert oracles.vorobev_lognormal_boundary(0.1) == pytest.approx(2 + math.exp(0.2 * z))
        assert oracles.vorobev_lognormal_boundary(0.1, convention="complement") == \
            pytest.approx(2 + math.exp(-0.2 * z))
        assert round(oracles.vorobev_lognormal_boundary(0.1, convention="complement"), 2) == 2.77
        with pytest.raises(DomainError):
            oracles.vorobev_lognormal_boundary(0.1, convention="other")

    def test_discrete(self):
        assert oracles.discrete_vorobev_boundary([1, 2, 3, 4], 0.5) == 3
        assert oracles.discrete_vorobev_boundary([1, 2, 3, 4], 1.0) == 1

    def test_cone_coverage(self):
        m = oracles.bid_ask_model([(2, 0.5), (3, 1)])
        # polar sectors are [atan(1/k2), atan(k1)]: the ray through (1, 2) and [45, 71.6] degrees
        cov = oracles.cone_coverage(m, [[1, 2], [1, 1], [-1, -1], [1, 2.5]])
        assert cov.tolist() == [1.0, 0.5, 0.0, 0.5]
