import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sinrsched.model import (
    Link,
    LinkGeometry,
    ModelError,
    Node,
    PhysicalParams,
    PowerAssignment,
    Topology,
    affectance,
    check_feasible,
    noise_margin,
    path_gain,
    sinr,
)

from conftest import make_link, random_links


def brute_sinr(i, links, p, eta, kappa, xi):
    # independent re-derivation straight from the definition
    def g(a, b):
        d = math.dist(a, b)
        return 1.0 if d == 0 else min(eta * d**-kappa, 1.0)

    me = links[i]
    interf = sum(p[j] * g(links[j].src, me.dst) for j in range(len(links)) if j != i)
    return p[i] * g(me.src, me.dst) / (interf + xi)


class TestPathGain:
    def test_distance_two(self):
        assert path_gain((0, 0), (2, 0), PhysicalParams(eta=1, kappa=3)) == pytest.approx(0.125, abs=1e-15)

    def test_clamped_near_field(self):
        assert path_gain((0, 0), (0.5, 0), PhysicalParams(eta=1, kappa=3)) == 1.0

    def test_eta_scales(self):
        assert path_gain((0, 0), (2, 0), PhysicalParams(eta=2, kappa=3)) == pytest.approx(0.25, abs=1e-15)

    def test_zero_distance_rejected(self):
        with pytest.raises(ModelError):
            path_gain((1, 1), (1, 1), PhysicalParams())

    @given(st.floats(0.01, 1e3), st.floats(0.01, 1e3), st.floats(2.01, 4.99))
    def test_monotone_and_bounded(self, d1, d2, kappa):
        prm = PhysicalParams(kappa=kappa)
        g1, g2 = path_gain((0, 0), (d1, 0), prm), path_gain((0, 0), (d2, 0), prm)
        assert 0 < g1 <= 1 and 0 < g2 <= 1
        if d1 <= d2:
            assert g1 >= g2


class TestParams:
    @pytest.mark.parametrize("kw", [{"kappa": 2.0}, {"kappa": 5.0}, {"xi": 0}, {"sigma": -1}, {"alpha": 1.0}])
    def test_rejects_bad(self, kw):
        with pytest.raises(ModelError):
            PhysicalParams(**kw)

    def test_beta(self):
        assert PhysicalParams(alpha=2).beta == 3.0


class TestTopology:
    def test_degenerate_link(self):
        with pytest.raises(ModelError):
            Link(0, 1, 1, (0, 0), (1, 0))

    def test_length_out_of_range(self):
        nodes = [Node(0, (0, 0)), Node(1, (10, 0))]
        with pytest.raises(ModelError, match="outside"):
            Topology.build(nodes, [(0, 0, 1)], 1, 5)

    def test_unknown_node(self):
        with pytest.raises(ModelError, match="unknown node 7"):
            Topology.build([Node(0, (0, 0))], [(0, 0, 7)], 1, 5)

    def test_duplicate_node(self):
        with pytest.raises(ModelError, match="duplicate"):
            Topology([Node(0, (0, 0)), Node(0, (1, 1))], [], 1, 5)

    def test_delta(self):
        t = Topology([], [], 1.0, 4.0)
        assert t.delta == 0.25 and t.length_diversity == 2.0

    def test_power_rho(self):
        pa = PowerAssignment({0: 1.0, 1: 8.0})
        assert pa.rho == 8.0
        assert PowerAssignment({0: 2.0}, pmin=1.0, pmax=4.0).rho == 4.0


class TestSinr:
    def test_lone_link(self, params):
        l = make_link(0, (0, 0), (1, 0))
        assert sinr(l, [l], {0: 1.0}, params) == pytest.approx(100.0, rel=1e-12)

    def test_self_excluded(self, params):
        l = make_link(0, (0, 0), (1, 0))
        assert sinr(l, [l], {0: 1.0}, params) == sinr(l, [], {0: 1.0}, params)

    def test_two_parallel_links(self, params):
        a = make_link(0, (0, 0), (1, 0))
        b = make_link(1, (0, 10), (1, 10))
        expected = 1.0 / (101**-1.5 + 0.01)
        assert sinr(a, [a, b], {0: 1.0, 1: 1.0}, params) == pytest.approx(expected, rel=1e-12)

    def test_feasible_empty_and_single(self, params):
        assert check_feasible([], {}, params)
        l = make_link(0, (0, 0), (1, 0))
        assert check_feasible([l], {0: 1.0}, params)
        assert not check_feasible([l], {0: 0.05}, params)

    def test_shared_node_rejected(self, params):
        a = Link(0, 0, 1, (0, 0), (1, 0))
        b = Link(1, 0, 2, (0, 0), (0, 1))
        assert not check_feasible([a, b], {0: 1e6, 1: 1e6}, params)

    def test_geometry_matches_scalar(self, params):
        rng = np.random.default_rng(3)
        for _ in range(50):
            links = random_links(rng, 8, 40)
            geo = LinkGeometry(links, params)
            p = rng.uniform(0.5, 5, len(links))
            rows = np.arange(len(links))
            vec = geo.sinr_rows(rows, p)
            for i in range(len(links)):
                ref = brute_sinr(i, links, p, params.eta, params.kappa, params.xi)
                assert vec[i] == pytest.approx(ref, rel=1e-10)
            pm = {l.id: p[k] for k, l in enumerate(links)}
            assert geo.feasible_rows(rows, p) == check_feasible(links, pm, params)


class TestAffectance:
    def test_empty_and_self(self, params):
        l = make_link(0, (0, 0), (1, 0))
        assert affectance(l, [], {0: 1.0}, params) == 0.0
        assert affectance(l, [l], {0: 1.0}, params) == 0.0

    def test_two_links(self):
        prm = PhysicalParams(sigma=2.0)
        a = make_link(0, (0, 0), (1, 0))
        b = make_link(1, (0, 10), (1, 10))
        c = 2.0 / (1 - 2.0 * 0.01)
        assert affectance(a, [b], {0: 1.0, 1: 1.0}, prm) == pytest.approx(c * 101**-1.5, rel=1e-12)

    def test_hopeless_link(self, params):
        l = make_link(0, (0, 0), (1, 0))
        with pytest.raises(ModelError, match="isolation"):
            noise_margin(l, {0: 0.1}, params)


coords = st.floats(0, 30, allow_nan=False)


@st.composite
def instances(draw, max_links=6):
    n = draw(st.integers(1, max_links))
    links = []
    for i in range(n):
        sx, sy = draw(coords), draw(coords)
        r = draw(st.floats(1.0, 5.0))
        ang = draw(st.floats(0, 2 * math.pi))
        links.append(make_link(i, (sx, sy), (sx + r * math.cos(ang), sy + r * math.sin(ang))))
    powers = {l.id: draw(st.floats(1.0, 50.0)) for l in links}
    return links, powers


@settings(max_examples=200, deadline=None)
@given(instances())
def test_affectance_sinr_duality(inst):
    links, powers = inst
    prm = PhysicalParams()
    for l in links:
        s = sinr(l, links, powers, prm)
        if powers[l.id] * path_gain(l.src, l.dst, prm) <= prm.sigma * prm.xi:
            assert s < prm.sigma
            continue
        a = affectance(l, links, powers, prm)
        # avoid float ties right at the threshold
        if abs(s - prm.sigma) > 1e-9 * prm.sigma:
            assert (a <= 1) == (s >= prm.sigma)


@settings(max_examples=200, deadline=None)
@given(instances(), st.data())
def test_feasibility_monotone_under_removal(inst, data):
    links, powers = inst
    prm = PhysicalParams()
    if check_feasible(links, powers, prm):
        keep = data.draw(st.lists(st.booleans(), min_size=len(links), max_size=len(links)))
        sub = [l for l, k in zip(links, keep) if k]
        assert check_feasible(sub, powers, prm)


@settings(max_examples=200, deadline=None)
@given(instances(), st.floats(0.1, 100))
def test_scale_invariance(inst, c):
    links, powers = inst
    prm = PhysicalParams()
    scaled = PhysicalParams(xi=prm.xi * c)
    for l in links:
        a = sinr(l, links, powers, prm)
        b = sinr(l, links, {k: v * c for k, v in powers.items()}, scaled)
        assert b == pytest.approx(a, rel=1e-9)
