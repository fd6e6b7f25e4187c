import math
from fractions import Fraction

import jax.numpy as jnp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pegeom.catalog import resolve
from pegeom.errors import JetUnavailable, OutOfDomain, SingularMetric
from pegeom.kernel import (ChartPoint, Domain, MetricPatch, Surd, box_domain, metric_eval, product_patch,
                           pullback_patch, signature_of)


def flat(m):
    return MetricPatch(m, (m, 0), lambda x: jnp.eye(m), box_domain((-5.0,) * m, (5.0,) * m), "flat")


class TestSurd:
    def test_square_factors_are_pulled_out(self):
        s = Surd.sqrt(80)
        assert (s.coeff, s.radicand) == (4, 5)
        assert str(s) == "4*sqrt(5)"
        assert float(s) == pytest.approx(math.sqrt(80), abs=1e-12)

    def test_rational_radicand(self):
        s = Surd.sqrt(Fraction(2, 1) / Fraction(1, 2))
        assert str(s) == "2"

    @given(st.integers(1, 10_000), st.integers(1, 50))
    def test_value_squares_back(self, num, den):
        s = Surd.sqrt(Fraction(num, den))
        assert s.coeff ** 2 * s.radicand == Fraction(num, den)
        assert float(s) ** 2 == pytest.approx(num / den, rel=1e-12)

    def test_negative_radicand_rejected(self):
        with pytest.raises(ValueError):
            Surd.sqrt(-1)


class TestDomain:
    def test_excluded_locus_rejected(self):
        d = box_domain((-1.0, 0.0), (1.0, 3.0)).extend(-5.0, 5.0, excluded=(2.0,))
        assert d.contains([0.0, 1.0, 0.0])
        assert not d.contains([0.0, 1.0, 2.0])
        with pytest.raises(OutOfDomain):
            d.check([0.0, 1.0, 2.0])
        with pytest.raises(OutOfDomain):
            d.check([0.0, 4.0, 0.0])

    def test_surd_exclusion_is_exact(self):
        d = Domain((0.0,), (10.0,), ((0, Surd.sqrt(80)),))
        assert not d.contains([math.sqrt(80)])
        assert d.contains([math.sqrt(80) + 1e-6])

    def test_wrong_length(self):
        with pytest.raises(OutOfDomain):
            box_domain((0.0,), (1.0,)).check([0.5, 0.5])

    def test_product_shifts_exclusions(self):
        a = Domain((0.0,), (1.0,), ((0, 0.5),))
        b = Domain((0.0,), (1.0,), ((0, 0.25),))
        p = a.product(b)
        assert p.excluded == ((0, 0.5), (1, 0.25))


class TestMetricEval:
    def test_flat_identity(self):
        g, ginv = metric_eval(flat(3), [0.1, 0.2, 0.3])
        assert np.array_equal(g, np.eye(3))
        assert np.array_equal(ginv, np.eye(3))

    def test_sphere_origin(self):
        s2 = resolve("sphere(2,1)")
        g, ginv = metric_eval(s2.patch, ChartPoint((0.0, 0.0)))
        assert np.allclose(g, np.eye(2), atol=0)
        assert np.allclose(ginv, np.eye(2), atol=0)

    @given(st.lists(st.floats(-0.6, 0.6), min_size=2, max_size=2))
    def test_inverse_accuracy(self, x):
        g, ginv = metric_eval(resolve("hyperbolic(2,1)").patch, x)
        assert np.max(np.abs(g @ ginv - np.eye(2))) < 1e-12

    def test_ambient_at_t1_rho0(self, amb_s2h2):
        y = np.array([0.1, -0.2, 0.3, 0.05, 1.0, 0.0])
        g, _ = metric_eval(amb_s2h2.ambient_patch, y)
        n = 4
        assert g[n, n + 1] == 1.0 and g[n + 1, n] == 1.0
        assert g[n, n] == 0.0
        boundary = np.zeros((4, 4))
        boundary[:2, :2] = np.eye(2) / (1 + (0.01 + 0.04) / 4) ** 2
        boundary[2:, 2:] = np.eye(2) / (1 - (0.09 + 0.0025) / 4) ** 2
        assert np.allclose(g[:4, :4], boundary, atol=1e-15, rtol=0)

    def test_singular(self):
        p = MetricPatch(2, (1, 1), lambda x: jnp.diag(jnp.array([1.0, x[0]])), box_domain((-1.0, -1.0), (1.0, 1.0)))
        with pytest.raises(SingularMetric):
            metric_eval(p, [0.0, 0.0])

    def test_out_of_domain(self, s2):
        with pytest.raises(OutOfDomain):
            metric_eval(s2.patch, [5.0, 0.0])


class TestJets:
    @given(st.lists(st.floats(-0.6, 0.6), min_size=2, max_size=2))
    def test_order1_matches_central_differences(self, x):
        patch = resolve("sphere(2,1)").patch
        x = np.asarray(x)
        _, d1 = patch.jet(x, 1)
        h = 1e-5
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            fd = (patch(x + e) - patch(x - e)) / (2 * h)
            assert np.max(np.abs(fd - d1[..., a])) < 1e-8

    def test_fd_mode_stops_at_order_two(self, s2):
        fd = s2.patch.with_fd_jets()
        assert not fd.traceable
        with pytest.raises(JetUnavailable):
            fd.jet([0.1, 0.1], 3)

    def test_fd_and_ad_agree(self, s2):
        x = [0.2, -0.3]
        ad = s2.patch.jet(x, 2)
        fd = s2.patch.with_fd_jets(1e-4).jet(x, 2)
        assert np.max(np.abs(ad[1] - fd[1])) < 1e-7
        assert np.max(np.abs(ad[2] - fd[2])) < 1e-5

    def test_order_four_available(self, s2):
        jets = s2.patch.jet([0.1, 0.2], 4)
        assert jets[4].shape == (2, 2, 2, 2, 2, 2)
        with pytest.raises(JetUnavailable):
            s2.patch.jet([0.1, 0.2], 5)


class TestAssembly:
    def test_signature(self):
        assert signature_of(np.diag([1.0, -1.0, 2.0])) == (2, 1)

    def test_product_with_point_is_unchanged(self, s2):
        from pegeom.catalog import point
        assert product_patch(s2.patch, point().patch) is s2.patch

    def test_flat_product(self):
        p = product_patch(flat(2), flat(1))
        assert p.dim == 3 and p.signature == (3, 0)
        assert np.array_equal(p([0.0, 0.0, 0.0]), np.eye(3))

    def test_components_are_symmetric(self, amb_s2h2):
        g = amb_s2h2.ambient_patch([0.1, 0.2, -0.3, 0.1, 1.3, 0.7])
        assert np.array_equal(g, g.T)

    def test_pullback_polar(self):
        # flat plane in polar coordinates: dr² + r² dθ²
        dom = box_domain((0.1, -3.0), (5.0, 3.0))
        polar = pullback_patch(flat(2), lambda y: jnp.stack([y[0] * jnp.cos(y[1]), y[0] * jnp.sin(y[1])]), dom)
        g = polar([2.0, 0.7])
        assert np.allclose(g, np.diag([1.0, 4.0]), atol=1e-14)
