import csv
import dataclasses
import io
import math

import jax.numpy as jnp
import numpy as np
import pytest

from pegeom.catalog import product_metric, resolve
from pegeom.constructions import ambient_metric, metric_cone
from pegeom.errors import DimensionUnsupported, LambdaMismatch, ProjectionUndefined
from pegeom.kernel import MetricPatch, PathSpec, box_domain
from pegeom.verifier import (CSV_COLUMNS, CheckReport, SamplePlan, TransportProbe, check_ambient_conditions,
                             check_bach_vanishing, check_coordinate_equivalence, check_dilation, check_drag_lemma,
                             check_einstein, check_homothety_gradient, check_killing_lift, check_loop_identity,
                             check_normal_form, check_probe_crossing, check_special_killing,
                             check_transverse_holonomy, csv_text, drag_residuals, euler_probe, evaluate,
                             excursion_loops, holonomy_algebra_estimate, linearity_slope, mismatched_family,
                             perturb_patch, plain_text, thread_count, transverse_holonomy_residual,
                             unit_direction)

EPS = (1e-3, 1e-4, 1e-5)


def assert_linear(residuals):
    slope = linearity_slope(EPS, residuals)
    assert abs(slope - 1) <= 0.2, (slope, residuals)


def circle(centre, radius, a=0, b=1, dim=2):
    ctr = jnp.asarray(centre, dtype=float)
    ea = jnp.zeros(dim).at[a].set(1.0)
    eb = jnp.zeros(dim).at[b].set(1.0)
    return PathSpec(lambda t: ctr + radius * ((jnp.cos(2 * jnp.pi * t) - 1) * ea + jnp.sin(2 * jnp.pi * t) * eb),
                    closed=True, label="circle")


# reports and sampling --------------------------------------------------------

class TestReports:
    def test_pass_iff_within_tolerance(self):
        assert CheckReport.from_residuals("a", [1e-8, 2e-8], 2e-8).passed
        assert not CheckReport.from_residuals("a", [1e-8, 3e-8], 2e-8).passed

    def test_statistics(self):
        r = CheckReport.from_residuals("a", [1.0, 3.0], 5.0)
        assert r.max_abs_residual == 3.0 and r.mean_abs_residual == 2.0 and r.samples_evaluated == 2

    def test_nan_fails(self):
        r = CheckReport.from_residuals("a", [float("nan"), 0.0], 1.0)
        assert not r.passed and math.isinf(r.max_abs_residual)

    def test_combine(self):
        a = CheckReport.from_residuals("a", [1e-9], 1e-8)
        b = CheckReport.from_residuals("b", [1e-6], 1e-7)
        c = CheckReport.combine("ab", [a, b])
        assert not c.passed and c.max_abs_residual == 1e-6 and c.tolerance == 1e-7
        assert [p.check_name for p in c.flatten()] == ["a", "b"]

    def test_csv_contract(self):
        r = CheckReport.from_residuals("einstein", [0.1, 0.30000000000000004], 1e-7, scenario="demo")
        text = csv_text([r])
        assert text.endswith("\n") and "\r" not in text
        lines = text.split("\n")
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[0] == "check_name,scenario,samples,tolerance,max_abs_residual,mean_abs_residual,pass"
        row = next(csv.DictReader(io.StringIO(text)))
        assert row["pass"] == "false" and row["samples"] == "2"
        assert float(row["max_abs_residual"]) == 0.30000000000000004
        assert float(row["mean_abs_residual"]) == r.mean_abs_residual
        assert float(row["tolerance"]) == 1e-7

    def test_csv_empty(self):
        assert csv_text([]) == ",".join(CSV_COLUMNS) + "\n"

    def test_plain(self):
        text = plain_text([CheckReport.from_residuals("x", [0.0], 1.0, "note")])
        assert "PASS" in text and "note" in text


class TestSampling:
    def test_reproducible(self):
        dom = box_domain((-1.0, -1.0), (1.0, 1.0))
        a = SamplePlan(42, 10).points(dom)
        b = SamplePlan(42, 10).points(dom)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        c = SamplePlan(43, 10).points(dom)
        assert not np.array_equal(a[0], c[0])

    def test_prefix_stable(self):
        dom = box_domain((-1.0,), (1.0,))
        assert np.array_equal(SamplePlan(1, 3).points(dom)[2], SamplePlan(1, 9).points(dom)[2])

    def test_exclusion_band(self):
        dom = box_domain((-1.0,), (1.0,)).extend(0.0, 4.0, (1.9, 2.1), (2.0,))
        for x in SamplePlan(0, 200).points(dom):
            assert abs(x[1] - 2.0) > 1e-3

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("EF_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.setenv("EF_THREADS", "zero")
        with pytest.raises(ValueError):
            thread_count()

    @pytest.mark.parametrize("threads", ["1", "4"])
    def test_evaluate_order(self, monkeypatch, threads):
        monkeypatch.setenv("EF_THREADS", threads)
        assert evaluate(lambda v: v * v, list(range(30))) == [v * v for v in range(30)]

    def test_report_independent_of_threads(self, monkeypatch, s2):
        out = []
        for threads in ("1", "4"):
            monkeypatch.setenv("EF_THREADS", threads)
            out.append(csv_text([check_einstein(s2.patch, 1, SamplePlan(5, 12), 1e-7)]))
        assert out[0] == out[1]


# pointwise checks ----------------------------------------------------------

class TestEinsteinCheck:
    def test_flat(self, plan):
        r = check_einstein(resolve("flat(3)").patch, 0, plan, 1e-12)
        assert r.passed and r.max_abs_residual < 1e-12

    def test_poincare(self, poincare_s2h2):
        assert check_einstein(poincare_s2h2.interior_patch, -4, SamplePlan(0, 20), 1e-7, "operator").passed

    def test_wrong_constant(self, poincare_s2h2, plan):
        r = check_einstein(poincare_s2h2.interior_patch, -3, plan, 1e-7, "operator")
        assert not r.passed and abs(r.max_abs_residual - 1.0) < 1e-6

    def test_negative_control_linear(self, s2, plan):
        res = [check_einstein(s2.patch, 1 + e, plan, 1e-7).max_abs_residual for e in EPS]
        assert_linear(res)

    @pytest.mark.parametrize("name", ["sphere(2,1)", "hyperbolic(3,1)", "einstein_product(sphere(2,1),sphere(2,1),1)"])
    def test_fd_tier_same_verdict(self, name, plan):
        spec = resolve(name)
        exact = check_einstein(spec.patch, spec.einstein_constant, plan, 1e-4)
        fd = check_einstein(spec.patch.with_fd_jets(), spec.einstein_constant, plan, 1e-4)
        assert fd.tier == "fd" and exact.tier == "analytic"
        assert fd.passed == exact.passed
        assert fd.max_abs_residual != exact.max_abs_residual

    def test_fd_tier_catches_wrong_constant(self, s2, plan):
        assert not check_einstein(s2.patch.with_fd_jets(), 1.01, plan, 1e-4).passed


class TestAmbientCheck:
    def test_s2h2(self, amb_s2h2):
        r = check_ambient_conditions(amb_s2h2, SamplePlan(0, 20), 1e-7)
        assert r.passed and len(r.flatten()) == 3

    def test_flat(self, plan):
        amb = ambient_metric(resolve("flat(2)"), resolve("flat(2)"))
        assert check_ambient_conditions(amb, plan, 1e-7).passed

    def test_perturbed_fails_linearly(self, amb_s2h2, plan):
        n = amb_s2h2.n
        # a non-constant profile keeps the perturbation visible in the curvature
        d = unit_direction(n + 2, n + 1, n + 1, lambda y: 1 + y[0] ** 2)
        res = []
        for e in EPS:
            p = perturb_patch(amb_s2h2.ambient_patch, e, d)
            r = check_ambient_conditions(amb_s2h2, plan, 1e-7, p)
            ricci = r.flatten()[2]
            assert not ricci.passed
            res.append(ricci.max_abs_residual)
        assert_linear(res)


class TestNormalFormCheck:
    def test_agreement(self, amb_s2h2, plan):
        assert check_normal_form(amb_s2h2.family, amb_s2h2.ambient_patch, plan, 1e-6).passed

    def test_mismatched_both_paths_flag(self, plan):
        fam, patch = mismatched_family(resolve("sphere(3,1)"), 1.0)
        r = check_normal_form(fam, patch, plan, 1e-6)
        assert r.passed
        kmax = float(r.notes.split("kernel_max=")[1].split()[0])
        fmax = float(r.notes.split("normal_form_max=")[1].split()[0])
        assert kmax > 0.1 and fmax > 0.1

    def test_mismatch_scales_linearly(self, plan):
        s3 = resolve("sphere(3,1)")
        res = []
        for e in EPS:
            fam, patch = mismatched_family(s3, 0.5 + e)
            r = check_einstein(patch, 0, plan, 1e-7)
            assert not r.passed
            res.append(r.max_abs_residual)
        assert_linear(res)


class TestEquivalenceCheck:
    def test_pass(self, cone_pair_s2h2, amb_s2h2):
        r = check_coordinate_equivalence(cone_pair_s2h2, amb_s2h2, SamplePlan(0, 50), 1e-9)
        assert r.passed and r.samples_evaluated == 50
        assert "max 0.0" in r.notes

    def test_mismatch(self, cone_pair_s2h2, s2, h2):
        amb = ambient_metric(s2, resolve("point"))
        with pytest.raises(LambdaMismatch):
            check_coordinate_equivalence(cone_pair_s2h2, dataclasses.replace(amb, mu=amb.mu * 2), SamplePlan(0, 2),
                                         1e-9)

    def test_perturbed_fails_linearly(self, cone_pair_s2h2, amb_s2h2, plan):
        n = amb_s2h2.n
        res = []
        for e in EPS:
            p = perturb_patch(amb_s2h2.ambient_patch, e, unit_direction(n + 2, n, n + 1))
            r = check_coordinate_equivalence(cone_pair_s2h2, dataclasses.replace(amb_s2h2, ambient_patch=p), plan,
                                             1e-9)
            assert not r.passed
            res.append(r.max_abs_residual)
        assert_linear(res)


class TestHomothety:
    def test_cone(self, s2, plan):
        c = metric_cone(s2)
        assert check_homothety_gradient(c.cone_patch, c.euler_field, 2.0, plan, 1e-9).passed

    def test_cone_product(self, cone_pair_s2h2, plan):
        cp = cone_pair_s2h2
        assert check_homothety_gradient(cp.product_patch, cp.euler_field, 2.0, plan, 1e-9).passed
        r = check_homothety_gradient(cp.product_patch, cp.partial_fields[0], 2.0, plan, 1e-9)
        assert not r.passed
        hom, grad = r.flatten()
        assert not hom.passed and grad.passed

    def test_ambient(self, amb_s2h2, plan):
        r = check_homothety_gradient(amb_s2h2.ambient_patch, amb_s2h2.euler_field, 2.0, plan, 1e-9)
        assert r.passed and r.flatten()[1].max_abs_residual < 1e-9

    def test_scaled_field_linear(self, s2, plan):
        c = metric_cone(s2)
        res = []
        for e in EPS:
            r = check_homothety_gradient(c.cone_patch, lambda y, e=e: (1 + e) * c.euler_field(y), 2.0, plan, 1e-9)
            assert not r.passed
            res.append(r.max_abs_residual)
        assert_linear(res)

    def test_dilation(self, s2, h2, plan):
        assert check_dilation(s2, h2, 3, plan, 1e-9).passed
        assert check_dilation(s2, h2, 0.25, plan, 1e-9).passed


class TestKillingChecks:
    def test_pass(self, killing_s2h2):
        r = check_special_killing(killing_s2h2, SamplePlan(0, 20), 1e-7)
        assert r.passed and len(r.flatten()) == 5

    def test_lift(self, killing_s2h2, plan):
        r = check_killing_lift(killing_s2h2, plan, 1e-6)
        assert r.passed
        assert r.flatten()[1].max_abs_residual == 0.0

    def test_scaled_psi_fails_linearly(self, killing_s2h2, plan):
        k = killing_s2h2
        res = []
        for e in EPS:
            psi = k.psi.scaled(lambda y, e=e: 1 + e * y[0])
            r = check_special_killing(k, plan, 1e-7, psi=psi)
            first = r.flatten()[0]
            assert not first.passed
            res.append(first.max_abs_residual)
        assert_linear(res)


class TestBach:
    def test_flat(self, plan):
        r = check_bach_vanishing(resolve("flat(4)").patch, plan, 1e-10)
        assert r.passed and r.max_abs_residual < 1e-10

    def test_s2h2(self, s2, h2):
        assert check_bach_vanishing(product_metric(s2, h2), SamplePlan(0, 4), 1e-5).passed

    def test_dimension(self, s2, plan):
        with pytest.raises(DimensionUnsupported):
            check_bach_vanishing(resolve("sphere(3,1)").patch, plan, 1e-5)

    @pytest.mark.slow
    def test_perturbed_fails_linearly(self):
        flat = resolve("flat(4)").patch
        plan = SamplePlan(0, 2)
        d = unit_direction(4, 0, 0, lambda x: jnp.exp(-jnp.dot(x, x)) * (1 + x[1]))
        res = []
        for e in EPS:
            r = check_bach_vanishing(perturb_patch(flat, e, d), plan, 1e-10)
            assert not r.passed
            res.append(r.max_abs_residual)
        assert_linear(res)


# transport ------------------------------------------------------------------

def flat_plane(half=10.0):
    return MetricPatch(2, (2, 0), lambda x: jnp.eye(2), box_domain((-half, -half), (half, half)), "plane")


def plane_probe():
    return TransportProbe(lambda x: x, 2.0, lambda x, s: jnp.exp(s) * x, lambda x: x[0] - 1.0,
                          lambda x: jnp.log(1.0 / x[0]), "euler")


class TestDrag:
    def test_flat_plane_exact(self, plan):
        r = check_drag_lemma(flat_plane(), plane_probe(), circle([1.0, 0.5], 0.2), plan, 1e-9, 5,
                             [0.0, 0.3, 0.6, 0.9])
        assert r.passed and r.max_abs_residual < 1e-9
        assert "deviates by" in r.notes

    def test_zero_flow_is_identity(self, s2):
        c = metric_cone(s2)
        frame = np.eye(3) + 0.1
        loop = excursion_loops(c.cone_patch, c.s_index, SamplePlan(0, 1))[0]
        rows = drag_residuals(c.cone_patch, euler_probe(3, 2), loop, frame, [0.0, 0.5], [0.0])
        assert all(r == (0.0, 0.0) for r in rows)

    def test_literal_factor_deviates(self, plan):
        rows = drag_residuals(flat_plane(), plane_probe(), circle([1.0, 0.5], 0.2), np.eye(2), [0.0], [0.5])
        exact, literal = rows[0]
        assert exact < 1e-9 and literal > 0.05

    def test_s2s2_cone(self, cone_s2s2):
        c = cone_s2s2
        loop = excursion_loops(c.cone_patch, c.s_index, SamplePlan(0, 1))[0]
        r = check_drag_lemma(c.cone_patch, euler_probe(5, 4), loop, SamplePlan(0, 20), 1e-6, 4, [0.0, 0.45, 0.9])
        assert r.passed

    def test_wrong_constant_linear(self, plan):
        res = []
        for e in EPS:
            probe = dataclasses.replace(plane_probe(), c=2.0 + e)
            r = check_drag_lemma(flat_plane(), probe, circle([1.0, 0.5], 0.2), plan, 1e-9, 3, [0.5])
            assert not r.passed
            res.append(r.max_abs_residual)
        assert_linear(res)


class TestTransverseHolonomy:
    def test_loop_inside_E(self, cone_s2s2):
        c = cone_s2s2
        probe = euler_probe(5, 4)
        loop = circle([0.1, 0.2, -0.1, 0.0, 1.0], 0.15, 0, 1, dim=5)
        diff, _ = transverse_holonomy_residual(c.cone_patch, probe, loop, np.eye(5))
        assert diff < 1e-12

    def test_excursions(self, cone_s2s2):
        c = cone_s2s2
        loops = excursion_loops(c.cone_patch, c.s_index, SamplePlan(0, 2))
        r = check_transverse_holonomy(c.cone_patch, euler_probe(5, 4), loops, SamplePlan(0, 2), 1e-5)
        assert r.passed
        hol = float(r.notes.split("displacement ")[1])
        assert hol > 1e-3

    def test_flat_cone_identity(self, s2, plan):
        c = metric_cone(s2)
        loops = excursion_loops(c.cone_patch, c.s_index, SamplePlan(1, 2))
        assert check_loop_identity(c.cone_patch, loops, plan, 1e-7).passed
        r = check_transverse_holonomy(c.cone_patch, euler_probe(3, 2), loops, plan, 1e-7)
        assert r.passed and float(r.notes.split("displacement ")[1]) < 1e-7

    def test_base_off_E(self, cone_s2s2):
        loop = circle([0.1, 0.2, -0.1, 0.0, 1.3], 0.15, 0, 1, dim=5)
        with pytest.raises(ProjectionUndefined):
            transverse_holonomy_residual(cone_s2s2.cone_patch, euler_probe(5, 4), loop, np.eye(5))

    def test_flow_line_misses_E(self):
        probe = TransportProbe(lambda x: x, 2.0, lambda x, s: jnp.exp(s) * x, lambda x: x[0] ** 2 + 1.0,
                               lambda x: jnp.log(1.0 / x[0]), "never")
        with pytest.raises(ProjectionUndefined):
            check_probe_crossing(probe, [1.0, 0.0])

    def test_crossing_time(self):
        assert abs(check_probe_crossing(plane_probe(), [2.0, 1.0]) + math.log(2.0)) < 1e-12


class TestHolonomyEstimate:
    def test_flat(self, plan):
        assert holonomy_algebra_estimate(resolve("flat(3)").patch, [0.0, 0.0, 0.0], plan.with_count(3)) == 0

    def test_sphere(self, s2, plan):
        assert holonomy_algebra_estimate(s2.patch, [0.0, 0.0], plan.with_count(3)) == 1

    def test_cone(self, s2, plan):
        c = metric_cone(s2)
        assert holonomy_algebra_estimate(c.cone_patch, [0.0, 0.0, 1.0], plan.with_count(3)) == 0

    def test_s2s2(self, s2s2, plan):
        assert holonomy_algebra_estimate(s2s2.patch, [0.0] * 4, plan.with_count(2)) == 2
