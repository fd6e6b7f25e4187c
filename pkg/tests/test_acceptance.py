"""Acceptance criteria 1-10, one printed PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
import math
import os
import time
from fractions import Fraction

import jax.numpy as jnp
import numpy as np
import pytest

from pegeom.catalog import point, product_metric, resolve, solve_mu
from pegeom.cli import BUILTIN_NAMES, builtin, render, run_scenario
from pegeom.constructions import (ambient_metric, cone_coords, cone_product, metric_cone, multi_subproduct,
                                  poincare_metric, special_killing_form)
from pegeom.constructions.poincare import excluded_radius
from pegeom.kernel import curvature
from pegeom.verifier import (SamplePlan, check_bach_vanishing, check_coordinate_equivalence, check_dilation,
                             check_einstein, check_homothety_gradient, check_killing_lift, check_normal_form,
                             check_special_killing, linearity_slope, mismatched_family, perturb_patch,
                             unit_direction)

RESULTS: dict = {}


def record(number, passed, detail):
    RESULTS[number] = (bool(passed), detail)
    return passed


def ambient_scenarios():
    return [("S2xH2", ambient_metric(resolve("sphere(2,1)"), resolve("hyperbolic(2,1)"), Fraction(1, 2))),
            ("S3xpt", ambient_metric(resolve("sphere(3,1)"), point(), Fraction(1, 2))),
            ("flat3xflat2", ambient_metric(resolve("flat(3)"), resolve("flat(2)"), 0))]


def criterion_1():
    start = time.perf_counter()
    worst = {}
    for label, amb in ambient_scenarios():
        pts = SamplePlan(0, 20).points(amb.ambient_patch.domain)
        worst[label] = max(float(np.max(np.abs(curvature(amb.ambient_patch, y).ricci))) for y in pts)
    elapsed = time.perf_counter() - start
    ok = all(v < 1e-7 for v in worst.values()) and elapsed < 10
    detail = ", ".join(f"{k} max|Ric|={v:.2e}" for k, v in worst.items()) + f"; {elapsed:.1f}s (< 10s)"
    return record(1, ok, "ambient Ricci-flatness < 1e-7: " + detail)


def criterion_2():
    plan = SamplePlan(0, 20)
    parts, ok = [], True
    for label, amb in ambient_scenarios():
        r = check_normal_form(amb.family, amb.ambient_patch, plan, 1e-6)
        ok &= r.passed
        parts.append(f"{label} {r.max_abs_residual:.2e}")
    fam, patch = mismatched_family(resolve("sphere(3,1)"), 1.0)
    r = check_normal_form(fam, patch, plan, 1e-6)
    kmax = float(r.notes.split("kernel_max=")[1].split()[0])
    fmax = float(r.notes.split("normal_form_max=")[1].split()[0])
    flagged = kmax > 1e-3 and fmax > 1e-3
    ok &= r.passed and flagged
    parts.append(f"mismatched-mu agree {r.max_abs_residual:.2e}, kernel {kmax:.2f} / normal form {fmax:.2f} nonzero")
    return record(2, ok, "normal-form vs kernel Ricci within 1e-6: " + "; ".join(parts))


def criterion_3():
    start = time.perf_counter()
    plan = SamplePlan(0, 20)
    p = poincare_metric(resolve("sphere(2,1)"), resolve("hyperbolic(2,1)"))
    reports = [("S2xH2 dim5", check_einstein(p.interior_patch, -(p.dim - 1), plan, 1e-7, "operator"))]
    rec = multi_subproduct(resolve("hyperbolic(2,1)"), [resolve("sphere(2,1)"), resolve("sphere(2,1)")])
    for s in (1, 2):
        d = rec.dimension(s)
        reports.append((f"stage{s} dim{d}",
                        check_einstein(rec.stage(s).interior_patch, -(d - 1), plan, 1e-7, "operator")))
    elapsed = time.perf_counter() - start
    ok = all(r.passed for _, r in reports) and p.dim == 5 and elapsed < 30
    detail = ", ".join(f"{k} {r.max_abs_residual:.2e}" for k, r in reports)
    return record(3, ok, f"Einstein Ric = -(dim-1) g < 1e-7 (operator norm): {detail}; {elapsed:.1f}s (< 30s)")


def criterion_4():
    s2, h2 = resolve("sphere(2,1)"), resolve("hyperbolic(2,1)")
    cp = cone_product(metric_cone(s2, "s1"), metric_cone(h2, "s2"))
    r = check_coordinate_equivalence(cp, ambient_metric(s2, h2), SamplePlan(0, 50), 1e-9)
    rng = np.random.default_rng(0)
    worst = 0.0
    for s1, s2_, lam in np.column_stack([rng.uniform(0.1, 5, (100, 2)), rng.uniform(0.2, 4, 100)]):
        back = cone_coords("trho_to_s", cone_coords("s_to_trho", (s1, s2_), lam), lam)
        worst = max(worst, abs(back[0] - s1), abs(back[1] - s2_))
    ok = r.passed and r.samples_evaluated == 50 and worst < 1e-12
    return record(4, ok, f"cone-product equivalence {r.max_abs_residual:.2e} (< 1e-9, 50 points); "
                         f"roundtrip {worst:.2e} (< 1e-12)")


def criterion_5():
    sol = solve_mu(6, Fraction(3, 2), 6, Fraction(-3, 2))
    r0 = excluded_radius(sol.mu, 6)
    err = abs(float(r0) - 4 * math.sqrt(5))
    warp = Fraction(2) / sol.mu
    ok = isinstance(sol.mu, Fraction) and sol.mu == Fraction(1, 40) and err < 1e-12 and warp == 80
    return record(5, ok, f"mu = {sol.mu} (exact), r0 = {r0} = {float(r0)!r} (err {err:.1e}), "
                         f"warp factors (1 -/+ r^2/{warp})^2")


def criterion_6():
    k = special_killing_form(poincare_metric(resolve("sphere(2,1)"), resolve("hyperbolic(2,1)")))
    plan = SamplePlan(0, 20)
    sk = check_special_killing(k, plan, 1e-7)
    lift = check_killing_lift(k, plan, 1e-6)
    parallel, insertion = lift.flatten()
    ok = sk.passed and parallel.passed and insertion.max_abs_residual == 0.0
    subs = ", ".join(f"{p.check_name.split('.')[1]} {p.max_abs_residual:.1e}" for p in sk.flatten())
    return record(6, ok, f"special Killing (a)-(e) < 1e-7 [{subs}]; lift parallel {parallel.max_abs_residual:.1e} "
                         f"(< 1e-6); insertion {insertion.max_abs_residual!r} (exact)")


def criterion_7():
    plan = SamplePlan(0, 20)
    bach = check_bach_vanishing(product_metric(resolve("sphere(2,1)"), resolve("hyperbolic(2,1)")), plan, 1e-5)
    flat = resolve("flat(4)").patch
    flat_r = check_bach_vanishing(flat, plan, 1e-10)
    eps = (1e-3, 1e-4, 1e-5)
    d = unit_direction(4, 0, 0, lambda x: jnp.exp(-jnp.dot(x, x)) * (1 + x[1]))
    neg = [check_bach_vanishing(perturb_patch(flat, e, d), SamplePlan(0, 2), 1e-10) for e in eps]
    slope = linearity_slope(eps, [r.max_abs_residual for r in neg])
    ok = bach.passed and flat_r.passed and not any(r.passed for r in neg) and abs(slope - 1) <= 0.2
    return record(7, ok, f"Bach S2xH2 {bach.max_abs_residual:.2e} (< 1e-5, 20 points); flat4 "
                         f"{flat_r.max_abs_residual:.1e} (< 1e-10); perturbed control fails, slope {slope:.3f}")


def criterion_8():
    plan = SamplePlan(0, 20)
    s2, h2, s2s2 = resolve("sphere(2,1)"), resolve("hyperbolic(2,1)"), resolve(
        "einstein_product(sphere(2,1),sphere(2,1),1)")
    c, cs = metric_cone(s2), metric_cone(s2s2)
    cp = cone_product(metric_cone(s2, "s1"), metric_cone(h2, "s2"))
    amb = ambient_metric(s2, h2)
    checks = [("cone S2", check_homothety_gradient(c.cone_patch, c.euler_field, 2.0, plan, 1e-9)),
              ("cone S2xS2", check_homothety_gradient(cs.cone_patch, cs.euler_field, 2.0, plan, 1e-9)),
              ("X1+X2", check_homothety_gradient(cp.product_patch, cp.euler_field, 2.0, plan, 1e-9)),
              ("ambient t d/dt", check_homothety_gradient(amb.ambient_patch, amb.euler_field, 2.0, plan, 1e-9)),
              ("dilation a=3", check_dilation(s2, h2, 3, plan, 1e-9)),
              ("dilation a=1/4", check_dilation(s2, h2, Fraction(1, 4), plan, 1e-9))]
    lone = check_homothety_gradient(cp.product_patch, cp.partial_fields[0], 2.0, plan, 1e-9)
    ok = all(r.passed for _, r in checks) and not lone.passed
    detail = ", ".join(f"{k} {r.max_abs_residual:.1e}" for k, r in checks)
    return record(8, ok, f"homothety/gradient/dilation at 1e-9: {detail}; X1 alone fails "
                         f"({lone.max_abs_residual:.2f})")


def criterion_9():
    drag = run_scenario(builtin("drag-lemma-grid"))[0]
    trans = run_scenario(builtin("transverse-holonomy"))[0]
    loops = [r for r in run_scenario(builtin("cone-flatness")) if r.check_name == "loop_identity"][0]
    grid = drag.notes.split("grid ")[1].split(";")[0]
    ok = (drag.max_abs_residual < 1e-6 and grid == "10x10" and trans.max_abs_residual < 1e-5
          and loops.max_abs_residual < 1e-7)
    return record(9, ok, f"drag grid {grid} {drag.max_abs_residual:.1e} (< 1e-6); transverse holonomy "
                         f"{trans.max_abs_residual:.1e} (< 1e-5); flat-cone loops {loops.max_abs_residual:.1e} "
                         f"(< 1e-7)")


def criterion_10():
    saved = os.environ.get("EF_THREADS")
    outputs = {}
    try:
        for label, threads in (("t4a", "4"), ("t4b", "4"), ("t1", "1")):
            os.environ["EF_THREADS"] = threads
            outputs[label] = {name: render(run_scenario(builtin(name))) for name in BUILTIN_NAMES}
    finally:
        if saved is None:
            os.environ.pop("EF_THREADS", None)
        else:
            os.environ["EF_THREADS"] = saved
    bad = [n for n in BUILTIN_NAMES if not (outputs["t4a"][n] == outputs["t4b"][n] == outputs["t1"][n])]
    ok = not bad
    return record(10, ok, f"{len(BUILTIN_NAMES)} builtins byte-identical across two runs and EF_THREADS 1/4"
                  + (f"; differing: {', '.join(bad)}" if bad else ""))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
            criterion_9, criterion_10]


def line(n):
    ok, detail = RESULTS[n]
    return f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def summary_lines():
    return [line(n) for n in sorted(RESULTS)]


def _number(fn):
    return int(fn.__name__.split("_")[1])


def _run(fn):
    try:
        ok = fn()
    except Exception as exc:  # reported as a failed criterion, then re-raised
        record(_number(fn), False, f"raised {type(exc).__name__}: {exc}")
        raise
    assert ok, RESULTS[_number(fn)][1]


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_acceptance(fn):
    _run(fn)


if __name__ == "__main__":
    for fn in CRITERIA:
        try:
            fn()
        except Exception as exc:
            record(_number(fn), False, f"raised {type(exc).__name__}: {exc}")
        print(line(_number(fn)), flush=True)
