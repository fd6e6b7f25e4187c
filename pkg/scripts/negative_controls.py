"""Residual growth of perturbed inputs: log-log slope over eps in {1e-3, 1e-4, 1e-5}."""
import argparse
import dataclasses

import jax.numpy as jnp

from pegeom.catalog import resolve
from pegeom.constructions import ambient_metric, metric_cone, poincare_metric, special_killing_form
from pegeom.verifier import (SamplePlan, check_ambient_conditions, check_bach_vanishing, check_einstein,
                             check_homothety_gradient, check_special_killing, linearity_slope, mismatched_family,
                             perturb_patch, unit_direction)

EPS = (1e-3, 1e-4, 1e-5)


def controls(plan):
    s2, h2 = resolve("sphere(2,1)"), resolve("hyperbolic(2,1)")
    amb = ambient_metric(s2, h2)
    n = amb.n
    d_rho = unit_direction(n + 2, n + 1, n + 1, lambda y: 1 + y[0] ** 2)
    yield "einstein, wrong constant", lambda e: check_einstein(s2.patch, 1 + e, plan, 1e-7)
    yield "ambient + eps f drho^2", lambda e: check_ambient_conditions(
        amb, plan, 1e-7, perturb_patch(amb.ambient_patch, e, d_rho)).flatten()[2]
    yield "mismatched mu", lambda e: check_einstein(mismatched_family(resolve("sphere(3,1)"), 0.5 + e)[1], 0, plan,
                                                    1e-7)
    cone = metric_cone(s2)
    yield "scaled Euler field", lambda e: check_homothety_gradient(
        cone.cone_patch, lambda y: (1 + e) * cone.euler_field(y), 2.0, plan, 1e-9)
    k = special_killing_form(poincare_metric(s2, h2))
    yield "psi times (1 + eps x1)", lambda e: check_special_killing(
        k, plan, 1e-7, psi=k.psi.scaled(lambda y: 1 + e * y[0])).flatten()[0]
    flat = resolve("flat(4)").patch
    d_x = unit_direction(4, 0, 0, lambda x: jnp.exp(-jnp.dot(x, x)) * (1 + x[1]))
    yield "bach, flat4 + eps f dx^2", lambda e: check_bach_vanishing(perturb_patch(flat, e, d_x),
                                                                     dataclasses.replace(plan, count=2), 1e-10)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=6)
    args = ap.parse_args()
    plan = SamplePlan(args.seed, args.samples)
    for label, run in controls(plan):
        reports = [run(e) for e in EPS]
        res = [r.max_abs_residual for r in reports]
        verdict = "all fail" if not any(r.passed for r in reports) else "some pass"
        print(f"{label:28s} residuals {' '.join(f'{v:.3e}' for v in res)}  slope {linearity_slope(EPS, res):.3f}  "
              f"{verdict}")


if __name__ == "__main__":
    main()
