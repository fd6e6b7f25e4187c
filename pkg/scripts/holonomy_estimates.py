"""Lower bounds on holonomy algebra dimensions for a few catalog and constructed metrics."""
import argparse

from pegeom.catalog import resolve
from pegeom.constructions import metric_cone
from pegeom.verifier import SamplePlan, holonomy_algebra_estimate


def cases():
    s2 = resolve("sphere(2,1)")
    s2s2 = resolve("einstein_product(sphere(2,1),sphere(2,1),1)")
    yield "flat(3)", resolve("flat(3)").patch, [0.0] * 3
    yield "sphere(2,1)", s2.patch, [0.0] * 2
    yield "sphere(3,1)", resolve("sphere(3,1)").patch, [0.0] * 3
    yield "S2xS2 (Einstein product)", s2s2.patch, [0.0] * 4
    yield "cone over S2", metric_cone(s2).cone_patch, [0.0, 0.0, 1.0]
    yield "cone over S2xS2", metric_cone(s2s2).cone_patch, [0.0] * 4 + [1.0]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=4)
    args = ap.parse_args()
    plan = SamplePlan(args.seed, args.points)
    for label, patch, base in cases():
        print(f"{label:28s} dim {patch.dim}  holonomy rank >= {holonomy_algebra_estimate(patch, base, plan)}")


if __name__ == "__main__":
    main()
