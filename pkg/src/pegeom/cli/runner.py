"""Build the construction chain of a scenario, run its checks and write the report."""
from __future__ import annotations

import dataclasses
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

from ..catalog import EinsteinSpec, point, product_metric, resolve, solve_mu
from ..constructions.poincare import excluded_radius
from ..constructions import (ambient_metric, cone_product, metric_cone,
                             multi_subproduct, poincare_metric, special_killing_form)
from ..errors import GeometryError, StageError
from ..verifier import (CheckReport, SamplePlan, check_ambient_conditions, check_bach_vanishing,
                        check_coordinate_equivalence, check_dilation, check_drag_lemma, check_einstein,
                        check_homothety_gradient, check_killing_lift, check_loop_identity, check_normal_form,
                        check_special_killing, check_transverse_holonomy, csv_text, euler_probe, excursion_loops,
                        plain_text)
from .config import ScenarioConfig

TIERS = ("analytic", "fd")
FD_TOL = 1e-4
# checks whose residuals come from metric jets; the fd tier swaps these to finite differences
JET_CHECKS = ("einstein", "ambient", "normal_form", "ricci_flat")

DEFAULT_TOL = {
    "einstein": 1e-7,
    "ambient": 1e-7,
    "normal_form": 1e-6,
    "equivalence": 1e-9,
    "homothety": 1e-9,
    "dilation": 1e-9,
    "killing": 1e-7,
    "killing_lift": 1e-6,
    "bach": 1e-5,
    "transport": 1e-6,
    "drag": 1e-6,
    "transverse_holonomy": 1e-5,
    "loop_identity": 1e-7,
    "ricci_flat": 1e-7,
    "arithmetic": 1e-12,
}


class _Context:
    """Lazily built, memoised construction stages; failures carry the stage name."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self._cache: dict = {}

    def get(self, stage: str, build: Callable):
        if stage not in self._cache:
            try:
                self._cache[stage] = build()
            except GeometryError as exc:
                raise StageError(stage, exc) from exc
        return self._cache[stage]

    def _factor(self, key: str) -> EinsteinSpec:
        return self.get(f"factor {key}", lambda: resolve(self.config.factors[key]))

    @property
    def g1(self):
        return self._factor("g1")

    @property
    def g2(self):
        if "g2" not in self.config.factors:
            return self.get("factor g2", point)
        return self._factor("g2")

    def cone(self):
        return self.get("cone", lambda: metric_cone(self.g1, "s1" if self.g2.m else "s"))

    def cone_pair(self):
        return self.get("cone product", lambda: cone_product(self.cone(), metric_cone(self.g2, "s2")))

    def ambient(self):
        return self.get("ambient", lambda: ambient_metric(self.g1, self.g2, self.config.mu))

    def poincare(self):
        return self.get("poincare", lambda: poincare_metric(self.g1, self.g2, self.config.mu))

    def killing(self):
        return self.get("killing", lambda: special_killing_form(self.poincare()))

    def recursion(self):
        cfg = self.config
        return self.get("recursion", lambda: multi_subproduct(
            self._factor("g0"), [self._factor(k) for k in cfg.positives]))


def _tolerance(config: ScenarioConfig, check: str, tier: str) -> float:
    if check in config.tolerances and config.tolerances[check] is not None:
        return float(config.tolerances[check])
    if tier == "fd" and check in JET_CHECKS:
        return FD_TOL
    return DEFAULT_TOL[check]


def _jets(patch, check: str, tier: str):
    return patch.with_fd_jets() if tier == "fd" and check in JET_CHECKS else patch


def _run_check(ctx: _Context, check: str, plan: SamplePlan, tier: str) -> list[CheckReport]:
    cfg = ctx.config
    tol = _tolerance(cfg, check, tier)
    chain = cfg.chain
    opts = cfg.options
    if check == "einstein":
        if "recursion" in chain:
            rec = ctx.recursion()
            out = []
            for s in range(1, rec.level + 1):
                stage = rec.stage(s)
                patch = _jets(stage.interior_patch, check, tier)
                out.append(check_einstein(patch, -(rec.dimension(s) - 1), plan, tol, "operator",
                                          f"einstein.stage{s}"))
            return out
        if "poincare" in chain:
            p = ctx.poincare()
            return [check_einstein(_jets(p.interior_patch, check, tier), p.einstein_constant, plan, tol,
                                   "operator")]
        specs = [("g1", ctx.g1)] + ([("g2", ctx.g2)] if "g2" in cfg.factors else [])
        return [check_einstein(_jets(g.patch, check, tier), g.einstein_constant, plan, tol,
                               name="einstein" if len(specs) == 1 else f"einstein.{k}") for k, g in specs]
    if check == "ambient":
        amb = ctx.ambient()
        return check_ambient_conditions(amb, plan, tol, _jets(amb.ambient_patch, check, tier)).flatten()
    if check == "normal_form":
        amb = ctx.ambient()
        return [check_normal_form(amb.family, _jets(amb.ambient_patch, check, tier), plan, tol)]
    if check == "equivalence":
        return [check_coordinate_equivalence(ctx.cone_pair(), ctx.ambient(), plan, tol)]
    if check == "homothety":
        if "ambient" in chain:
            amb = ctx.ambient()
            return [check_homothety_gradient(amb.ambient_patch, amb.euler_field, 2.0, plan, tol)]
        if ctx.g2.m:
            cp = ctx.cone_pair()
            return [check_homothety_gradient(cp.product_patch, cp.euler_field, 2.0, plan, tol)]
        c = ctx.cone()
        return [check_homothety_gradient(c.cone_patch, c.euler_field, 2.0, plan, tol)]
    if check == "dilation":
        return [check_dilation(ctx.g1, ctx.g2, opts["dilation_alpha"], plan, tol)]
    if check == "killing":
        k = ctx.killing()
        lift_tol = _tolerance(cfg, "killing_lift", tier) if "killing" not in cfg.tolerances else tol
        parts = [check_special_killing(k, plan, tol), check_killing_lift(k, plan, lift_tol)]
        return [CheckReport.combine("killing", parts, f"c={k.killing_constant}")]
    if check == "bach":
        return [check_bach_vanishing(product_metric(ctx.g1, ctx.g2), plan, tol)]
    if check in ("transport", "drag"):
        if check == "transport" and "ambient" in chain:
            amb = ctx.ambient()
            patch, radial = amb.ambient_patch, amb.n
        else:
            c = ctx.cone()
            patch, radial = c.cone_patch, c.s_index
        probe = euler_probe(patch.dim, radial)
        loop = excursion_loops(patch, radial, plan.with_count(1))[0]
        grid = opts["grid"]
        s_values = [0.9 * i / (grid - 1) for i in range(grid)] if grid > 1 else [0.0]
        return [check_drag_lemma(patch, probe, loop, plan, tol, grid, s_values, check)]
    if check == "transverse_holonomy":
        c = ctx.cone()
        loops = excursion_loops(c.cone_patch, c.s_index, plan.with_count(opts["loops"]))
        return [check_transverse_holonomy(c.cone_patch, euler_probe(c.cone_patch.dim, c.s_index), loops, plan, tol)]
    if check == "loop_identity":
        c = ctx.cone()
        loops = excursion_loops(c.cone_patch, c.s_index, plan.with_count(opts["loops"]))
        return [check_loop_identity(c.cone_patch, loops, plan, tol)]
    if check == "ricci_flat":
        patch = ctx.cone().cone_patch if "cone" in chain else ctx.ambient().ambient_patch
        return [check_einstein(_jets(patch, check, tier), 0, plan, tol, name="ricci_flat")]
    if check == "arithmetic":
        return _arithmetic(ctx, tol)
    raise ValueError(f"unknown check {check!r}")


def _arithmetic(ctx: _Context, tol: float) -> list[CheckReport]:
    cfg = ctx.config
    a = cfg.arithmetic
    if a.get("m1") is not None:
        m1, sc1, m2, sc2 = a["m1"], a["sc1"], a["m2"], a["sc2"]
    else:
        m1, sc1, m2, sc2 = ctx.g1.m, ctx.g1.Sc, ctx.g2.m, ctx.g2.Sc
    sol = ctx.get("solve_mu", lambda: solve_mu(m1, sc1, m2, sc2))
    if sol.free:
        return [CheckReport.from_residuals("arithmetic.mu", [0.0], tol, "mu is free")]
    r0 = excluded_radius(sol.mu, m2)
    out = []
    exp_mu = a.get("expect_mu")
    res_mu = abs(float(sol.mu - exp_mu)) if exp_mu is not None else 0.0
    out.append(CheckReport.from_residuals("arithmetic.mu", [res_mu], tol, f"mu={sol.mu}"))
    if r0 is not None:
        exp_r2 = a.get("expect_r0_squared")
        res_r = abs(float(r0) - math.sqrt(float(exp_r2))) if exp_r2 is not None else 0.0
        out.append(CheckReport.from_residuals("arithmetic.excluded_radius", [res_r], tol,
                                              f"r0={r0} ({float(r0)!r}); warp 1 - r^2/{Fraction(2) / sol.mu}"))
    return out


def run_scenario(config: ScenarioConfig, tier: str = "analytic") -> list[CheckReport]:
    """Run every configured check in order; reports carry the scenario name and the seed in their notes."""
    if tier not in TIERS:
        raise ValueError(f"tolerance tier must be one of {TIERS}, got {tier!r}")
    ctx = _Context(config)
    plan = SamplePlan(config.seed, config.samples)
    reports = []
    for check in config.checks:
        try:
            produced = _run_check(ctx, check, plan, tier)
        except StageError:
            raise
        except GeometryError as exc:
            raise StageError(f"check {check}", exc) from exc
        for r in produced:
            note = f"seed={config.seed}" + (f"; {r.notes}" if r.notes else "")
            reports.append(dataclasses.replace(r.with_scenario(config.name), notes=note))
    return reports


def render(reports: Iterable[CheckReport], fmt: str = "csv") -> str:
    reports = list(reports)
    if fmt == "csv":
        return csv_text(reports)
    if fmt == "plain":
        return plain_text(reports)
    raise ValueError(f"unknown format {fmt!r}; use csv or plain")


def emit_report(reports: Iterable[CheckReport], fmt: str = "csv", path=None) -> None:
    """Write the report to ``path`` (stdout when ``None``); raises ``OSError`` on write failure."""
    text = render(reports, fmt)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
