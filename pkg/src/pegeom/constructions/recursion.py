"""Iterated Poincaré–Einstein sub-products.

Stage ``s`` is the Poincaré metric with ``μ = -1/2`` whose first factor is
stage ``s - 1`` (viewed as an Einstein metric with ``Ric = -(d-1) G``) and
whose second factor is ``g_s``:

    G^s = r_s^-2 (dr_s² + (1 + r_s²/4)² G^(s-1) + (1 - r_s²/4)² g_s),  0 < r_s < 2.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..catalog import EinsteinSpec
from ..errors import BadNormalization
from .poincare import PoincareSpec, as_einstein, poincare_metric

MU = Fraction(-1, 2)
NORMALIZATION_TOL = 1e-9
R_SAMPLE = (0.3, 1.7)


@dataclass(frozen=True, eq=False)
class MultiSubProductSpec:
    g0: EinsteinSpec
    positives: tuple
    stages: tuple  # PoincareSpec per stage, stage 1 first

    @property
    def level(self) -> int:
        return len(self.positives)

    def dimension(self, stage: int | None = None) -> int:
        """``s + Σ_{i<=s} m_i`` for stage ``s`` (default: the last)."""
        s = self.level if stage is None else stage
        return s + self.g0.m + sum(g.m for g in self.positives[:s])

    def stage(self, s: int) -> PoincareSpec:
        return self.stages[s - 1]


def _check(spec: EinsteinSpec, target: Fraction, what: str):
    if abs(float(spec.Sc - target)) > NORMALIZATION_TOL:
        raise BadNormalization(f"{what} {spec.label} has Sc = {spec.Sc}, expected {target}")


def multi_subproduct(g0: EinsteinSpec, positives) -> MultiSubProductSpec:
    positives = tuple(positives)
    if not positives:
        raise ValueError("need at least one positive factor (level >= 1)")
    _check(g0, Fraction(-g0.m * (g0.m - 1)), "negative seed")
    for i, g in enumerate(positives, start=1):
        _check(g, Fraction(g.m * (g.m - 1)), f"factor {i}")
    stages = []
    current = g0
    for s, g in enumerate(positives, start=1):
        stage = poincare_metric(current, g, MU, r_upper=2.0, r_sample=R_SAMPLE, label=f"G{s}")
        stages.append(stage)
        current = as_einstein(stage, f"G{s}")
    return MultiSubProductSpec(g0, positives, tuple(stages))
