"""Metric cones over Einstein bases and products of cone pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import jax.numpy as jnp
import numpy as np

from ..catalog import EinsteinSpec
from ..errors import LambdaMismatch, OutOfDomain, RicciFlatBase
from ..kernel.patch import Domain, MetricPatch, block_diag

S_RANGE = (0.0, 50.0)
S_SAMPLE = (0.5, 2.0)


def radial_field(dim: int, index: int) -> Callable:
    """The vector field ``y_index ∂/∂y_index``."""
    e = jnp.zeros(dim).at[index].set(1.0)
    return lambda y: y[index] * e


def warped_cone_patch(base: MetricPatch, coef: float, outer: float, coord_name: str = "s",
                      s_range=S_RANGE, s_sample=S_SAMPLE, label: str = "") -> MetricPatch:
    """``outer * (coef s² g + ds²)`` on ``base × (0, ∞)``, the radial coordinate last."""
    m = base.dim
    c = base.components

    def components(y):
        s = y[m]
        return outer * block_diag(coef * s * s * c(y[:m]), jnp.ones((1, 1)))

    p, q = base.signature
    if coef * outer < 0:
        p, q = q, p
    sig = (p + 1, q) if outer > 0 else (p, q + 1)
    domain = base.domain.extend(s_range[0], s_range[1], s_sample)
    label = label or f"cone({base.label})"
    return MetricPatch(m + 1, sig, components, domain, label, base.coord_names + (coord_name,), label)


@dataclass(frozen=True, eq=False)
class ConeSpec:
    base: EinsteinSpec
    cone_patch: MetricPatch
    lam: Fraction
    sgn: int
    euler_field: Callable
    coord_name: str = "s"

    @property
    def s_index(self) -> int:
        return self.base.m


def metric_cone(spec: EinsteinSpec, coord_name: str = "s", s_range=S_RANGE, s_sample=S_SAMPLE) -> ConeSpec:
    """``sgn(λ)(λ s² g + ds²)``, Ricci-flat when ``Sc(g) = m(m-1)λ``."""
    if spec.m < 1 or spec.lam is None or spec.lam == 0:
        raise RicciFlatBase(f"{spec.label} has Sc = {spec.Sc}; its cone is not defined")
    lam = spec.lam
    sgn = 1 if lam > 0 else -1
    patch = warped_cone_patch(spec.patch, float(lam), float(sgn), coord_name, s_range, s_sample,
                              f"cone({spec.label})")
    return ConeSpec(spec, patch, lam, sgn, radial_field(spec.m + 1, spec.m), coord_name)


@dataclass(frozen=True, eq=False)
class ConeProductSpec:
    """``ds1² - ds2² + λ s1² g1 + λ s2² g2`` in coordinates ``(x1, x2, s1, s2)``."""

    cone1: ConeSpec
    cone2: ConeSpec
    product_patch: MetricPatch
    lam: Fraction
    euler_field: Callable
    partial_fields: tuple  # (X1, X2)

    @property
    def mu(self) -> Fraction:
        return self.lam / 2


def cone_product(c1: ConeSpec, c2: ConeSpec) -> ConeProductSpec:
    """Product of a cone pair normalised with the common constant ``λ = λ1 = -λ2``.

    The overall sign is the one of the pair formula, so for ``λ > 0`` the
    factors coincide with the standalone cones.
    """
    if c1.lam != -c2.lam:
        raise LambdaMismatch(f"cone pair needs λ2 = -λ1, got λ1={c1.lam}, λ2={c2.lam}")
    lam = float(c1.lam)
    m1, m2 = c1.base.m, c2.base.m
    g1, g2 = c1.base.patch.components, c2.base.patch.components
    n = m1 + m2

    def components(y):
        x1, x2, s1, s2 = y[:m1], y[m1:n], y[n], y[n + 1]
        top = block_diag(lam * s1 * s1 * g1(x1), lam * s2 * s2 * g2(x2))
        return block_diag(top, jnp.diag(jnp.array([1.0, -1.0])))

    dom1, dom2 = c1.cone_patch.domain, c2.cone_patch.domain
    box = dom1.sampling_box()[:m1] + dom2.sampling_box()[:m2] + [dom1.sampling_box()[m1], dom2.sampling_box()[m2]]
    domain = Domain(dom1.lower[:m1] + dom2.lower[:m2] + (dom1.lower[m1], dom2.lower[m2]),
                    dom1.upper[:m1] + dom2.upper[:m2] + (dom1.upper[m1], dom2.upper[m2]),
                    tuple(e for e in dom1.excluded if e[0] < m1) + tuple((i + m1, v) for i, v in dom2.excluded if i < m2),
                    tuple(b[0] for b in box), tuple(b[1] for b in box))
    p1, q1 = c1.base.signature
    p2, q2 = c2.base.signature
    if lam > 0:
        sig = (p1 + p2 + 1, q1 + q2 + 1)
    else:
        sig = (q1 + q2 + 1, p1 + p2 + 1)
    label = f"{c1.cone_patch.label} x {c2.cone_patch.label}"
    names = (c1.base.patch.coord_names + c2.base.patch.coord_names + ("s1", "s2"))
    patch = MetricPatch(n + 2, sig, components, domain, label, names, label)
    x1f, x2f = radial_field(n + 2, n), radial_field(n + 2, n + 1)
    return ConeProductSpec(c1, c2, patch, c1.lam, lambda y: x1f(y) + x2f(y), (x1f, x2f))


def _check_lam(lam) -> float:
    lam = float(lam)
    if lam <= 0:
        raise OutOfDomain(f"the (t, ρ) chart needs λ > 0, got {lam}")
    return lam


def s_to_trho(s1, s2, lam):
    """Traceable ``(s1, s2) -> (t, ρ)``; no domain checks."""
    return math.sqrt(lam) * (s1 + s2) / 2, 2 * (s1 - s2) / (lam * (s1 + s2))


def trho_to_s(t, rho, lam):
    """Traceable ``(t, ρ) -> (s1, s2)``; no domain checks."""
    mu = lam / 2
    k = t / math.sqrt(2 * mu)
    return k * (1 + mu * rho), k * (1 - mu * rho)


def cone_coords(direction: str, inputs, lam) -> tuple[float, float]:
    """Change between cone radii ``(s1, s2)`` and ambient coordinates ``(t, ρ)``."""
    lam = _check_lam(lam)
    a, b = (float(v) for v in inputs)
    if direction == "s_to_trho":
        if not (a > 0 and b > 0):
            raise OutOfDomain(f"cone radii must be positive, got ({a}, {b})")
        return s_to_trho(a, b, lam)
    if direction == "trho_to_s":
        mu = lam / 2
        if not (a > 0 and 1 + mu * b > 0 and 1 - mu * b > 0):
            raise OutOfDomain(f"(t, ρ) = ({a}, {b}) is outside the image of the positive quadrant")
        return trho_to_s(a, b, lam)
    raise ValueError(f"unknown direction {direction!r}")


def cone_coords_jacobian(s1: float, s2: float, lam: float) -> float:
    """``det ∂(t, ρ)/∂(s1, s2) = -2 / (√λ (s1 + s2))``."""
    return float(np.linalg.det(np.array([
        [math.sqrt(lam) / 2, math.sqrt(lam) / 2],
        [4 * s2 / (lam * (s1 + s2) ** 2), -4 * s1 / (lam * (s1 + s2) ** 2)],
    ])))
