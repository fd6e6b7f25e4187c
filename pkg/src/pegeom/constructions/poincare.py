"""Poincaré–Einstein metrics ``r^-2(dr² + (1 - μr²/2)² g1 + (1 + μr²/2)² g2)``.

Coordinates are ordered ``(x1, x2, r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import jax.numpy as jnp

from ..catalog import EinsteinSpec, MuSolution, mu_for, product_metric
from ..kernel.patch import Domain, MetricPatch, Surd, block_diag, pullback_patch
from .ambient import T_RANGE, T_SAMPLE
from .cones import radial_field, warped_cone_patch

R_FLOOR = 0.05


def excluded_radius(mu: Fraction, m2: int) -> Surd | None:
    """Zero of a warp factor, ``sqrt(2/|μ|)``, when one lies on the positive axis."""
    if mu == 0 or (mu < 0 and m2 == 0):
        return None
    return Surd.sqrt(2 / abs(mu))


@dataclass(frozen=True, eq=False)
class PoincareSpec:
    g1: EinsteinSpec
    g2: EinsteinSpec
    mu: Fraction
    interior_patch: MetricPatch
    excluded_r: Surd | None
    boundary_metric: MetricPatch

    @property
    def n(self) -> int:
        """Boundary dimension ``m1 + m2``."""
        return self.g1.m + self.g2.m

    @property
    def dim(self) -> int:
        return self.n + 1

    @property
    def einstein_constant(self) -> int:
        return -self.n

    def defining_function(self, y) -> float:
        return float(y[self.n])


def poincare_metric(g1: EinsteinSpec, g2: EinsteinSpec, mu: MuSolution | float | None = None,
                    r_upper: float | None = None, r_sample=None, label: str = "") -> PoincareSpec:
    sol = mu_for(g1, g2, mu)
    muq = sol.mu if not sol.free else Fraction(0)
    muf = float(muq)
    m1, n = g1.m, g1.m + g2.m
    c1, c2 = g1.patch.components, g2.patch.components

    def components(y):
        r = y[n]
        a = 1 - muf * r * r / 2
        b = 1 + muf * r * r / 2
        if g2.m == 0:
            inner = a * a * c1(y[:m1])
        else:
            inner = block_diag(a * a * c1(y[:m1]), b * b * c2(y[m1:n]))
        return block_diag(inner, jnp.ones((1, 1))) / (r * r)

    r0 = excluded_radius(muq, g2.m)
    scale = math.sqrt(2 / abs(muf)) if muf else 1.0
    upper = r_upper if r_upper is not None else 4 * scale
    sample = r_sample if r_sample is not None else (R_FLOOR * scale if muf else R_FLOOR, 1.5 * scale)
    base_domain = g1.patch.domain.product(g2.patch.domain) if g2.m else g1.patch.domain
    domain = base_domain.extend(0.0, upper, sample, (r0,) if r0 is not None and float(r0) < upper else ())
    boundary = product_metric(g1, g2)
    p, q = boundary.signature
    label = label or f"poincare({g1.label},{g2.label},mu={muq})"
    names = boundary.coord_names + ("r",)
    patch = MetricPatch(n + 1, (p + 1, q), components, domain, label, names, label)
    return PoincareSpec(g1, g2, muq, patch, r0, boundary)


def as_einstein(p: PoincareSpec, label: str = "") -> EinsteinSpec:
    """View the interior as an Einstein metric with ``Ric = -n g``."""
    d = p.dim
    sc = Fraction(-d * (d - 1))
    return EinsteinSpec(p.interior_patch, d, sc, sc / (d * (d - 1)), label or p.interior_patch.label)


@dataclass(frozen=True, eq=False)
class AmbientFromPoincare:
    """The cone ``u² g⁺ - du²`` in ``(x, r, u)`` and the same metric in ``(x, t, ρ)``."""

    poincare: PoincareSpec
    cone_patch: MetricPatch
    normal_patch: MetricPatch
    cone_euler: object
    normal_euler: object


def ambient_from_poincare(p: PoincareSpec, t_range=T_RANGE, t_sample=T_SAMPLE) -> AmbientFromPoincare:
    """Reverse the Poincaré construction: cone over the interior, re-expressed via ``ρ = -r²/2, t = u/r``."""
    n = p.n
    interior = p.interior_patch
    cone = warped_cone_patch(interior, -1.0, -1.0, "u", t_range, t_sample, f"cone({interior.label})")

    def to_cone(y):
        x, t, rho = y[:n], y[n], y[n + 1]
        r = jnp.sqrt(-2 * rho)
        return jnp.concatenate([x, jnp.stack([r, r * t])])

    box = interior.domain.sampling_box()
    rlo, rhi = box[n]
    excl = tuple(-float(v) ** 2 / 2 for i, v in interior.domain.excluded if i == n)
    base = interior.domain
    xdom = Domain(base.lower[:n], base.upper[:n], tuple(e for e in base.excluded if e[0] < n),
                  tuple(b[0] for b in box[:n]), tuple(b[1] for b in box[:n]))
    domain = xdom.extend(t_range[0], t_range[1], t_sample).extend(
        -base.upper[n] ** 2 / 2, 0.0, (-rhi * rhi / 2, -rlo * rlo / 2), excl)
    names = interior.coord_names[:n] + ("t", "rho")
    normal = pullback_patch(cone, to_cone, domain, f"normal({cone.label})", names)
    return AmbientFromPoincare(p, cone, normal, radial_field(n + 2, n + 1), radial_field(n + 2, n))
