"""Special Killing forms on Poincaré–Einstein interiors and their cone lifts."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from ..errors import BadMu, NotSpecialKilling, OrientationUnset
from ..kernel.curvature import frame_norm
from ..kernel.forms import (FormField, antisymmetrize, covariant_derivative_fn, exterior_d, levi_civita,
                            pullback_pad, wedge)
from ..kernel.patch import MetricPatch, as_coords
from .cones import radial_field, warped_cone_patch
from .poincare import PoincareSpec, poincare_metric

LIFT_CHECK_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class KillingFormSpec:
    """``ψ = h1^(m1+1) vol(g1)`` with companion ``γ = coth(s) ds``.

    ``poincare`` is the interior actually used; when the input had ``μ < 0``
    it is the factor-swapped metric and ``swapped`` is set.
    """

    poincare: PoincareSpec
    psi: FormField
    gamma: FormField
    degree: int
    killing_constant: Fraction
    swapped: bool
    orientation: int

    @property
    def mu(self) -> float:
        return float(self.poincare.mu)

    def s_of_r(self, r):
        return np.log(math.sqrt(self.mu / 2) * r)

    def h1(self, s):
        return math.sqrt(2 * self.mu) * np.sinh(s)

    def h2(self, s):
        return math.sqrt(2 * self.mu) * np.cosh(s)

    def h1_of_r(self, r):
        return self.mu * r / 2 - 1 / r

    def r_sharp(self, r):
        """``(|ψ|²)^(-1/2) = 1/|h1|`` as a function of ``r``."""
        return 1.0 / np.abs(self.h1_of_r(r))

    def r_index(self) -> int:
        return self.poincare.n


def special_killing_form(p: PoincareSpec, orientation: int | None = 1) -> KillingFormSpec:
    if orientation not in (1, -1):
        raise OrientationUnset("the volume form of g1 needs orientation +1 or -1")
    swapped = False
    if p.mu < 0:
        if p.g2.m == 0:
            raise BadMu("μ < 0 with a point second factor has no positive-μ normalisation")
        p = poincare_metric(p.g2, p.g1, -p.mu)
        swapped = True
    if p.mu <= 0:
        raise BadMu(f"special Killing form needs μ > 0, got {p.mu}")
    mu = float(p.mu)
    m1, n = p.g1.m, p.n
    dim = n + 1
    c1 = p.g1.patch.components
    eps = jnp.asarray(levi_civita(m1))

    def psi_components(y):
        r = y[n]
        h1 = mu * r / 2 - 1 / r
        vol = orientation * jnp.sqrt(jnp.abs(jnp.linalg.det(c1(y[:m1])))) * eps
        return h1 ** (m1 + 1) * pullback_pad(vol, dim, 0)

    e_r = jnp.zeros(dim).at[n].set(1.0)

    def gamma_components(y):
        r = y[n]
        h1 = mu * r / 2 - 1 / r
        h2 = mu * r / 2 + 1 / r
        return (h2 / (h1 * r)) * e_r  # coth(s) ds with ds = dr / r

    psi = FormField(m1, dim, psi_components, "psi")
    gamma = FormField(1, dim, gamma_components, "gamma")
    return KillingFormSpec(p, psi, gamma, m1, Fraction(m1 + 1), swapped, orientation)


def killing_residual_functions(patch: MetricPatch, phi: FormField, c: float):
    """Jitted ``x -> ∇φ - dφ/(p+1)`` and ``(x, Y) -> ∇_Y dφ - c g(Y,·)∧φ``."""
    p = phi.degree
    dphi = exterior_d(phi)
    nab = covariant_derivative_fn(patch, phi)
    nab_d = covariant_derivative_fn(patch, dphi)
    comps = patch.components

    def first(x):
        return nab(x) - dphi.components(x) / (p + 1)

    def second(x, y):
        lhs = jnp.tensordot(y, nab_d(x), axes=(0, 0))
        flat = comps(x) @ y
        rhs = c * (p + 1) * antisymmetrize(jnp.tensordot(flat, phi.components(x), axes=0))
        return lhs - rhs

    return jax.jit(first), jax.jit(second)


def _probe_points(patch: MetricPatch, count: int = 3) -> list[np.ndarray]:
    box = patch.domain.sampling_box()
    out = []
    for frac in (0.37, 0.61, 0.83, 0.22, 0.5)[: count + 2]:
        x = np.array([a + frac * (b - a) for a, b in box])
        if patch.domain.contains(x, 1e-3):
            out.append(x)
        if len(out) == count:
            break
    return out


@dataclass(frozen=True, eq=False)
class KillingLift:
    base: MetricPatch
    phi: FormField
    c: float
    cone_patch: MetricPatch
    lifted: FormField
    euler_field: Callable

    def restrict_insert(self, x) -> np.ndarray:
        """``ι_X φ̃`` at ``(x, u=1)``, returned on the base chart."""
        y = np.concatenate([as_coords(x), [1.0]])
        v = np.asarray(self.euler_field(jnp.asarray(y)))
        full = np.tensordot(v, self.lifted(y), axes=(0, 0))
        m = self.base.dim
        return full[(slice(0, m),) * self.phi.degree]


def killing_cone_lift(phi: FormField, base: MetricPatch, c, verify: bool = True,
                      tol: float = LIFT_CHECK_TOL) -> KillingLift:
    """``φ̃ = u^p du∧φ + u^(p+1)/(p+1) dφ`` on ``-sgn(c)((-c u²/(p+1)) g + du²)``.

    With ``verify`` the defining equations of φ are spot-checked at a few
    deterministic interior points; ``NotSpecialKilling`` is raised when a
    residual (in the frame norm) exceeds ``tol``.
    """
    c = float(c)
    p, m = phi.degree, base.dim
    if verify:
        first, second = killing_residual_functions(base, phi, c)
        rng = np.random.default_rng(7)
        for x in _probe_points(base):
            g = base(x)
            worst = frame_norm(g, np.asarray(first(jnp.asarray(x))))
            for _ in range(2):
                y = rng.standard_normal(m)
                y /= math.sqrt(abs(y @ g @ y)) or 1.0
                worst = max(worst, frame_norm(g, np.asarray(second(jnp.asarray(x), jnp.asarray(y)))))
            if worst > tol:
                raise NotSpecialKilling(f"defining equations fail by {worst:.3e} at {x}")
    cone = warped_cone_patch(base, -c / (p + 1), -math.copysign(1.0, c), "u",
                             label=f"killing_cone({base.label})")
    phic = phi.components
    ext = FormField(p, m + 1, lambda y: pullback_pad(phic(y[:m]), m + 1, 0), f"{phi.label}")
    du = FormField(1, m + 1, lambda y: jnp.zeros(m + 1).at[m].set(1.0), "du")
    first_term = wedge(du, ext).scaled(lambda y: y[m] ** p)
    second_term = exterior_d(ext).scaled(lambda y: y[m] ** (p + 1) / (p + 1))
    lifted = FormField(p + 1, m + 1, (first_term + second_term).components, f"lift({phi.label})")
    return KillingLift(base, phi, c, cone, lifted, radial_field(m + 1, m))
