"""Ambient metrics in normal form ``2t dt dρ + 2ρ dt² + t² g̃(x, ρ)``.

Coordinates are ordered ``(x, t, ρ)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from ..catalog import EinsteinSpec, MuSolution, mu_for
from ..errors import JetUnavailable
from ..kernel.curvature import christoffel_from_jet, curvature_from_jet
from ..kernel.patch import Domain, MetricPatch, as_coords, block_diag
from .cones import radial_field

T_RANGE = (0.0, 50.0)
T_SAMPLE = (0.5, 2.0)


@dataclass(frozen=True, eq=False)
class RhoFamily:
    """A one-parameter family ``ρ -> g̃(·, ρ)`` of metrics on one chart.

    ``components(x, rho)`` must be traceable by jax in both arguments.
    """

    dim: int
    signature: tuple
    components: Callable
    domain: Domain
    label: str = ""


def normal_form_patch(family: RhoFamily, rho_lower: float, rho_upper: float, rho_sample,
                      rho_excluded=(), t_range=T_RANGE, t_sample=T_SAMPLE, label: str = "") -> MetricPatch:
    n = family.dim
    gt = family.components

    def components(y):
        x, t, rho = y[:n], y[n], y[n + 1]
        tail = jnp.array([[2 * rho, t], [t, 0.0]])
        return block_diag(t * t * gt(x, rho), tail)

    domain = family.domain.extend(t_range[0], t_range[1], t_sample).extend(
        rho_lower, rho_upper, rho_sample, rho_excluded)
    p, q = family.signature
    label = label or f"ambient({family.label})"
    names = tuple(f"x{i + 1}" for i in range(n)) + ("t", "rho")
    return MetricPatch(n + 2, (p + 1, q + 1), components, domain, label, names, label)


def product_family(g1: EinsteinSpec, g2: EinsteinSpec, mu: float) -> RhoFamily:
    """``(1 + μρ)² g1 + (1 - μρ)² g2``."""
    m1 = g1.m
    c1, c2 = g1.patch.components, g2.patch.components

    def components(x, rho):
        a, b = 1 + mu * rho, 1 - mu * rho
        if g2.m == 0:
            return a * a * c1(x)
        return block_diag(a * a * c1(x[:m1]), b * b * c2(x[m1:]))

    domain = g1.patch.domain.product(g2.patch.domain) if g2.m else g1.patch.domain
    p1, q1 = g1.signature
    p2, q2 = g2.signature
    return RhoFamily(g1.m + g2.m, (p1 + p2, q1 + q2), components, domain, f"{g1.label} x {g2.label}")


@dataclass(frozen=True, eq=False)
class ProductAmbientSpec:
    g1: EinsteinSpec
    g2: EinsteinSpec
    mu: Fraction
    ambient_patch: MetricPatch
    family: RhoFamily
    excluded_rho: tuple
    euler_field: Callable

    @property
    def m1(self) -> int:
        return self.g1.m

    @property
    def m2(self) -> int:
        return self.g2.m

    @property
    def n(self) -> int:
        return self.g1.m + self.g2.m

    def warp_a(self, rho):
        return 1 + float(self.mu) * rho

    def warp_b(self, rho):
        return 1 - float(self.mu) * rho

    def on_q_locus(self, y) -> bool:
        return float(as_coords(y)[self.n + 1]) == 0.0


def excluded_rho_values(mu: Fraction, m2: int) -> tuple:
    if mu == 0:
        return ()
    if m2 == 0:
        return (-1 / mu,)
    return (-1 / mu, 1 / mu)


def ambient_metric(g1: EinsteinSpec, g2: EinsteinSpec, mu: MuSolution | float | None = None,
                   t_range=T_RANGE, t_sample=T_SAMPLE) -> ProductAmbientSpec:
    """Ambient metric of ``[g1 × g2]``; ``mu`` is solved from the scalar curvatures if omitted."""
    sol = mu_for(g1, g2, mu)
    muq = sol.mu if not sol.free else Fraction(0)
    muf = float(muq)
    family = product_family(g1, g2, muf)
    excl = excluded_rho_values(muq, g2.m)
    if muq != 0:
        reach = 1 / abs(muf)
        lower, upper, sample = -4 * reach, 4 * reach, (-1.5 * reach, 1.5 * reach)
    else:
        lower, upper, sample = -10.0, 10.0, (-1.0, 1.0)
    patch = normal_form_patch(family, lower, upper, sample, excl, t_range, t_sample,
                              f"ambient({g1.label},{g2.label},mu={muq})")
    n = family.dim
    return ProductAmbientSpec(g1, g2, muq, patch, family, excl, radial_field(n + 2, n))


@dataclass(frozen=True)
class NormalFormRicci:
    """The three normal-form expressions evaluated literally at one point."""

    ij: np.ndarray
    rho_rho: float
    rho_j: np.ndarray


def normal_form_functions(family: RhoFamily) -> Callable:
    """Traceable ``(x, rho) -> (E_ij, E_ρρ, E_ρj)`` of the normal-form expressions."""
    n = family.dim
    gt = family.components
    d_rho = jax.jacfwd(gt, 1)
    d2_rho = jax.jacfwd(d_rho, 1)
    d_x = jax.jacfwd(gt, 0)
    d2_x = jax.jacfwd(d_x, 0)

    def mixed(x, rho):
        # A^l_j = g̃^{kl} g̃'_kj
        return jnp.linalg.inv(gt(x, rho)) @ d_rho(x, rho)

    d_mixed = jax.jacfwd(mixed, 0)  # [l, j, a] = ∂_a A^l_j

    def expressions(x, rho):
        g = gt(x, rho)
        gi = jnp.linalg.inv(g)
        gp, gpp = d_rho(x, rho), d2_rho(x, rho)
        d1 = d_x(x, rho)
        _, _, ric, _, _ = curvature_from_jet(g, d1, d2_x(x, rho))
        tr = jnp.einsum("kl,kl->", gi, gp)
        e_ij = (rho * gpp - rho * gp @ gi @ gp + 0.5 * rho * tr * gp + (2 - n) / 2 * gp
                - 0.5 * tr * g + ric)
        e_rr = -0.5 * jnp.einsum("ij,ij->", gi, gpp) + 0.25 * jnp.einsum("ij,kl,ik,jl->", gi, gi, gp, gp)
        gamma, _ = christoffel_from_jet(g, d1)
        a = mixed(x, rho)
        da = d_mixed(x, rho)
        div = (jnp.einsum("ljl->j", da) + jnp.einsum("lle,ej->j", gamma, a)
               - jnp.einsum("elj,le->j", gamma, a))
        grad_tr = jnp.einsum("lla->a", da)  # ∂_j of the trace of A
        return e_ij, e_rr, div - grad_tr

    return expressions


def ricci_normal_form(family: RhoFamily, x, rho: float) -> NormalFormRicci:
    """Evaluate the ``ij``, ``ρρ`` and ``ρj`` normal-form expressions at ``(x, ρ)``.

    The ``ρj`` entry is the divergence expression as written; for metrics
    in normal form it equals twice the ``ρj`` Ricci component (tested).
    """
    if not callable(family.components):
        raise JetUnavailable("family components are not differentiable")
    cache = family.__dict__.setdefault("_nf_cache", {})
    if "fn" not in cache:
        cache["fn"] = jax.jit(normal_form_functions(family))
    x = as_coords(x)
    family.domain.check(x)
    e_ij, e_rr, e_rj = cache["fn"](jnp.asarray(x), jnp.float64(rho))
    return NormalFormRicci(np.asarray(e_ij), float(e_rr), np.asarray(e_rj))
