"""Curvature tensors from metric jets.

Conventions (all indices are chart indices):

* ``Gamma[k, i, j] = Γ^k_ij``
* ``R^a_bcd = ∂_c Γ^a_db - ∂_d Γ^a_cb + Γ^a_ce Γ^e_db - Γ^a_de Γ^e_cb``
* ``Ric_bd = R^a_bad`` and ``R_abcd = g_ae R^e_bcd``, so the round sphere of
  sectional curvature K has ``R_abcd = K (g_ac g_bd - g_ad g_bc)``.
* Schouten ``P = (Ric - Sc g / (2(m-1))) / (m-2)``, Cotton
  ``C_abc = ∇_a P_bc - ∇_b P_ac``, Bach ``B_ab = ∇^c C_cab + P^cd W_acbd``.
  With this curvature sign the Bach tensor is conformally covariant of
  weight -2 in dimension 4 (tested).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import jax
import jax.numpy as jnp
import numpy as np

from ..errors import DimensionUnsupported, JetUnavailable
from .patch import MetricPatch, as_coords


@dataclass(frozen=True)
class CurvatureAtPoint:
    christoffel: np.ndarray
    riemann_lowered: np.ndarray
    ricci: np.ndarray
    scalar: float
    metric: np.ndarray
    inverse: np.ndarray


@dataclass(frozen=True)
class ConformalCurvatureAtPoint:
    schouten: np.ndarray
    cotton: np.ndarray
    weyl_lowered: np.ndarray
    bach: np.ndarray | None


def christoffel_from_jet(g, dg):
    ginv = jnp.linalg.inv(g)
    # T[i, j, l] = ∂_i g_jl + ∂_j g_il - ∂_l g_ij
    t = jnp.einsum("jli->ijl", dg) + jnp.einsum("ilj->ijl", dg) - dg
    return 0.5 * jnp.einsum("kl,ijl->kij", ginv, t), ginv


def riemann_from_jet(g, dg, d2g):
    """Returns ``(Γ, dΓ, R^a_bcd, g^-1)`` with ``dΓ[a, b, c, m] = ∂_m Γ^a_bc``."""
    gamma, ginv = christoffel_from_jet(g, dg)
    t = jnp.einsum("jli->ijl", dg) + jnp.einsum("ilj->ijl", dg) - dg
    dt = (jnp.einsum("jlim->ijlm", d2g) + jnp.einsum("iljm->ijlm", d2g) - d2g)
    dginv = -jnp.einsum("ka,abm,bl->klm", ginv, dg, ginv)
    dgamma = 0.5 * (jnp.einsum("klm,ijl->kijm", dginv, t) + jnp.einsum("kl,ijlm->kijm", ginv, dt))
    r_up = (jnp.einsum("adbc->abcd", dgamma) - jnp.einsum("acbd->abcd", dgamma)
            + jnp.einsum("ace,edb->abcd", gamma, gamma) - jnp.einsum("ade,ecb->abcd", gamma, gamma))
    return gamma, dgamma, r_up, ginv


def curvature_from_jet(g, dg, d2g):
    gamma, _, r_up, ginv = riemann_from_jet(g, dg, d2g)
    riem = jnp.einsum("ae,ebcd->abcd", g, r_up)
    ric = jnp.einsum("abad->bd", r_up)
    sc = jnp.einsum("bd,bd->", ginv, ric)
    return gamma, riem, ric, sc, ginv


@lru_cache(maxsize=None)
def _curvature_numpy():
    return jax.jit(curvature_from_jet)


def curvature(patch: MetricPatch, x) -> CurvatureAtPoint:
    """Christoffel symbols, lowered Riemann tensor, Ricci tensor and scalar at ``x``."""
    x = as_coords(x)
    if patch.dim == 0:
        z = np.zeros((0, 0))
        return CurvatureAtPoint(np.zeros((0, 0, 0)), np.zeros((0,) * 4), z, 0.0, z, z)
    g, dg, d2g = patch.jet(x, 2)
    gamma, riem, ric, sc, ginv = _curvature_numpy()(g, dg, d2g)
    return CurvatureAtPoint(np.asarray(gamma), np.asarray(riem), np.asarray(ric), float(sc),
                            np.asarray(g), np.asarray(ginv))


def _kulkarni_nomizu_p(g, p):
    return (jnp.einsum("ac,bd->abcd", g, p) - jnp.einsum("ad,bc->abcd", g, p)
            + jnp.einsum("bd,ac->abcd", g, p) - jnp.einsum("bc,ad->abcd", g, p))


def conformal_functions(components, dim: int):
    """Traceable point functions for Schouten, Cotton, Weyl and Bach.

    Higher covariant derivatives are obtained by differentiating the lower
    ones with forward-mode AD, which needs metric derivatives up to order 4
    for Bach.
    """
    d1 = jax.jacfwd(components)
    d2 = jax.jacfwd(d1)

    def basic(x):
        g = components(x)
        gamma, riem, ric, sc, ginv = curvature_from_jet(g, d1(x), d2(x))
        return g, ginv, gamma, riem, ric, sc

    def schouten(x):
        g, _, _, _, ric, sc = basic(x)
        return (ric - sc * g / (2 * (dim - 1))) / (dim - 2)

    def weyl(x):
        g, _, _, riem, _, _ = basic(x)
        return riem - _kulkarni_nomizu_p(g, schouten(x))

    dschouten = jax.jacfwd(schouten)

    def cotton(x):
        _, _, gamma, _, _, _ = basic(x)
        p = schouten(x)
        dp = dschouten(x)  # dp[b, c, a] = ∂_a P_bc
        nab = (jnp.einsum("bca->abc", dp) - jnp.einsum("eab,ec->abc", gamma, p)
               - jnp.einsum("eac,be->abc", gamma, p))  # ∇_a P_bc
        return nab - jnp.einsum("bac->abc", nab)

    dcotton = jax.jacfwd(cotton)

    def bach(x):
        g, ginv, gamma, _, _, _ = basic(x)
        c = cotton(x)
        dc = dcotton(x)  # dc[c, a, b, d] = ∂_d C_cab
        nab = (jnp.einsum("cabd->dcab", dc) - jnp.einsum("edc,eab->dcab", gamma, c)
               - jnp.einsum("eda,ceb->dcab", gamma, c) - jnp.einsum("edb,cae->dcab", gamma, c))
        div = jnp.einsum("dc,dcab->ab", ginv, nab)
        p_up = ginv @ schouten(x) @ ginv
        return div + jnp.einsum("cd,acbd->ab", p_up, weyl(x))

    return {"schouten": schouten, "weyl": weyl, "cotton": cotton, "bach": bach}


def _conformal_jitted(patch: MetricPatch):
    cache = patch.__dict__.setdefault("_conformal_cache", {})
    if not cache:
        fns = conformal_functions(patch.components, patch.dim)
        cache.update({k: jax.jit(v) for k, v in fns.items()})
    return cache


def conformal_curvature(patch: MetricPatch, x, with_bach: bool | None = None) -> ConformalCurvatureAtPoint:
    """Schouten, Cotton and Weyl at ``x``; Bach too in dimension 4."""
    x = as_coords(x)
    m = patch.dim
    if m < 3:
        raise DimensionUnsupported(f"Weyl/Cotton need dim >= 3, got {m}")
    if with_bach is None:
        with_bach = m == 4
    if with_bach and m != 4:
        raise DimensionUnsupported(f"Bach is implemented in dimension 4 only, got {m}")
    if not patch.traceable:
        raise JetUnavailable("conformal curvature needs order-3/4 jets; patch only has finite differences")
    patch.domain.check(x)
    fns = _conformal_jitted(patch)
    xj = jnp.asarray(x)
    bach = np.asarray(fns["bach"](xj)) if with_bach else None
    return ConformalCurvatureAtPoint(np.asarray(fns["schouten"](xj)), np.asarray(fns["cotton"](xj)),
                                     np.asarray(fns["weyl"](xj)), bach)


def einstein_tensor_divergence(patch: MetricPatch, x) -> np.ndarray:
    """``∇^i G_ij`` for the Einstein tensor ``G = Ric - Sc g / 2``; zero by Bianchi."""
    if not patch.traceable:
        raise JetUnavailable("divergence needs order-3 jets")
    patch.domain.check(as_coords(x))
    cache = patch.__dict__.setdefault("_div_cache", {})
    if "div" not in cache:
        comps = patch.components
        d1 = jax.jacfwd(comps)
        d2 = jax.jacfwd(d1)

        def einstein(y):
            g = comps(y)
            _, _, ric, sc, _ = curvature_from_jet(g, d1(y), d2(y))
            return ric - 0.5 * sc * g

        de = jax.jacfwd(einstein)

        def div(y):
            g = comps(y)
            gamma, ginv = christoffel_from_jet(g, d1(y))
            e = einstein(y)
            nab = (jnp.einsum("ija->aij", de(y)) - jnp.einsum("kai,kj->aij", gamma, e)
                   - jnp.einsum("kaj,ik->aij", gamma, e))
            return jnp.einsum("ai,aij->j", ginv, nab)

        cache["div"] = jax.jit(div)
    return np.asarray(cache["div"](jnp.asarray(as_coords(x))))


def mixed_operator_norm(g_inv: np.ndarray, t: np.ndarray) -> float:
    """Spectral norm of the (1,1) tensor ``g^-1 t``; invariant under constant rescaling of g."""
    return float(np.linalg.norm(g_inv @ t, 2))


def frame_norm(g: np.ndarray, t: np.ndarray) -> float:
    """Frobenius norm of the covariant tensor ``t`` in a frame orthonormal for ``|g|``.

    For Riemannian ``g`` this is the usual tensor norm; for indefinite
    metrics it is the norm with respect to the associated positive metric.
    """
    t = np.asarray(t)
    if t.ndim == 0:
        return float(abs(t))
    w, v = np.linalg.eigh(0.5 * (g + g.T))
    e = v / np.sqrt(np.abs(w))
    for axis in range(t.ndim):
        t = np.moveaxis(np.tensordot(e, t, axes=(0, axis)), 0, axis)
    return float(np.sqrt(np.sum(t * t)))
