"""Lie derivatives of the metric along vector fields.

Vector fields are traceable callables ``x -> V(x)`` returning the
coordinate components ``V^i``.
"""
from __future__ import annotations

from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np
from scipy.integrate import solve_ivp

from ..errors import IntegrationFailure, JetUnavailable
from .curvature import christoffel_from_jet
from .patch import MetricPatch, as_coords


def _cache(patch: MetricPatch, kind: str, vector: Callable, build):
    # the stored reference to ``vector`` keeps its id from being reused
    store = patch.__dict__.setdefault("_lie_cache", {})
    key = (kind, id(vector))
    if key not in store:
        store[key] = (vector, build())
    return store[key][1]


def lie_metric_fn(patch: MetricPatch, vector: Callable) -> Callable:
    """Traceable ``x -> ∇_i V_j + ∇_j V_i``."""
    comps = patch.components
    d1 = jax.jacfwd(comps)
    dv = jax.jacfwd(vector)

    def lie(x):
        g = comps(x)
        gamma, _ = christoffel_from_jet(g, d1(x))
        v = vector(x)
        nab_up = dv(x).T + jnp.einsum("kij,j->ik", gamma, v)  # ∇_i V^k
        nab = nab_up @ g  # ∇_i V_j
        return nab + nab.T

    return lie


def lie_derivative_metric(patch: MetricPatch, vector: Callable, x) -> np.ndarray:
    """``(ℒ_V g)_ij`` at ``x`` by the covariant formula."""
    if not patch.traceable:
        raise JetUnavailable("Lie derivative needs a differentiable metric")
    x = as_coords(x)
    patch.domain.check(x)
    fn = _cache(patch, "lie", vector, lambda: jax.jit(lie_metric_fn(patch, vector)))
    return np.asarray(fn(jnp.asarray(x)))


def _flow_with_jacobian(vector: Callable, x, sigma: float):
    """Integrate ``x' = V(x)`` together with the variational equation ``J' = DV J``."""
    m = x.shape[0]
    vj = jax.jit(vector)
    dvj = jax.jit(jax.jacfwd(vector))

    def rhs(_, y):
        p = y[:m]
        jac = y[m:].reshape(m, m)
        return np.concatenate([np.asarray(vj(p)), (np.asarray(dvj(p)) @ jac).ravel()])

    y0 = np.concatenate([x, np.eye(m).ravel()])
    sol = solve_ivp(rhs, (0.0, sigma), y0, method="DOP853", rtol=1e-13, atol=1e-14)
    if not sol.success:
        raise IntegrationFailure(sol.message)
    y = sol.y[:, -1]
    return y[:m], y[m:].reshape(m, m)


def lie_derivative_metric_flow(patch: MetricPatch, vector: Callable, x, h: float = 1e-3) -> np.ndarray:
    """Central difference in the flow time of ``φ_σ^* g``; error is O(h²)."""
    x = as_coords(x)
    patch.domain.check(x)
    out = []
    for sigma in (h, -h):
        y, jac = _flow_with_jacobian(vector, x, sigma)
        out.append(jac.T @ patch(y) @ jac)
    return (out[0] - out[1]) / (2 * h)


def dual_one_form_fn(patch: MetricPatch, vector: Callable) -> Callable:
    comps = patch.components
    return lambda x: comps(x) @ vector(x)


def dual_form_curl(patch: MetricPatch, vector: Callable, x) -> np.ndarray:
    """``d(g(V,·))`` as an antisymmetric matrix; zero iff V is locally a gradient."""
    x = as_coords(x)
    patch.domain.check(x)

    def build():
        d = jax.jacfwd(dual_one_form_fn(patch, vector))  # d[j, i] = ∂_i ω_j
        return jax.jit(lambda y: d(y).T - d(y))

    fn = _cache(patch, "curl", vector, build)
    return np.asarray(fn(jnp.asarray(x)))
