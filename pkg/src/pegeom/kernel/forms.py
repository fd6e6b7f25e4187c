"""Differential forms as antisymmetric component arrays.

A p-form on an m-dimensional chart is stored as a full ``(m,)*p`` array,
so ``omega[a1, ..., ap] = ω(∂_a1, ..., ∂_ap)``. Exterior derivative and
wedge use the determinant convention
``(dω)_{a0..ap} = Σ_i (-1)^i ∂_{ai} ω_{a0..âi..ap}``.
"""
from __future__ import annotations

import itertools
import math
from functools import cached_property, lru_cache
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from ..errors import DegreeMismatch, OrientationUnset
from .curvature import christoffel_from_jet
from .patch import MetricPatch, as_coords


def _perm_sign(perm) -> int:
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@lru_cache(maxsize=None)
def _perms(k: int):
    return [(p, _perm_sign(p)) for p in itertools.permutations(range(k))]


def antisymmetrize(t):
    """Alt(T) = (1/k!) Σ_σ sign(σ) T∘σ over all axes."""
    k = t.ndim
    if k <= 1:
        return t
    out = sum(s * jnp.transpose(t, p) for p, s in _perms(k))
    return out / math.factorial(k)


@lru_cache(maxsize=None)
def levi_civita(m: int) -> np.ndarray:
    eps = np.zeros((m,) * m)
    for p, s in _perms(m):
        eps[p] = s
    return eps


class FormField:
    """A p-form field given by a traceable component function."""

    def __init__(self, degree: int, dim: int, components: Callable, label: str = ""):
        self.degree = degree
        self.dim = dim
        self.components = components
        self.label = label

    def __repr__(self):
        return f"FormField({self.label!r}, degree={self.degree}, dim={self.dim})"

    @cached_property
    def _jit(self):
        return jax.jit(self.components)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self._jit(jnp.asarray(as_coords(x))))

    def jet(self, x, order: int = 1) -> list[np.ndarray]:
        fns = [self.components]
        for _ in range(order):
            fns.append(jax.jacfwd(fns[-1]))
        xj = jnp.asarray(as_coords(x))
        return [np.asarray(f(xj)) for f in fns]

    def scaled(self, factor: Callable, label: str = "") -> "FormField":
        """Multiply by a scalar function of the point."""
        c = self.components
        return FormField(self.degree, self.dim, lambda x: factor(x) * c(x), label or self.label)

    def __add__(self, other: "FormField") -> "FormField":
        if (self.degree, self.dim) != (other.degree, other.dim):
            raise DegreeMismatch("cannot add forms of different degree or dimension")
        a, b = self.components, other.components
        return FormField(self.degree, self.dim, lambda x: a(x) + b(x))


def constant_form(arr) -> FormField:
    arr = jnp.asarray(arr)
    return FormField(arr.ndim, arr.shape[0] if arr.ndim else 0, lambda x: arr)


def exterior_d(form: FormField) -> FormField:
    p, c = form.degree, form.components
    dc = jax.jacfwd(c)

    def components(x):
        d = dc(x)  # derivative axis last
        d = jnp.moveaxis(d, -1, 0)
        return (p + 1) * antisymmetrize(d)

    return FormField(p + 1, form.dim, components, f"d({form.label})")


def wedge(a: FormField, b: FormField) -> FormField:
    if a.dim != b.dim:
        raise DegreeMismatch("wedge of forms on different charts")
    p, q = a.degree, b.degree
    coef = math.factorial(p + q) / (math.factorial(p) * math.factorial(q))
    ca, cb = a.components, b.components

    def components(x):
        return coef * antisymmetrize(jnp.tensordot(ca(x), cb(x), axes=0))

    return FormField(p + q, a.dim, components, f"{a.label}^{b.label}")


def interior_product(vector: Callable, form: FormField) -> FormField:
    if form.degree == 0:
        raise DegreeMismatch("cannot insert a vector into a 0-form")
    c = form.components
    return FormField(form.degree - 1, form.dim,
                     lambda x: jnp.tensordot(vector(x), c(x), axes=(0, 0)),
                     f"i({form.label})")


def pullback_pad(arr, dim: int, offset: int = 0):
    """Embed the components of a form on a factor chart into a product chart."""
    p = arr.ndim
    out = jnp.zeros((dim,) * p)
    k = arr.shape[0] if p else 0
    idx = tuple(slice(offset, offset + k) for _ in range(p))
    return out.at[idx].set(arr)


def volume_form(patch: MetricPatch, orientation: int | None = 1) -> FormField:
    """``sqrt|det g| dx^1 ∧ ... ∧ dx^m`` times ``orientation``."""
    if orientation not in (1, -1):
        raise OrientationUnset("volume form needs orientation +1 or -1")
    m = patch.dim
    eps = jnp.asarray(levi_civita(m))
    comps = patch.components

    def components(x):
        return orientation * jnp.sqrt(jnp.abs(jnp.linalg.det(comps(x)))) * eps

    return FormField(m, m, components, f"vol({patch.label})")


def _raise_all(ginv, arr):
    for axis in range(arr.ndim):
        arr = jnp.moveaxis(jnp.tensordot(ginv, arr, axes=(1, axis)), 0, axis)
    return arr


def hodge_star(patch: MetricPatch, form: FormField, orientation: int | None = 1) -> FormField:
    """``(⋆ω)_{c..} = (1/p!) ω^{a..} ε_{a.. c..}``."""
    if orientation not in (1, -1):
        raise OrientationUnset("Hodge star needs orientation +1 or -1")
    if form.dim != patch.dim:
        raise DegreeMismatch("form and metric live on different charts")
    m, p = patch.dim, form.degree
    eps = jnp.asarray(levi_civita(m))
    comps, c = patch.components, form.components

    def components(x):
        g = comps(x)
        ginv = jnp.linalg.inv(g)
        vol = orientation * jnp.sqrt(jnp.abs(jnp.linalg.det(g))) * eps
        up = _raise_all(ginv, c(x))
        return jnp.tensordot(up, vol, axes=(list(range(p)), list(range(p)))) / math.factorial(p)

    return FormField(m - p, m, components, f"*({form.label})")


def form_norm_sq(patch: MetricPatch, form: FormField, x) -> float:
    """``|ω|^2 = (1/p!) ω_{a..} ω^{a..}``; orthonormal coframe wedges have norm ±1."""
    g = patch(x)
    w = form(x)
    up = np.asarray(_raise_all(jnp.linalg.inv(g), jnp.asarray(w)))
    return float(np.sum(w * up) / math.factorial(form.degree))


def covariant_derivative_fn(patch: MetricPatch, form: FormField) -> Callable:
    """Traceable ``x -> ∇ω`` with layout ``[a, b1, ..., bp] = ∇_a ω_{b1..bp}``."""
    comps = patch.components
    d1 = jax.jacfwd(comps)
    c = form.components
    dc = jax.jacfwd(c)
    p = form.degree

    def nabla(x):
        gamma, _ = christoffel_from_jet(comps(x), d1(x))
        out = jnp.moveaxis(dc(x), -1, 0)
        w = c(x)
        for k in range(p):
            # - Γ^e_{a b_k} ω_{b1..e..bp}
            term = jnp.tensordot(gamma, w, axes=(0, k))  # [a, b_k, rest with e removed]
            term = jnp.moveaxis(term, 1, k + 1)
            out = out - term
        return out

    return nabla


def covariant_derivative(patch: MetricPatch, form: FormField, x) -> np.ndarray:
    patch.domain.check(as_coords(x))
    return np.asarray(jax.jit(covariant_derivative_fn(patch, form))(jnp.asarray(as_coords(x))))


def form_calculus(patch: MetricPatch, op_kind: str, x, form: FormField | None = None,
                  vector: Callable | None = None, orientation: int | None = 1) -> np.ndarray:
    """Evaluate one form operation at ``x`` (dispatcher over the functions above)."""
    x = as_coords(x)
    patch.domain.check(x)
    if op_kind == "exterior_d":
        return exterior_d(form)(x)
    if op_kind == "covariant_d":
        return covariant_derivative(patch, form, x)
    if op_kind == "hodge_star":
        return hodge_star(patch, form, orientation)(x)
    if op_kind == "interior_product":
        return interior_product(vector, form)(x)
    if op_kind == "volume_form":
        return volume_form(patch, orientation)(x)
    raise ValueError(f"unknown form operation {op_kind!r}")
