"""Chart-local metrics, domains and jets."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np

from ..errors import JetUnavailable, OutOfDomain, SingularMetric

DET_FLOOR = 1e-14
EXCLUSION_BAND = 1e-9


@dataclass(frozen=True)
class Surd:
    """The exact value ``coeff * sqrt(radicand)``, evaluated lazily as a float."""

    radicand: Fraction
    coeff: Fraction = Fraction(1)

    @classmethod
    def sqrt(cls, value) -> "Surd":
        value = Fraction(value)
        if value < 0:
            raise ValueError("negative radicand")
        # pull square factors out of numerator and denominator
        num, den = value.numerator * value.denominator, value.denominator
        outer = Fraction(1, den)
        k = 2
        while k * k <= num:
            while num % (k * k) == 0:
                num //= k * k
                outer *= k
            k += 1
        return cls(Fraction(num), outer)

    def __float__(self) -> float:
        return float(self.coeff) * math.sqrt(float(self.radicand))

    def __str__(self) -> str:
        if self.radicand == 1:
            return str(self.coeff)
        c = "" if self.coeff == 1 else f"{self.coeff}*"
        return f"{c}sqrt({self.radicand})"


@dataclass(frozen=True)
class ChartPoint:
    coords: tuple
    chart_id: str = ""

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype or float)


def as_coords(x) -> np.ndarray:
    if isinstance(x, ChartPoint):
        x = x.coords
    return np.asarray(x, dtype=float).reshape(-1)


@dataclass(frozen=True)
class Domain:
    """Open coordinate box minus finitely many excluded coordinate hyperplanes.

    ``excluded`` holds ``(coordinate index, value)`` pairs; values may be
    floats, Fractions or :class:`Surd` and are converted only when tested.
    ``sample_lower``/``sample_upper`` give the default sampling box.
    """

    lower: tuple
    upper: tuple
    excluded: tuple = ()
    sample_lower: tuple | None = None
    sample_upper: tuple | None = None

    @property
    def dim(self) -> int:
        return len(self.lower)

    def sampling_box(self) -> list[tuple[float, float]]:
        lo = self.sample_lower if self.sample_lower is not None else self.lower
        hi = self.sample_upper if self.sample_upper is not None else self.upper
        return [(float(a), float(b)) for a, b in zip(lo, hi)]

    def excluded_values(self) -> list[tuple[int, float]]:
        return [(i, float(v)) for i, v in self.excluded]

    def violation(self, x, band: float = EXCLUSION_BAND) -> str | None:
        x = as_coords(x)
        if x.shape[0] != self.dim:
            return f"expected {self.dim} coordinates, got {x.shape[0]}"
        for i, (xi, lo, hi) in enumerate(zip(x, self.lower, self.upper)):
            if not (lo < xi < hi):
                return f"coordinate {i}={xi} outside ({lo}, {hi})"
        for i, v in self.excluded_values():
            if abs(x[i] - v) <= band:
                return f"coordinate {i}={x[i]} on excluded locus {v}"
        return None

    def contains(self, x, band: float = EXCLUSION_BAND) -> bool:
        return self.violation(x, band) is None

    def check(self, x) -> None:
        msg = self.violation(x)
        if msg is not None:
            raise OutOfDomain(msg)

    def product(self, other: "Domain") -> "Domain":
        n = self.dim
        return Domain(
            self.lower + other.lower,
            self.upper + other.upper,
            self.excluded + tuple((i + n, v) for i, v in other.excluded),
            tuple(b[0] for b in self.sampling_box() + other.sampling_box()),
            tuple(b[1] for b in self.sampling_box() + other.sampling_box()),
        )

    def extend(self, lower, upper, sample=None, excluded=()) -> "Domain":
        """Append one coordinate; ``excluded`` lists values of the new coordinate."""
        n = self.dim
        box = self.sampling_box()
        slo, shi = sample if sample is not None else (lower, upper)
        return Domain(
            self.lower + (lower,),
            self.upper + (upper,),
            self.excluded + tuple((n, v) for v in excluded),
            tuple(b[0] for b in box) + (slo,),
            tuple(b[1] for b in box) + (shi,),
        )

    def with_sampling(self, box: Sequence[tuple[float, float]]) -> "Domain":
        return Domain(self.lower, self.upper, self.excluded,
                      tuple(b[0] for b in box), tuple(b[1] for b in box))


def box_domain(lower, upper, sample=None) -> Domain:
    lower, upper = tuple(lower), tuple(upper)
    if sample is None:
        return Domain(lower, upper)
    return Domain(lower, upper, (), tuple(s[0] for s in sample), tuple(s[1] for s in sample))


def _fd_jet(fn, x, order, h):
    """Central differences of ``fn`` at ``x``; derivative axes are appended last."""
    m = x.shape[0]
    g0 = np.asarray(fn(x))
    out = [g0]
    if order >= 1:
        d1 = np.empty(g0.shape + (m,))
        for i in range(m):
            e = np.zeros(m)
            e[i] = h
            d1[..., i] = (np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2 * h)
        out.append(d1)
    if order >= 2:
        d2 = np.empty(g0.shape + (m, m))
        for i in range(m):
            ei = np.zeros(m)
            ei[i] = h
            d2[..., i, i] = (np.asarray(fn(x + ei)) - 2 * g0 + np.asarray(fn(x - ei))) / h**2
            for j in range(i + 1, m):
                ej = np.zeros(m)
                ej[j] = h
                v = (np.asarray(fn(x + ei + ej)) - np.asarray(fn(x + ei - ej))
                     - np.asarray(fn(x - ei + ej)) + np.asarray(fn(x - ei - ej))) / (4 * h * h)
                d2[..., i, j] = v
                d2[..., j, i] = v
        out.append(d2)
    return out


class MetricPatch:
    """A pseudo-Riemannian metric on a coordinate chart.

    ``components`` maps a coordinate vector to the symmetric ``dim x dim``
    component matrix and must be written with ``jax.numpy`` so that jets can
    be produced by automatic differentiation. ``jet_mode="fd"`` switches the
    jet provider to central finite differences (orders <= 2 only).

    Jets follow the convention ``jet[k][i, j, a1, ..., ak] = d^k g_ij / dx^a1 ... dx^ak``.
    """

    MAX_AD_ORDER = 4

    def __init__(self, dim: int, signature: tuple[int, int], components: Callable,
                 domain: Domain, chart_id: str = "", coord_names: Sequence[str] | None = None,
                 label: str = "", jet_mode: str = "ad", fd_step: float = 1e-4):
        if signature[0] + signature[1] != dim:
            raise ValueError(f"signature {signature} does not sum to dim {dim}")
        if domain.dim != dim:
            raise ValueError("domain dimension does not match metric dimension")
        self.dim = dim
        self.signature = tuple(signature)
        self.components = components
        self.domain = domain
        self.chart_id = chart_id or label
        self.coord_names = tuple(coord_names) if coord_names else tuple(f"x{i}" for i in range(dim))
        self.label = label
        self.jet_mode = jet_mode
        self.fd_step = fd_step

    def __repr__(self):
        return f"MetricPatch({self.label or self.chart_id!r}, dim={self.dim}, sig={self.signature})"

    @property
    def traceable(self) -> bool:
        return self.jet_mode == "ad"

    def with_fd_jets(self, h: float = 1e-4) -> "MetricPatch":
        return MetricPatch(self.dim, self.signature, self.components, self.domain,
                           self.chart_id, self.coord_names, self.label, "fd", h)

    def with_domain(self, domain: Domain) -> "MetricPatch":
        return MetricPatch(self.dim, self.signature, self.components, domain,
                           self.chart_id, self.coord_names, self.label, self.jet_mode, self.fd_step)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self._g(jnp.asarray(as_coords(x))))

    @cached_property
    def _g(self):
        return jax.jit(self.components)

    @cached_property
    def _ad_jets(self):
        fns = [self.components]
        for _ in range(self.MAX_AD_ORDER):
            fns.append(jax.jacfwd(fns[-1]))
        return [jax.jit(f) for f in fns]

    def jet(self, x, order: int = 2, check_domain: bool = True) -> list[np.ndarray]:
        x = as_coords(x)
        if check_domain:
            self.domain.check(x)
        if self.dim == 0:
            return [np.zeros((0,) * (2 + k)) for k in range(order + 1)]
        if self.jet_mode == "fd":
            if order > 2:
                raise JetUnavailable(f"finite-difference jets stop at order 2 (asked {order})")
            return _fd_jet(lambda y: self.components(jnp.asarray(y)), x, order, self.fd_step)
        if order > self.MAX_AD_ORDER:
            raise JetUnavailable(f"jets above order {self.MAX_AD_ORDER} are not provided")
        xj = jnp.asarray(x)
        return [np.asarray(self._ad_jets[k](xj)) for k in range(order + 1)]


def metric_eval(patch: MetricPatch, x) -> tuple[np.ndarray, np.ndarray]:
    """Components ``g_ij`` and inverse ``g^ij`` at ``x``."""
    x = as_coords(x)
    patch.domain.check(x)
    g = patch(x)
    if patch.dim == 0:
        return g, g
    det = np.linalg.det(g)
    if not np.isfinite(det) or abs(det) < DET_FLOOR:
        raise SingularMetric(f"|det g| = {abs(det):.3e} at {x}")
    ginv = np.linalg.inv(g)
    # one Newton refinement keeps g @ ginv within roundoff of the identity
    ginv = ginv + ginv @ (np.eye(patch.dim) - g @ ginv)
    return g, ginv


def signature_of(g: np.ndarray) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(0.5 * (g + g.T))
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))


def block_diag(a, b):
    """Block-diagonal assembly that stays traceable by jax."""
    n, m = a.shape[0], b.shape[0]
    top = jnp.concatenate([a, jnp.zeros((n, m))], axis=1)
    bottom = jnp.concatenate([jnp.zeros((m, n)), b], axis=1)
    return jnp.concatenate([top, bottom], axis=0)


def product_patch(p1: MetricPatch, p2: MetricPatch, label: str = "") -> MetricPatch:
    """Block-diagonal metric on the concatenated chart."""
    n = p1.dim
    c1, c2 = p1.components, p2.components

    def components(x):
        return block_diag(c1(x[:n]), c2(x[n:]))

    if p2.dim == 0:
        return p1 if not label else MetricPatch(p1.dim, p1.signature, p1.components, p1.domain,
                                                label, p1.coord_names, label)
    if p1.dim == 0:
        return p2
    sig = (p1.signature[0] + p2.signature[0], p1.signature[1] + p2.signature[1])
    return MetricPatch(p1.dim + p2.dim, sig, components, p1.domain.product(p2.domain),
                       label or f"{p1.label}x{p2.label}", p1.coord_names + p2.coord_names,
                       label or f"{p1.label} x {p2.label}")



def pullback_patch(patch: MetricPatch, chart_map: Callable, domain: Domain, label: str = "",
                   coord_names: Sequence[str] | None = None) -> MetricPatch:
    """``Φ^* g`` on a new chart; ``chart_map`` must be traceable.

    The Jacobian comes from AD, so jets of the pulled-back metric are again
    exact up to rounding.
    """
    comps = patch.components
    jac = jax.jacfwd(chart_map)

    def components(y):
        j = jac(y)
        return j.T @ comps(chart_map(y)) @ j

    return MetricPatch(domain.dim, patch.signature, components, domain, label or f"pullback({patch.label})",
                       coord_names, label or f"pullback({patch.label})")
