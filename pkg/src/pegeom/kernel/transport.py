"""Parallel transport of frames along chart paths."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np
from scipy.integrate import solve_ivp

from ..errors import IntegrationFailure, OutOfDomain
from .curvature import christoffel_from_jet
from .patch import MetricPatch, as_coords


@dataclass(frozen=True, eq=False)
class PathSpec:
    """A piecewise smooth curve ``t in [0, 1] -> coords``.

    ``curve`` must be traceable by jax; velocities come from AD. The curve
    is smooth between consecutive ``breaks``; each such interval is
    integrated separately so corners are never stepped across. Paths built
    by :meth:`then` carry their smooth pieces explicitly so velocities at
    a corner are taken one-sidedly.
    """

    curve: Callable
    closed: bool = False
    breaks: tuple = ()
    label: str = ""
    pieces: tuple = ()  # ((a, b, smooth_curve), ...) overriding curve/breaks
    evaluators: tuple = ()  # ((a, b, position, velocity), ...) already compiled

    def __post_init__(self):
        if self.closed:
            a, b = self.point(0.0), self.point(1.0)
            if not np.allclose(a, b, atol=1e-12, rtol=0):
                raise ValueError(f"closed path does not return to its start: {a} vs {b}")

    @cached_property
    def _pieces(self):
        if self.evaluators:
            return tuple((float(a), float(b), pos, vel) for a, b, pos, vel in self.evaluators)
        if self.pieces:
            raw = self.pieces
        else:
            knots = [0.0] + sorted(float(b) for b in self.breaks if 0.0 < b < 1.0) + [1.0]
            raw = tuple((a, b, self.curve) for a, b in zip(knots[:-1], knots[1:]))
        return tuple((float(a), float(b), jax.jit(fn), jax.jit(jax.jacfwd(fn))) for a, b, fn in raw)

    def _piece(self, t: float):
        for piece in self._pieces:
            if t <= piece[1]:
                return piece
        return self._pieces[-1]

    def point(self, t: float) -> np.ndarray:
        return np.asarray(self._piece(t)[2](jnp.float64(t)))

    def velocity(self, t: float) -> np.ndarray:
        return np.asarray(self._piece(t)[3](jnp.float64(t)))

    def segments(self) -> list[tuple[float, float]]:
        return [(a, b) for a, b, _, _ in self._pieces]

    def smooth_pieces(self) -> tuple:
        if self.pieces:
            return self.pieces
        return tuple((a, b, self.curve) for a, b, _, _ in self._pieces)

    def reversed(self) -> "PathSpec":
        flipped = tuple((1.0 - b, 1.0 - a, (lambda f: lambda t: f(1.0 - t))(fn))
                        for a, b, fn in reversed(self.smooth_pieces()))
        c = self.curve
        return PathSpec(lambda t: c(1.0 - t), self.closed, label=f"reverse({self.label})",
                        pieces=flipped)

    def then(self, other: "PathSpec") -> "PathSpec":
        """Concatenation, each half traversed at double speed."""
        first = tuple((0.5 * a, 0.5 * b, (lambda f: lambda t: f(2 * t))(fn))
                      for a, b, fn in self.smooth_pieces())
        second = tuple((0.5 + 0.5 * a, 0.5 + 0.5 * b, (lambda f: lambda t: f(2 * t - 1))(fn))
                       for a, b, fn in other.smooth_pieces())
        ca, cb = self.curve, other.curve

        def curve(t):
            return jnp.where(t < 0.5, ca(jnp.minimum(2 * t, 1.0)), cb(jnp.maximum(2 * t - 1, 0.0)))

        return PathSpec(curve, self.closed and other.closed, label=f"{self.label}+{other.label}",
                        pieces=first + second)


def segment_path(start, end) -> PathSpec:
    a, b = jnp.asarray(as_coords(start)), jnp.asarray(as_coords(end))
    return PathSpec(lambda t: a + t * (b - a), label="segment")


@dataclass(frozen=True)
class TransportResult:
    frame: np.ndarray  # columns are the transported vectors
    gram_drift: float
    nfev: int
    atol: float
    rtol: float
    samples: np.ndarray | None = field(default=None, repr=False)  # frames at t_eval, shape (len, m, k)


def christoffel_fn(patch: MetricPatch) -> Callable:
    cache = patch.__dict__.setdefault("_transport_cache", {})
    if "gamma" not in cache:
        comps = patch.components
        if patch.traceable:
            d1 = jax.jacfwd(comps)
            cache["gamma"] = jax.jit(lambda x: christoffel_from_jet(comps(x), d1(x))[0])
        else:
            def gamma(x):
                g, dg = patch.jet(x, 1, check_domain=False)
                return christoffel_from_jet(jnp.asarray(g), jnp.asarray(dg))[0]
            cache["gamma"] = gamma
    return cache["gamma"]


def parallel_transport(patch: MetricPatch, path: PathSpec, frame, atol: float = 1e-9,
                       rtol: float = 1e-9, t_eval: Sequence[float] | None = None) -> TransportResult:
    """Solve ``dF/dt = -Γ(ẋ, F)`` with adaptive RK45 and report the Gram drift.

    ``frame`` is an ``(m, k)`` array whose columns are tangent vectors at
    ``path.point(0)``. ``t_eval`` optionally records the frame at the
    given parameters (sorted, inside [0, 1]).
    """
    frame = np.asarray(frame, dtype=float)
    if frame.ndim == 1:
        frame = frame[:, None]
    m, k = frame.shape
    if m != patch.dim:
        raise ValueError("frame vectors must have one component per chart coordinate")
    gamma = christoffel_fn(patch)

    def rhs(t, y, pos, vel):
        x = np.asarray(pos(jnp.float64(t)))
        msg = patch.domain.violation(x)
        if msg is not None:
            raise OutOfDomain(f"path left the chart at t={t:.6g}: {msg}")
        xd = np.asarray(vel(jnp.float64(t)))
        f = y.reshape(m, k)
        return -np.einsum("kij,i,jb->kb", np.asarray(gamma(jnp.asarray(x))), xd, f).ravel()

    x0 = path.point(0.0)
    patch.domain.check(x0)
    g0 = patch(x0)
    gram0 = frame.T @ g0 @ frame
    y = frame.ravel().copy()
    nfev = 0
    # requested sample parameters become extra knots so no interpolation is involved
    wanted = sorted({float(t) for t in t_eval}) if t_eval is not None else []
    knots = sorted({0.0, 1.0, *(b for seg in path.segments() for b in seg), *wanted})
    recorded = {0.0: y.copy()}
    for a, b in zip(knots[:-1], knots[1:]):
        if b - a < 1e-15:
            recorded[b] = y.copy()
            continue
        _, _, pos, vel = path._piece(0.5 * (a + b))
        sol = solve_ivp(rhs, (a, b), y, method="RK45", atol=atol, rtol=rtol, args=(pos, vel))
        if not sol.success:
            raise IntegrationFailure(f"transport failed on [{a}, {b}]: {sol.message}")
        nfev += sol.nfev
        y = sol.y[:, -1]
        recorded[b] = y.copy()
    out = y.reshape(m, k)
    x1 = path.point(1.0)
    g1 = patch(x1)
    drift = float(np.max(np.abs(out.T @ g1 @ out - gram0))) if k else 0.0
    samples = np.asarray([recorded[t].reshape(m, k) for t in wanted]) if t_eval is not None else None
    return TransportResult(out, drift, nfev, atol, rtol, samples)
