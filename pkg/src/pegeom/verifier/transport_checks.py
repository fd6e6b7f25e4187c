"""Parallel transport along homothetic flows: the drag relation and transverse holonomy."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np

from ..errors import ProjectionUndefined
from ..kernel.patch import MetricPatch
from ..kernel.transport import PathSpec, parallel_transport
from .reports import CheckReport
from .sampling import SamplePlan, evaluate

TRANSPORT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransportProbe:
    """A homothetic gradient field with its flow and a transverse hypersurface.

    ``flow(x, s)``, ``level(x)`` (zero exactly on E) and ``time_to_E(x)``
    (the flow time taking x into E) must all be traceable by jax.
    """

    v: Callable
    c: float
    flow: Callable
    level: Callable
    time_to_E: Callable
    label: str = ""

    def project(self, x):
        return self.flow(x, self.time_to_E(x))


def euler_probe(dim: int, index: int, E_value: float = 1.0, c: float = 2.0, label: str = "") -> TransportProbe:
    """``v = y_k ∂_k`` with flow ``y_k -> y_k e^s`` and ``E = {y_k = E_value}``."""
    e = jnp.zeros(dim).at[index].set(1.0)

    def flow(x, s):
        return x + (jnp.exp(s) - 1.0) * x[index] * e

    return TransportProbe(lambda x: x[index] * e, c, flow, lambda x: x[index] - E_value,
                          lambda x: jnp.log(E_value / x[index]), label or f"euler[{index}]")


def _level_along(probe: TransportProbe):
    cache = probe.__dict__.setdefault("_compiled", {})
    if "level" not in cache:
        def along(y, s):
            return probe.level(probe.flow(y, s))
        cache["level"] = (jax.jit(jax.vmap(along, in_axes=(None, 0))), jax.jit(along), jax.jit(probe.time_to_E))
    return cache["level"]


def check_probe_crossing(probe: TransportProbe, x, span: float = 6.0, steps: int = 121) -> float:
    """Verify the flow line through ``x`` meets E exactly once; returns ``s_E(x)``."""
    on_grid, at, time_to_E = _level_along(probe)
    xs = jnp.asarray(x)
    vals = np.asarray(on_grid(xs, jnp.linspace(-span, span, steps)))
    side = vals >= 0
    crossings = int(np.sum(side[1:] != side[:-1]))
    if crossings != 1:
        raise ProjectionUndefined(f"flow line through {np.asarray(x)} meets E {crossings} times in |s| <= {span}")
    s_e = float(time_to_E(xs))
    if not math.isfinite(s_e) or abs(float(at(xs, s_e))) > 1e-9:
        raise ProjectionUndefined(f"time to E is not defined at {np.asarray(x)}")
    return s_e


def _flow_evaluators(probe: TransportProbe):
    cache = probe.__dict__.setdefault("_compiled", {})
    if "flow_line" not in cache:
        def line(tau, y, s):
            return probe.flow(y, tau * s)
        cache["flow_line"] = (jax.jit(line), jax.jit(jax.jacfwd(line)))
    return cache["flow_line"]


def _flow_path(probe: TransportProbe, y, s) -> PathSpec:
    """The flow line ``tau -> φ_(tau s)(y)``, sharing one compiled evaluator per probe."""
    y, s = jnp.asarray(y), jnp.float64(s)
    pos, vel = _flow_evaluators(probe)
    return PathSpec(lambda tau: probe.flow(y, tau * s), label="flow line",
                    evaluators=((0.0, 1.0, lambda tau: pos(tau, y, s), lambda tau: vel(tau, y, s)),))


def drag_residuals(patch: MetricPatch, probe: TransportProbe, loop: PathSpec, frame, t_values, s_values,
                   atol: float = TRANSPORT_TOL):
    """Per grid point: (residual against ``e^(-cs/2) φ_s* F``, residual against ``(1 - cs/2) φ_s* F``)."""
    along = parallel_transport(patch, loop, frame, atol=atol, rtol=atol, t_eval=t_values)
    jac = jax.jit(jax.jacfwd(probe.flow, 0))
    items = [(i, s) for i in range(len(t_values)) for s in s_values]

    def one(item):
        i, s = item
        f_t = along.samples[i]
        y = loop.point(t_values[i])
        if s == 0.0:
            f_ts = f_t
        else:
            f_ts = parallel_transport(patch, _flow_path(probe, y, s), f_t, atol=atol, rtol=atol).frame
        pushed = np.asarray(jac(jnp.asarray(y), jnp.float64(s))) @ f_t
        exact = float(np.max(np.abs(f_ts - math.exp(-probe.c * s / 2) * pushed)))
        literal = float(np.max(np.abs(f_ts - (1 - probe.c * s / 2) * pushed)))
        return exact, literal

    return evaluate(one, items)


def check_drag_lemma(patch: MetricPatch, probe: TransportProbe, loop: PathSpec, plan: SamplePlan, tol: float,
                     t_count: int = 10, s_values: Sequence[float] | None = None,
                     name: str = "drag_lemma") -> CheckReport:
    """Transport along flow lines against Lie dragging on a ``(t, s)`` grid.

    Compares with the factor ``e^(-cs/2)``; the deviation of the
    first-order factor ``1 - cs/2`` is recorded in the notes.
    """
    m = patch.dim
    frame = plan.rng(0).standard_normal((m, m)) + 2 * np.eye(m)
    t_values = list(np.linspace(0.0, 1.0, t_count))
    s_values = list(s_values) if s_values is not None else list(np.linspace(0.0, 0.9, 10))
    rows = drag_residuals(patch, probe, loop, frame, t_values, s_values)
    lit = max(r[1] for r in rows)
    return CheckReport.from_residuals(name, [r[0] for r in rows], tol,
                                      f"grid {len(t_values)}x{len(s_values)}; first-order factor deviates by {lit!r}")


def projected_loop(probe: TransportProbe, loop: PathSpec) -> PathSpec:
    pieces = tuple((a, b, (lambda f: lambda t: probe.project(f(t)))(fn)) for a, b, fn in loop.smooth_pieces())
    c = loop.curve
    return PathSpec(lambda t: probe.project(c(t)), loop.closed, label=f"E-projection({loop.label})", pieces=pieces)


def transverse_holonomy_residual(patch: MetricPatch, probe: TransportProbe, loop: PathSpec, frame,
                                 atol: float = TRANSPORT_TOL, checkpoints: int = 21) -> tuple[float, float]:
    """(|F(1) - F^E(1)|, |F(1) - F(0)|) for the loop and its projection into E."""
    q = loop.point(0.0)
    if abs(float(probe.level(jnp.asarray(q)))) > 1e-12:
        raise ProjectionUndefined(f"loop base point {q} is not on E")
    for t in np.linspace(0.0, 1.0, checkpoints):
        check_probe_crossing(probe, loop.point(t))
    proj = projected_loop(probe, loop)
    f1 = parallel_transport(patch, loop, frame, atol=atol, rtol=atol).frame
    fe = parallel_transport(patch, proj, frame, atol=atol, rtol=atol).frame
    return float(np.max(np.abs(f1 - fe))), float(np.max(np.abs(f1 - frame)))


def check_transverse_holonomy(patch: MetricPatch, probe: TransportProbe, loops: Sequence[PathSpec],
                              plan: SamplePlan, tol: float, name: str = "transverse_holonomy") -> CheckReport:
    m = patch.dim
    frame = plan.rng(0).standard_normal((m, m)) + 2 * np.eye(m)
    rows = evaluate(lambda lp: transverse_holonomy_residual(patch, probe, lp, frame), list(loops))
    hol = max(r[1] for r in rows)
    return CheckReport.from_residuals(name, [r[0] for r in rows], tol,
                                      f"{len(rows)} loops; max holonomy displacement {hol!r}")


def check_loop_identity(patch: MetricPatch, loops: Sequence[PathSpec], plan: SamplePlan, tol: float,
                        name: str = "loop_identity") -> CheckReport:
    """Transport around closed loops returns the initial frame (flat metrics)."""
    m = patch.dim
    frame = plan.rng(0).standard_normal((m, m)) + 2 * np.eye(m)

    def one(lp):
        return float(np.max(np.abs(parallel_transport(patch, lp, frame, atol=TRANSPORT_TOL,
                                                      rtol=TRANSPORT_TOL).frame - frame)))

    return CheckReport.from_residuals(name, evaluate(one, list(loops)), tol)


def excursion_loops(patch: MetricPatch, radial_index: int, plan: SamplePlan, E_value: float = 1.0,
                    radius: float = 0.15, amplitude: float = 0.3) -> list[PathSpec]:
    """Closed loops based on ``{y_k = E_value}``: a small circle in two chart
    directions while ``y_k`` makes an excursion ``E_value·exp(A sin 2πt)``."""
    box = patch.domain.sampling_box()
    others = [i for i in range(patch.dim) if i != radial_index]
    loops = []
    for i in range(plan.count):
        rng = plan.rng(i)
        centre = np.array([a + (0.25 + 0.5 * rng.random()) * (b - a) for a, b in box])
        centre[radial_index] = E_value
        a_idx, b_idx = (int(k) for k in rng.choice(others, size=2, replace=False)) if len(others) > 1 else (others[0],) * 2
        amp = amplitude * (0.5 + rng.random())
        phase = float(rng.random())
        ctr = jnp.asarray(centre)
        ea = jnp.zeros(patch.dim).at[a_idx].set(1.0)
        eb = jnp.zeros(patch.dim).at[b_idx].set(1.0) if b_idx != a_idx else jnp.zeros(patch.dim)
        er = jnp.zeros(patch.dim).at[radial_index].set(1.0)

        def curve(t, ctr=ctr, ea=ea, eb=eb, er=er, amp=amp, phase=phase):
            w = 2 * jnp.pi * t
            k = E_value * jnp.exp(amp * jnp.sin(w) * jnp.sin(jnp.pi * t + phase) ** 2)
            return (ctr + radius * ((jnp.cos(w) - 1) * ea + jnp.sin(w) * eb)
                    + (k - E_value) * er)

        loops.append(PathSpec(curve, closed=True, label=f"loop{i}"))
    return loops
