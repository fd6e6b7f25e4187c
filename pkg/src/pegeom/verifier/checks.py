"""Pointwise residual checks over seeded samples."""
from __future__ import annotations

import math
from typing import Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np

from ..catalog import EinsteinSpec, product_metric, scale_metric
from ..constructions.ambient import ProductAmbientSpec, RhoFamily, ambient_metric, normal_form_patch, ricci_normal_form
from ..constructions.cones import ConeProductSpec, s_to_trho, trho_to_s
from ..constructions.killing import KillingFormSpec, killing_cone_lift, killing_residual_functions
from ..errors import DimensionUnsupported, LambdaMismatch, OutOfDomain
from ..kernel.curvature import conformal_curvature, curvature, frame_norm, mixed_operator_norm
from ..kernel.forms import FormField, covariant_derivative_fn, form_norm_sq
from ..kernel.lie import dual_form_curl, lie_derivative_metric, lie_derivative_metric_flow
from ..kernel.patch import MetricPatch, pullback_patch
from ..kernel.transport import parallel_transport, segment_path
from .reports import CheckReport
from .sampling import SamplePlan, evaluate


def _tier(patch: MetricPatch, default: str = "analytic") -> str:
    return default if patch.traceable else "fd"


def _lie(patch: MetricPatch, V: Callable, x) -> np.ndarray:
    # finite-difference patches get the flow-based derivative instead of AD
    if patch.traceable:
        return lie_derivative_metric(patch, V, x)
    return lie_derivative_metric_flow(patch, V, x)


def check_einstein(patch: MetricPatch, Lambda, plan: SamplePlan, tol: float, norm: str = "component",
                   name: str = "einstein") -> CheckReport:
    """Residual ``Ric - Λ g``: largest entry, or the (1,1) operator norm with ``norm="operator"``."""
    lam = float(Lambda)

    def residual(x):
        c = curvature(patch, x)
        t = c.ricci - lam * c.metric
        if norm == "operator":
            return mixed_operator_norm(c.inverse, t)
        return float(np.max(np.abs(t))) if t.size else 0.0

    vals = evaluate(residual, plan.points(patch.domain))
    return CheckReport.from_residuals(name, vals, tol, f"Lambda={lam!r} norm={norm}", _tier(patch))


def check_ambient_conditions(amb: ProductAmbientSpec, plan: SamplePlan, tol: float,
                             patch: MetricPatch | None = None, name: str = "ambient") -> CheckReport:
    """Homogeneity ``ℒ_X h = 2h``, the restriction to ``ρ = 0`` and Ricci-flatness."""
    patch = patch or amb.ambient_patch
    n = amb.n
    boundary = product_metric(amb.g1, amb.g2)
    pts = plan.points(patch.domain)

    def homogeneity(y):
        return float(np.max(np.abs(_lie(patch, amb.euler_field, y) - 2 * patch(y))))

    def restriction(y):
        y = y.copy()
        y[n + 1] = 0.0
        t = y[n]
        expected = np.zeros((n + 1, n + 1))
        expected[:n, :n] = t * t * boundary(y[:n])
        return float(np.max(np.abs(patch(y)[: n + 1, : n + 1] - expected)))

    def ricci(y):
        return float(np.max(np.abs(curvature(patch, y).ricci)))

    tier = _tier(patch)
    parts = [CheckReport.from_residuals(f"{name}.homogeneity", evaluate(homogeneity, pts), tol, "L_X h - 2h", tier),
             CheckReport.from_residuals(f"{name}.boundary", evaluate(restriction, pts), tol,
                                        "h restricted to rho=0 vs t^2 (g1+g2)", tier),
             CheckReport.from_residuals(f"{name}.ricci_flat", evaluate(ricci, pts), tol, "max |Ric(h)|", tier)]
    return CheckReport.combine(name, parts, f"mu={amb.mu}")


def normal_form_comparison(family: RhoFamily, patch: MetricPatch, y) -> dict:
    """Kernel ``Ric(h)`` against the normal-form expressions at one ``(x, t, ρ)`` point.

    The ``ρj`` comparison uses half the literal divergence expression.
    """
    n = family.dim
    ric = curvature(patch, y).ricci
    nf = ricci_normal_form(family, y[:n], float(y[n + 1]))
    return {
        "ij": float(np.max(np.abs(ric[:n, :n] - nf.ij))),
        "rho_rho": abs(float(ric[n + 1, n + 1]) - nf.rho_rho),
        "rho_j": float(np.max(np.abs(ric[n + 1, :n] - 0.5 * nf.rho_j))) if n else 0.0,
        "t_row": float(np.max(np.abs(ric[n, :]))),
        "kernel_max": float(np.max(np.abs(ric))),
        "normal_form_max": max(float(np.max(np.abs(nf.ij))), abs(nf.rho_rho),
                               float(np.max(np.abs(nf.rho_j))) if n else 0.0),
    }


def check_normal_form(family: RhoFamily, patch: MetricPatch, plan: SamplePlan, tol: float,
                      name: str = "normal_form") -> CheckReport:
    """Dual-path agreement between the kernel Ricci tensor and the normal-form expressions."""
    rows = evaluate(lambda y: normal_form_comparison(family, patch, y), plan.points(patch.domain))
    vals = [max(r["ij"], r["rho_rho"], r["rho_j"], r["t_row"]) for r in rows]
    kmax = max(r["kernel_max"] for r in rows)
    fmax = max(r["normal_form_max"] for r in rows)
    return CheckReport.from_residuals(name, vals, tol, f"kernel_max={kmax!r} normal_form_max={fmax!r}",
                                      _tier(patch))


def cone_to_ambient_map(cp: ConeProductSpec) -> Callable:
    n = cp.cone1.base.m + cp.cone2.base.m
    lam = float(cp.lam)

    def chart_map(y):
        s1, s2 = trho_to_s(y[n], y[n + 1], lam)
        return jnp.concatenate([y[:n], jnp.stack([s1, s2])])

    return chart_map


def check_coordinate_equivalence(cp: ConeProductSpec, amb: ProductAmbientSpec, plan: SamplePlan,
                                 tol: float, name: str = "equivalence") -> CheckReport:
    """Pull the cone-pair product through ``(t, ρ) -> (s1, s2)`` and compare with ``h``."""
    if cp.lam != 2 * amb.mu:
        raise LambdaMismatch(f"cone pair has λ={cp.lam} but the ambient metric has μ={amb.mu}")
    if cp.lam <= 0:
        raise OutOfDomain("the (t, ρ) coordinates exist only for λ > 0")
    n = amb.n
    mu = float(amb.mu)
    domain = amb.ambient_patch.domain
    pulled = pullback_patch(cp.product_patch, cone_to_ambient_map(cp), domain, "pulled cone product")
    box = domain.sampling_box()
    box[n + 1] = (-0.9 / mu, 0.9 / mu)  # image of the positive quadrant is |μρ| < 1
    pts = plan.with_box(box).points(domain)

    def residual(y):
        return float(np.max(np.abs(pulled(y) - amb.ambient_patch(y))))

    diag = [s_to_trho(s, s, float(cp.lam))[1] for s in (0.5, 1.0, 2.0)]
    note = f"rho on s1=s2: max {max(abs(d) for d in diag)!r}"
    return CheckReport.from_residuals(name, evaluate(residual, pts), tol, note, _tier(amb.ambient_patch))


def check_homothety_gradient(patch: MetricPatch, V: Callable, alpha: float, plan: SamplePlan, tol: float,
                             name: str = "homothety") -> CheckReport:
    """``ℒ_V g - α g`` and ``d(g(V,·))``."""
    pts = plan.points(patch.domain)

    def homothety(x):
        return float(np.max(np.abs(_lie(patch, V, x) - alpha * patch(x))))

    def closed(x):
        return float(np.max(np.abs(dual_form_curl(patch, V, x))))

    tier = _tier(patch)
    parts = [CheckReport.from_residuals(f"{name}.homothety", evaluate(homothety, pts), tol, f"alpha={alpha!r}", tier),
             CheckReport.from_residuals(f"{name}.gradient", evaluate(closed, pts), tol, "d(V_flat)", tier)]
    return CheckReport.combine(name, parts)


def check_dilation(g1: EinsteinSpec, g2: EinsteinSpec, alpha, plan: SamplePlan, tol: float,
                   name: str = "dilation") -> CheckReport:
    """Ambient metrics of ``(g1, g2)`` and ``(αg1, αg2)`` agree under ``(x, t, ρ) -> (x, t/√α, αρ)``."""
    a = ambient_metric(g1, g2)
    b = ambient_metric(scale_metric(g1, alpha), scale_metric(g2, alpha))
    n = a.n
    af = float(alpha)
    if af <= 0:
        raise ValueError("dilation check needs alpha > 0")
    root = math.sqrt(af)

    def chart_map(y):
        return jnp.concatenate([y[:n], jnp.stack([y[n] / root, af * y[n + 1]])])

    pulled = pullback_patch(b.ambient_patch, chart_map, a.ambient_patch.domain, "pulled dilated ambient")
    pts = plan.points(a.ambient_patch.domain)

    def residual(y):
        return float(np.max(np.abs(pulled(y) - a.ambient_patch(y))))

    return CheckReport.from_residuals(name, evaluate(residual, pts), tol, f"alpha={alpha}; mu {a.mu} -> {b.mu}",
                                      _tier(a.ambient_patch))


def _unit_vector(rng: np.random.Generator, g: np.ndarray) -> np.ndarray:
    y = rng.standard_normal(g.shape[0])
    q = abs(float(y @ g @ y))
    return y / math.sqrt(q) if q > 0 else y


def check_special_killing(k: KillingFormSpec, plan: SamplePlan, tol: float, psi: FormField | None = None,
                          name: str = "killing") -> CheckReport:
    """Residuals (a) ``∇ψ - dψ/(m1+1)``, (b) ``∇_Y dψ - (m1+1) g(Y,·)∧ψ``, (c) ``ι_γ♯ ψ``,
    (d) ``max(0, 1 - |γ|²)`` and (e) ``|ψ|² - h1²``; (a)–(c) in the frame norm."""
    patch = k.poincare.interior_patch
    psi = psi or k.psi
    c = float(k.killing_constant)
    first, second = killing_residual_functions(patch, psi, c)
    pts = plan.points(patch.domain)
    rn = k.r_index()

    def residuals(item):
        i, x = item
        g = patch(x)
        ginv = np.linalg.inv(g)
        xj = jnp.asarray(x)
        a = frame_norm(g, np.asarray(first(xj)))
        rng = np.random.default_rng([plan.seed, i, 1])
        b = max(frame_norm(g, np.asarray(second(xj, jnp.asarray(_unit_vector(rng, g))))) for _ in range(2))
        gs = ginv @ k.gamma(x)
        cc = frame_norm(g, np.tensordot(gs, psi(x), axes=(0, 0)))
        gg = float(gs @ g @ gs)
        d = max(0.0, 1.0 - gg)
        e = abs(form_norm_sq(patch, psi, x) - k.h1_of_r(x[rn]) ** 2)
        return a, b, cc, d, e, gg

    rows = evaluate(residuals, list(enumerate(pts)))
    labels = ("first", "second", "insertion", "gamma_margin", "norm")
    notes = ("nabla psi - d psi/(p+1)", "nabla_Y d psi - c g(Y)^psi", "i_gamma psi",
             f"min |gamma|^2 = {min(r[5] for r in rows)!r}", "|psi|^2 - h1^2")
    parts = [CheckReport.from_residuals(f"{name}.{lab}", [r[j] for r in rows], tol, note)
             for j, (lab, note) in enumerate(zip(labels, notes))]
    return CheckReport.combine(name, parts, f"c={k.killing_constant} swapped={k.swapped}")


def check_killing_lift(k: KillingFormSpec, plan: SamplePlan, tol: float, name: str = "killing_lift") -> CheckReport:
    """``∇φ̃ = 0`` on the cone and exact recovery ``ι_X φ̃ |_{u=1} = ψ``."""
    base = k.poincare.interior_patch
    lift = killing_cone_lift(k.psi, base, k.killing_constant)
    nab = jax.jit(covariant_derivative_fn(lift.cone_patch, lift.lifted))
    cone_pts = plan.points(lift.cone_patch.domain)

    def parallel(y):
        return frame_norm(lift.cone_patch(y), np.asarray(nab(jnp.asarray(y))))

    def insertion(y):
        x = y[:-1]
        return float(np.max(np.abs(lift.restrict_insert(x) - k.psi(x))))

    parts = [CheckReport.from_residuals(f"{name}.parallel", evaluate(parallel, cone_pts), tol, "|nabla lift|"),
             CheckReport.from_residuals(f"{name}.insertion", evaluate(insertion, cone_pts), 0.0,
                                        "i_X lift at u=1 minus psi (exact)")]
    return CheckReport.combine(name, parts)


def check_bach_vanishing(boundary: MetricPatch, plan: SamplePlan, tol: float, name: str = "bach") -> CheckReport:
    if boundary.dim != 4:
        raise DimensionUnsupported(f"Bach check needs dimension 4, got {boundary.dim}")

    def residual(x):
        return float(np.max(np.abs(conformal_curvature(boundary, x, with_bach=True).bach)))

    return CheckReport.from_residuals(name, evaluate(residual, plan.points(boundary.domain)), tol,
                                      "max |B_ij|", "order4")


def holonomy_algebra_estimate(patch: MetricPatch, base, plan: SamplePlan, rank_tol: float = 1e-8) -> int:
    """Rank of curvature endomorphisms transported to ``base`` along straight segments.

    A lower bound for the dimension of the holonomy algebra.
    """
    base = np.asarray(base, dtype=float)
    m = patch.dim
    gens = []

    def endomorphisms(x, frame):
        c = curvature(patch, x)
        r_up = np.einsum("ae,ebcd->abcd", c.inverse, c.riemann_lowered)
        finv = np.linalg.inv(frame)
        out = []
        for i in range(m):
            for j in range(i + 1, m):
                e = np.einsum("abcd,c,d->ab", r_up, frame[:, i], frame[:, j])
                out.append((finv @ e @ frame).ravel())
        return out

    gens.extend(endomorphisms(base, np.eye(m)))
    for x in plan.points(patch.domain):
        try:
            frame = parallel_transport(patch, segment_path(base, x), np.eye(m)).frame
        except OutOfDomain:
            continue
        gens.extend(endomorphisms(x, frame))
    if not gens:
        return 0
    sv = np.linalg.svd(np.asarray(gens), compute_uv=False)
    return int(np.sum(sv > rank_tol * max(1.0, float(sv[0]))))


# negative-control helpers ----------------------------------------------------

def perturb_patch(patch: MetricPatch, eps: float, direction: Callable, label: str = "") -> MetricPatch:
    """``g + ε D(x)`` for a symmetric, traceable ``D``."""
    comps = patch.components
    return MetricPatch(patch.dim, patch.signature, lambda x: comps(x) + eps * direction(x), patch.domain,
                       label or f"{patch.label}+{eps!r}D", patch.coord_names, label or f"{patch.label}+{eps!r}D")


def unit_direction(dim: int, i: int, j: int, profile: Callable | None = None) -> Callable:
    """``f(x) (dx^i dx^j)`` symmetrised; ``f = 1`` by default."""
    e = np.zeros((dim, dim))
    e[i, j] = e[j, i] = 1.0
    e = jnp.asarray(e)
    if profile is None:
        return lambda x: e
    return lambda x: profile(x) * e


def linearity_slope(eps_values: Sequence[float], residuals: Sequence[float]) -> float:
    """Least-squares slope of ``log residual`` against ``log ε``."""
    return float(np.polyfit(np.log(np.asarray(eps_values)), np.log(np.asarray(residuals)), 1)[0])


def mismatched_family(spec: EinsteinSpec, mu: float) -> tuple[RhoFamily, MetricPatch]:
    """``(1 + μρ)² g`` with a μ that ignores the scalar-curvature constraint."""
    c = spec.patch.components
    fam = RhoFamily(spec.m, spec.signature, lambda x, rho: (1 + mu * rho) ** 2 * c(x), spec.patch.domain,
                    f"mismatched({spec.label},{mu})")
    reach = 1 / abs(mu)
    return fam, normal_form_patch(fam, -4 * reach, 4 * reach, (-0.5 * reach, 0.5 * reach), (-reach,))
