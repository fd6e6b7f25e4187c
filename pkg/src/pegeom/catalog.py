"""Einstein seed metrics and the scalar-curvature arithmetic built on them.

Scalar curvatures are kept as :class:`fractions.Fraction` whenever the
inputs are rational, so the constraint solving in :func:`solve_mu` is
exact. Floats are admitted and converted through their ``repr``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Rational

import jax.numpy as jnp

from .errors import BadDimension, CatalogNameError, IncompatibleScalars, SignMismatch, ZeroScale
from .kernel.patch import Domain, MetricPatch, box_domain, product_patch

MU_REL_TOL = 1e-12


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(repr(float(value)))


def _is_exact(value) -> bool:
    return isinstance(value, (Rational, str))


@dataclass(frozen=True, eq=False)
class EinsteinSpec:
    """An Einstein metric with ``Ric = (Sc/m) g``.

    ``lam`` is the cone constant ``Sc / (m(m-1))`` and is ``None`` when
    ``m < 2``.
    """

    patch: MetricPatch
    m: int
    Sc: Fraction
    lam: Fraction | None
    label: str

    @property
    def einstein_constant(self) -> Fraction:
        return self.Sc / self.m if self.m else Fraction(0)

    @property
    def signature(self):
        return self.patch.signature


def _lambda(m: int, sc: Fraction) -> Fraction | None:
    return sc / (m * (m - 1)) if m >= 2 else None


def point() -> EinsteinSpec:
    """The zero-dimensional factor."""
    patch = MetricPatch(0, (0, 0), lambda x: jnp.zeros((0, 0)), Domain((), ()), "point", (), "point")
    return EinsteinSpec(patch, 0, Fraction(0), None, "point")


def constant_curvature_metric(m: int, K, definiteness: str = "positive", label: str = "") -> EinsteinSpec:
    """``σ (1 + K|x|²/4)^-2 δ`` with ``σ = ±1``; sectional curvature ``K/σ``.

    The chart box keeps ``K|x|²/4`` well away from the pole locus ``-1``
    and from the antipode for ``K > 0``.
    """
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise BadDimension(f"dimension must be a positive integer, got {m!r}")
    if definiteness not in ("positive", "negative"):
        raise ValueError("definiteness must be 'positive' or 'negative'")
    kq = as_fraction(K)
    kf = float(kq)
    sigma = 1.0 if definiteness == "positive" else -1.0
    if kq == 0:
        domain = box_domain((-2.0,) * m, (2.0,) * m, [(-1.0, 1.0)] * m)
    else:
        half = 0.9 * 2.0 / math.sqrt(m * abs(kf))
        s = 0.5 * half
        domain = box_domain((-half,) * m, (half,) * m, [(-s, s)] * m)

    def components(x):
        f = 1.0 + kf * jnp.dot(x, x) / 4.0
        return (sigma / f**2) * jnp.eye(m)

    sc = int(sigma) * m * (m - 1) * kq
    if not label:
        label = f"{'sphere' if kq >= 0 else 'hyperbolic'}({m},{abs(kq)})" if kq != 0 else f"flat({m})"
        if sigma < 0:
            label = f"neg({label})"
    sig = (m, 0) if sigma > 0 else (0, m)
    patch = MetricPatch(m, sig, components, domain, label, tuple(f"x{i + 1}" for i in range(m)), label)
    return EinsteinSpec(patch, m, sc, _lambda(m, sc), label)


def scale_metric(spec: EinsteinSpec, alpha, label: str = "") -> EinsteinSpec:
    """``α g``: scalar curvature and cone constant divide by ``α``, Ricci is unchanged."""
    aq = as_fraction(alpha)
    if aq == 0:
        raise ZeroScale("cannot scale a metric by zero")
    if aq == 1 and not label:
        return spec
    af = float(aq)
    c = spec.patch.components
    p, q = spec.patch.signature
    sig = (p, q) if af > 0 else (q, p)
    label = label or f"scaled({spec.label},{aq})"
    patch = MetricPatch(spec.m, sig, lambda x: af * c(x), spec.patch.domain, label,
                        spec.patch.coord_names, label)
    sc = spec.Sc / aq
    return EinsteinSpec(patch, spec.m, sc, _lambda(spec.m, sc), label)


def negate(spec: EinsteinSpec) -> EinsteinSpec:
    return scale_metric(spec, -1, label=f"neg({spec.label})")


def product_metric(g1: EinsteinSpec, g2: EinsteinSpec, label: str = "") -> MetricPatch:
    """Block-diagonal ``g1 ⊕ g2`` on the concatenated chart."""
    return product_patch(g1.patch, g2.patch, label)


def einstein_product(g3: EinsteinSpec, g4: EinsteinSpec, epsilon: int) -> EinsteinSpec:
    """``ε(m4 Sc3 g3 + m3 Sc4 g4)``, Einstein with ``Sc = ε(m3+m4)/(m3 m4)``."""
    if epsilon not in (1, -1):
        raise ValueError("epsilon must be +1 or -1")
    for g in (g3, g4):
        if g.Sc == 0 or (g.Sc > 0) != (epsilon > 0):
            raise SignMismatch(f"{g.label} has Sc={g.Sc}; need nonzero Sc of sign {epsilon:+d}")
    m3, m4 = g3.m, g4.m
    a3 = scale_metric(g3, epsilon * m4 * g3.Sc)
    a4 = scale_metric(g4, epsilon * m3 * g4.Sc)
    label = f"einstein_product({g3.label},{g4.label},{epsilon})"
    patch = product_patch(a3.patch, a4.patch, label)
    sc = a3.Sc + a4.Sc
    assert sc == Fraction(epsilon * (m3 + m4), m3 * m4)
    return EinsteinSpec(patch, m3 + m4, sc, _lambda(m3 + m4, sc), label)


@dataclass(frozen=True)
class MuSolution:
    """Solution of the pair of linear constraints on μ.

    ``free`` is set when neither dimension reaches 2, in which case any
    real μ is admissible and ``mu`` is ``None``.
    """

    mu: Fraction | None
    free: bool = False
    constraints_satisfied: bool = True

    def value(self, default=None) -> float:
        if self.free:
            if default is None:
                raise IncompatibleScalars("μ is a free parameter here; supply a value")
            return float(default)
        return float(self.mu)

    def fixed(self, mu) -> "MuSolution":
        """Pin a free parameter to a concrete value."""
        if not self.free:
            if as_fraction(mu) != self.mu:
                raise IncompatibleScalars(f"μ is determined as {self.mu}, not {mu}")
            return self
        return MuSolution(as_fraction(mu), False, True)


def _close(a: Fraction, b: Fraction, exact: bool) -> bool:
    if exact:
        return a == b
    return abs(a - b) <= MU_REL_TOL * max(1, abs(a), abs(b))


def solve_mu(m1: int, Sc1, m2: int, Sc2) -> MuSolution:
    """μ with ``2 m1(m1-1) μ = Sc1`` and ``2 m2(m2-1) μ = -Sc2``.

    Constraints from factors of dimension below 2 are vacuous, but such
    factors must then have zero scalar curvature.
    """
    if m1 < 1 or m2 < 0:
        raise BadDimension(f"need m1 >= 1 and m2 >= 0, got ({m1}, {m2})")
    exact = _is_exact(Sc1) and _is_exact(Sc2)
    s1, s2 = as_fraction(Sc1), as_fraction(Sc2)
    candidates = []
    for m, s, sign in ((m1, s1, 1), (m2, s2, -1)):
        if m >= 2:
            candidates.append(sign * s / (2 * m * (m - 1)))
        elif s != 0:
            raise IncompatibleScalars(f"a factor of dimension {m} must have Sc = 0, got {s}")
    if not candidates:
        return MuSolution(None, free=True)
    if len(candidates) == 2 and not _close(candidates[0], candidates[1], exact):
        raise IncompatibleScalars(
            f"m2(m2-1)Sc1 = {m2 * (m2 - 1) * s1} but -m1(m1-1)Sc2 = {-m1 * (m1 - 1) * s2}")
    return MuSolution(candidates[0])


def mu_for(g1: EinsteinSpec, g2: EinsteinSpec, mu=None) -> MuSolution:
    sol = solve_mu(g1.m, g1.Sc, g2.m, g2.Sc)
    if mu is None:
        return sol
    if isinstance(mu, MuSolution):
        mu = mu.mu if not mu.free else None
        if mu is None:
            return sol
    return sol.fixed(mu)


# name strings -----------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>[+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?(?:/\d+)?)|(?P<id>[A-Za-z_]\w*)|(?P<sym>[(),]))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise CatalogNameError(f"unexpected character {text[pos]!r} at column {pos + 1} in {text!r}")
        kind = mt.lastgroup
        out.append((kind, mt.group(kind), mt.start(kind)))
        pos = mt.end()
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind or "token"
            raise CatalogNameError(f"expected {want} at column {tok[2] + 1} in {self.text!r}")
        self.i += 1
        return tok

    def term(self):
        kind, val, _ = self.peek()
        if kind == "num":
            self.take()
            return ("num", val)
        _, name, _ = self.take("id")
        args = []
        if self.peek()[1] == "(":
            self.take("sym", "(")
            if self.peek()[1] != ")":
                args.append(self.term())
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.term())
            self.take("sym", ")")
        return ("call", name, args)

    def parse(self):
        tree = self.term()
        if self.i != len(self.toks):
            raise CatalogNameError(f"trailing input at column {self.peek()[2] + 1} in {self.text!r}")
        return tree


_ARITY = {"sphere": ("int", "num"), "hyperbolic": ("int", "num"), "flat": ("int",), "point": (),
          "neg": ("entry",), "scaled": ("entry", "num"), "einstein_product": ("entry", "entry", "int")}

CATALOG_NAMES = tuple(_ARITY)


def _number(node, want, ctx):
    if node[0] != "num":
        raise CatalogNameError(f"{ctx}: expected a number, got an entry")
    value = as_fraction(node[1])
    if want == "int":
        if value.denominator != 1:
            raise CatalogNameError(f"{ctx}: expected an integer, got {node[1]}")
        return int(value)
    return value


def _build(node) -> EinsteinSpec:
    if node[0] != "call":
        raise CatalogNameError(f"expected a catalog entry, got number {node[1]}")
    _, name, args = node
    if name not in _ARITY:
        raise CatalogNameError(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG_NAMES)}")
    kinds = _ARITY[name]
    if len(args) != len(kinds):
        raise CatalogNameError(f"{name} takes {len(kinds)} argument(s), got {len(args)}")
    vals = [(_build(a) if k == "entry" else _number(a, k, name)) for a, k in zip(args, kinds)]
    try:
        if name == "sphere":
            return constant_curvature_metric(vals[0], vals[1], label=f"sphere({vals[0]},{vals[1]})")
        if name == "hyperbolic":
            return constant_curvature_metric(vals[0], -vals[1], label=f"hyperbolic({vals[0]},{vals[1]})")
        if name == "flat":
            return constant_curvature_metric(vals[0], 0, label=f"flat({vals[0]})")
        if name == "point":
            return point()
        if name == "neg":
            return negate(vals[0])
        if name == "scaled":
            return scale_metric(vals[0], vals[1])
        return einstein_product(vals[0], vals[1], vals[2])
    except CatalogNameError:
        raise
    except (BadDimension, ZeroScale, SignMismatch, ValueError) as exc:
        raise CatalogNameError(f"{name}: {exc}") from exc


def resolve(name: str) -> EinsteinSpec:
    """Build a catalog entry from its name string, e.g. ``"scaled(sphere(2,1),4)"``."""
    return _build(_Parser(name).parse())


def relabel(spec: EinsteinSpec, label: str) -> EinsteinSpec:
    return replace(spec, label=label)
