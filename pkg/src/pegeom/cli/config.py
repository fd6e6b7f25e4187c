"""Scenario files: an INI grammar read with :mod:`configparser`.

Grammar::

    [scenario]
    name    = <text>                      ; required
    chain   = <stage>, <stage>, ...       ; cone, ambient, poincare, killing, recursion
    checks  = <check>, <check>, ...       ; see CHECKS
    seed    = <u64>                       ; default 0
    samples = <n>                         ; default 20
    output  = <path>                      ; optional

    [factors]
    g1 = <catalog name>                   ; e.g. sphere(2,1)
    g2 = <catalog name>                   ; optional, defaults to point()
    mu = <rational>                       ; optional, solved when omitted
    g0 = <catalog name>                   ; recursion seed
    p1 = <catalog name>                   ; recursion factors p1, p2, ...

    [tolerances]
    <check> = <float>                     ; per-check override

    [options]
    dilation_alpha = <rational>           ; default 3
    grid           = <n>                  ; transport (t, s) grid size, default 10
    loops          = <n>                  ; transverse/flat loops, default 3

    [arithmetic]
    m1 = <int>  sc1 = <rational>  m2 = <int>  sc2 = <rational>
    expect_mu = <rational>  expect_r0_squared = <rational>

Comments start with ``#`` or ``;``.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..catalog import EinsteinSpec, as_fraction, resolve
from ..errors import GeometryError, ParseError, ScenarioValidationError

STAGES = ("cone", "ambient", "poincare", "killing", "recursion")

# check -> stages it needs; a tuple of alternatives is written as a nested tuple
CHECKS: dict[str, tuple] = {
    "einstein": (),
    "ambient": ("ambient",),
    "normal_form": ("ambient",),
    "equivalence": ("cone", "ambient"),
    "homothety": (("cone", "ambient"),),
    "dilation": ("ambient",),
    "killing": ("killing",),
    "bach": (),
    "transport": (("ambient", "cone"),),
    "drag": ("cone",),
    "transverse_holonomy": ("cone",),
    "loop_identity": ("cone",),
    "ricci_flat": (("cone", "ambient"),),
    "arithmetic": (),
}

STAGE_NEEDS = {"killing": ("poincare",)}

SECTIONS = {
    "scenario": {"name", "chain", "checks", "seed", "samples", "output"},
    "factors": None,  # g0, g1, g2, mu, p<k>
    "tolerances": set(CHECKS),
    "options": {"dilation_alpha", "grid", "loops"},
    "arithmetic": {"m1", "sc1", "m2", "sc2", "expect_mu", "expect_r0_squared"},
}

_FACTOR_KEY = re.compile(r"^(g0|g1|g2|mu|p[1-9]\d*)$")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    chain: tuple = ()
    checks: tuple = ()
    factors: dict = field(default_factory=dict)  # key -> catalog name
    mu: Fraction | None = None
    seed: int = 0
    samples: int = 20
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    arithmetic: dict = field(default_factory=dict)
    output: str | None = None

    def spec(self, key: str) -> EinsteinSpec:
        return resolve(self.factors[key])

    @property
    def positives(self) -> tuple:
        keys = sorted((k for k in self.factors if k.startswith("p")), key=lambda k: int(k[1:]))
        return tuple(keys)


def _locations(text: str) -> dict:
    """``(section, key) -> (line, column of the value)``, both 1-based."""
    out, section = {}, None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            continue
        m = re.match(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]\s*", line)
        if m and section is not None:
            out[(section, m.group(1).strip().lower())] = (lineno, m.end() + 1)
    return out


def _split(value: str) -> tuple:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _parser() -> configparser.ConfigParser:
    return configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                     inline_comment_prefixes=("#", ";"), strict=True)


def parse_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse and validate scenario text; every validation problem is reported at once."""
    parser = _parser()
    try:
        parser.read_string(text, source)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(f"{source}: key outside any [section]", exc.lineno, 1) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ParseError(f"{source}: malformed line", lineno, 1) from exc
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ParseError(f"{source}: {exc.message}", exc.lineno, 1) from exc
    where = _locations(text)
    errors: list[str] = []

    def err(section, key, msg):
        loc = where.get((section, key))
        errors.append(f"[{section}] {key}: {msg}" + (f" (line {loc[0]}, column {loc[1]})" if loc else ""))

    for sec in parser.sections():
        if sec not in SECTIONS:
            errors.append(f"unknown section [{sec}]")
            continue
        allowed = SECTIONS[sec]
        for key in parser[sec]:
            ok = _FACTOR_KEY.match(key) if allowed is None else key in allowed
            if not ok:
                err(sec, key, "unknown key")

    def get(sec, key, default=None):
        return parser[sec][key] if parser.has_option(sec, key) else default

    def number(sec, key, kind, default, positive=False):
        raw = get(sec, key)
        if raw is None:
            return default
        try:
            val = kind(raw) if kind is not Fraction else as_fraction(raw)
        except (ValueError, ZeroDivisionError):
            err(sec, key, f"not a valid {kind.__name__}: {raw!r}")
            return default
        if positive and val <= 0:
            err(sec, key, f"must be positive, got {raw!r}")
        elif kind is int and val < 0:
            err(sec, key, f"must be non-negative, got {raw!r}")
        return val

    name = get("scenario", "name")
    if not parser.has_section("scenario"):
        errors.append("missing [scenario] section")
    elif not name:
        errors.append("[scenario] name is required")
    chain = _split(get("scenario", "chain", ""))
    checks = _split(get("scenario", "checks", ""))
    for st in chain:
        if st not in STAGES:
            err("scenario", "chain", f"unknown stage {st!r}")
    for st in chain:
        for need in STAGE_NEEDS.get(st, ()):
            if need not in chain:
                err("scenario", "chain", f"stage {st!r} requires {need!r}")
    for ck in checks:
        if ck not in CHECKS:
            err("scenario", "checks", f"unknown check {ck!r}")
            continue
        for need in CHECKS[ck]:
            alts = need if isinstance(need, tuple) else (need,)
            if not any(a in chain for a in alts):
                err("scenario", "checks", f"check {ck!r} requires stage {' or '.join(map(repr, alts))}")
    seed = number("scenario", "seed", int, 0)
    samples = number("scenario", "samples", int, 20, positive=True)

    factors = {}
    mu = None
    if parser.has_section("factors"):
        for key, raw in parser["factors"].items():
            if key == "mu":
                mu = number("factors", "mu", Fraction, None)
                continue
            if not _FACTOR_KEY.match(key):
                continue
            try:
                resolve(raw)
            except GeometryError as exc:
                err("factors", key, f"cannot resolve {raw!r}: {exc}")
            factors[key] = raw.strip()
    structural = {"cone", "ambient", "poincare", "killing"}
    if structural & set(chain) and "g1" not in factors:
        errors.append("[factors] g1 is required by the construction chain")
    if "recursion" in chain:
        if "g0" not in factors:
            errors.append("[factors] g0 is required by the recursion stage")
        if not any(k.startswith("p") for k in factors):
            errors.append("[factors] at least one positive factor p1 is required by the recursion stage")
    if ("einstein" in checks and not ({"poincare", "recursion"} & set(chain)) and "g1" not in factors):
        err("scenario", "checks", "check 'einstein' needs a factor, a poincare stage or a recursion stage")
    if "bach" in checks and "g1" not in factors:
        err("scenario", "checks", "check 'bach' needs factors g1 (and g2)")

    tolerances = {}
    if parser.has_section("tolerances"):
        for key in parser["tolerances"]:
            if key in CHECKS:
                tolerances[key] = number("tolerances", key, float, None, positive=True)
    options = {"dilation_alpha": number("options", "dilation_alpha", Fraction, Fraction(3), positive=True),
               "grid": number("options", "grid", int, 10, positive=True),
               "loops": number("options", "loops", int, 3, positive=True)}
    arithmetic = {}
    if parser.has_section("arithmetic"):
        for key in ("m1", "m2"):
            arithmetic[key] = number("arithmetic", key, int, None)
        for key in ("sc1", "sc2", "expect_mu", "expect_r0_squared"):
            arithmetic[key] = number("arithmetic", key, Fraction, None)
    if "arithmetic" in checks:
        have_dims = all(arithmetic.get(k) is not None for k in ("m1", "sc1", "m2", "sc2"))
        if not have_dims and "g1" not in factors:
            err("scenario", "checks", "check 'arithmetic' needs [arithmetic] m1/sc1/m2/sc2 or factors")

    if errors:
        raise ScenarioValidationError(errors)
    return ScenarioConfig(name, chain, checks, factors, mu, seed, samples, tolerances, options, arithmetic,
                          get("scenario", "output"))


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))
