"""Scenarios shipped with the package, stored as scenario-file text."""
from __future__ import annotations

from .config import ScenarioConfig, parse_scenario

_S2S2 = "einstein_product(sphere(2,1),sphere(2,1),1)"

BUILTIN_TEXT = {
    "s2xh2-full-pipeline": """
[scenario]
name = s2xh2-full-pipeline
chain = cone, ambient, poincare, killing
checks = einstein, ambient, equivalence, dilation, killing, bach, transport

[factors]
g1 = sphere(2,1)
g2 = hyperbolic(2,1)

[options]
grid = 4
""",
    "einstein-product-s2s2": f"""
[scenario]
name = einstein-product-s2s2
chain = cone
checks = einstein, ricci_flat, homothety

[factors]
g1 = {_S2S2}
""",
    "so4-arithmetic": """
[scenario]
name = so4-arithmetic
checks = arithmetic

[arithmetic]
m1 = 6
sc1 = 3/2
m2 = 6
sc2 = -3/2
expect_mu = 1/40
expect_r0_squared = 80
""",
    "recursion-l2": """
[scenario]
name = recursion-l2
chain = recursion
checks = einstein

[factors]
g0 = hyperbolic(2,1)
p1 = sphere(2,1)
p2 = sphere(2,1)
""",
    "flat-ambient": """
[scenario]
name = flat-ambient
chain = ambient
checks = ambient, normal_form, homothety

[factors]
g1 = flat(3)
g2 = flat(2)
""",
    "cone-flatness": """
[scenario]
name = cone-flatness
chain = cone
checks = ricci_flat, homothety, loop_identity

[factors]
g1 = sphere(2,1)
""",
    "drag-lemma-grid": f"""
[scenario]
name = drag-lemma-grid
chain = cone
checks = drag

[factors]
g1 = {_S2S2}

[options]
grid = 10
""",
    "transverse-holonomy": f"""
[scenario]
name = transverse-holonomy
chain = cone
checks = transverse_holonomy

[factors]
g1 = {_S2S2}

[options]
loops = 3
""",
    "bach-boundary-4d": """
[scenario]
name = bach-boundary-4d
checks = bach

[factors]
g1 = sphere(2,1)
g2 = hyperbolic(2,1)
""",
}

BUILTIN_NAMES = tuple(BUILTIN_TEXT)


def builtin(name: str) -> ScenarioConfig:
    if name not in BUILTIN_TEXT:
        raise KeyError(f"no builtin scenario named {name!r}; known: {', '.join(BUILTIN_NAMES)}")
    return parse_scenario(BUILTIN_TEXT[name], f"<builtin {name}>")
