"""Explicit Poincaré–Einstein and ambient metrics built from Einstein factors,
with numerical checks of the identities they satisfy."""
import jax

jax.config.update("jax_enable_x64", True)

__version__ = "0.1.0"
