"""Cones, ambient metrics, Poincaré–Einstein metrics, Killing forms and sub-product recursion."""
from .cones import ConeProductSpec, ConeSpec, cone_coords, cone_product, metric_cone, s_to_trho, trho_to_s
from .ambient import (NormalFormRicci, ProductAmbientSpec, RhoFamily, ambient_metric, normal_form_patch,
                      product_family, ricci_normal_form)
from .poincare import AmbientFromPoincare, PoincareSpec, ambient_from_poincare, as_einstein, poincare_metric
from .killing import KillingFormSpec, KillingLift, killing_cone_lift, special_killing_form
from .recursion import MultiSubProductSpec, multi_subproduct
