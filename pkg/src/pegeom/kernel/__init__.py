"""Chart-local tensor calculus."""
from .patch import (ChartPoint, Domain, MetricPatch, Surd, box_domain, metric_eval, product_patch,
                    pullback_patch, signature_of)
from .curvature import (ConformalCurvatureAtPoint, CurvatureAtPoint, conformal_curvature, curvature,
                        einstein_tensor_divergence, frame_norm, mixed_operator_norm)
from .forms import (FormField, constant_form, covariant_derivative, exterior_d, form_calculus, form_norm_sq,
                    hodge_star, interior_product, volume_form, wedge)
from .lie import dual_form_curl, lie_derivative_metric, lie_derivative_metric_flow
from .transport import PathSpec, TransportResult, parallel_transport, segment_path
