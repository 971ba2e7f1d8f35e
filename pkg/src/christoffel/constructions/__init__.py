from .boxmaps import BoxMap, corner_map_3d, halfspace_box_for, halfspace_box_map, max_area_triangle, parallelogram_2d
from .needles import Certificate, bound_rhs, needle_certificate, univariate_needle
from .sharpness import sharpness_body_2d, sharpness_body_nd

__all__ = [
    "BoxMap", "corner_map_3d", "halfspace_box_for", "halfspace_box_map", "max_area_triangle",
    "parallelogram_2d", "Certificate", "bound_rhs", "needle_certificate", "univariate_needle",
    "sharpness_body_2d", "sharpness_body_nd",
]
