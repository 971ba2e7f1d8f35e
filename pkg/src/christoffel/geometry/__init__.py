from .affine import AffineMap
from .bodies import (
    AffineImage, Ball, BoundaryRegion, ConvexBody, HalfBall3, Hull, LpBall, Polygon2D, Revolution,
    body_from_dict, body_from_json, contains, half_disc_meridian, support, unit_directions,
)
from .measure import (
    Measurement, boundary_distance, chord_lengths, exit_distance, measure, section_polygon, section_volume,
)

__all__ = [
    "AffineMap", "AffineImage", "Ball", "BoundaryRegion", "ConvexBody", "HalfBall3", "Hull", "LpBall",
    "Polygon2D", "Revolution", "body_from_dict", "body_from_json", "contains", "half_disc_meridian",
    "support", "unit_directions", "Measurement", "boundary_distance", "chord_lengths", "exit_distance",
    "measure", "section_polygon", "section_volume",
]
