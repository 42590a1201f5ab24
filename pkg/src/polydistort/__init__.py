"""Intrinsic-to-extrinsic distortion on polyhedral surfaces in R^3."""

from .complex import ComplexMetric, EdgePoint, SkeletonSquareComplex, SquarePoint, complex_distance
from .generators import EmbeddingError, make_fan, make_replacement_surface, make_rtriangular, make_xn
from .geometry import (
    Ball,
    MeshError,
    TriangleFan,
    TriangleMesh,
    build_mesh,
    extrinsic_diameter,
    mesh_area,
    minimal_enclosing_ball,
    normalize_to_unit_ball,
    vertex_star_fan,
)
from .intrinsic import FanMetric, SurfacePoint, cone_distance, develop_fan, steiner_graph_distance
from .packing import (
    PackingBound,
    ball_volume,
    jung_constant,
    packing_bound_sweep,
    packing_bounds,
    packing_lower_bound_greedy,
    packing_upper_bound,
)
from .predicates import validate_embedding
from .search import (
    DistortionCertificate,
    ball_area_sup,
    certify_volume_hypothesis,
    count_separated_pairs,
    find_distorted_pair,
    greedy_net,
    ratio_K,
)
from .spaces import ComplexSpace, FanSpace, MeshSpace, space_for
from .triangular import (
    Rejection,
    area_threshold,
    fan_distance_lower_bound,
    fan_triangle_area,
    rtriangular_reduce,
    skeleton_transfer,
    theorem2_certify,
)

__version__ = "0.1.0"
