"""Maps of Asplund's distances under the LIP multiplicative law, computed
through grey-level dilations and erosions."""

from .asplund import (
    BoundMap,
    DistanceMap,
    asplund_distance,
    distance_map_flat,
    distance_map_general,
    distance_map_tolerance,
    lambda_map,
    mu_map,
    oracle_bounds,
)
from .errors import (
    ContractError,
    DomainError,
    ExtractionError,
    OracleError,
    ParameterError,
    ParseError,
    SceneError,
    ShapeError,
)
from .lip import GreyScale, Image, clamp_floor, invert_convention, lip_add, lip_scalar_mul, tilde, tilde_inverse
from .matcher import Detection, Placement, darken, detect, extract_probe, match, synthesize_scene
from .morpho import (
    BoundField,
    FlatDomain,
    StructuringFunction,
    dilate_flat,
    dilate_fn,
    erode_flat,
    erode_fn,
    rank_filter,
    reflect,
)

__version__ = "0.1.0"
