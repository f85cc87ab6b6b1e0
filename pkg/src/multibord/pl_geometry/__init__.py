"""Exact PL shapes, intersection enumeration and smooth-side loci."""

from .domain import SurfaceComplex, circle_params, cube_sphere, disjoint_union, projective_plane, torus_grid
from .intersect import (
    DoubleSegment,
    PushoffResult,
    mesh_double_locus_r3,
    mesh_double_points_r4,
    mesh_triple_points_r3,
    pushoff_euler_number,
    segment_crossings,
)
from .parametric import MESH_BUILTINS, PARAMETRIC_BUILTINS, ParametricImmersion, builtin_mesh, builtin_parametric
from .predicates import det_exact, det_sign, orient, orient_exact
from .shapes import (
    ImmersedPolyCurve,
    ImmersedTriMesh,
    IntersectionRecord,
    derived_seed,
    from_float,
    perturb_generic,
    read_off,
    read_shape,
    shape_from_json,
    write_off,
)
from .smooth import FoldLocus, TangentPoint, chain_from_vertex_pairs, edge_path_chain, fold_locus, tangent_direction_points

__all__ = [
    "SurfaceComplex", "circle_params", "cube_sphere", "disjoint_union", "projective_plane", "torus_grid",
    "DoubleSegment", "PushoffResult", "mesh_double_locus_r3", "mesh_double_points_r4", "mesh_triple_points_r3",
    "pushoff_euler_number", "segment_crossings",
    "MESH_BUILTINS", "PARAMETRIC_BUILTINS", "ParametricImmersion", "builtin_mesh", "builtin_parametric",
    "det_exact", "det_sign", "orient", "orient_exact",
    "ImmersedPolyCurve", "ImmersedTriMesh", "IntersectionRecord", "derived_seed", "from_float", "perturb_generic",
    "read_off", "read_shape", "shape_from_json", "write_off",
    "FoldLocus", "TangentPoint", "chain_from_vertex_pairs", "edge_path_chain", "fold_locus", "tangent_direction_points",
]
