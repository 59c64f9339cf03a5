"""2D facial expression cloning with elastic and muscle-distribution models."""

from .face_model import (
    FeaturePoint,
    FeaturePointSet,
    Organ,
    OrganBox,
    organ_bounding_box,
    parse_feature_points,
    serialize_feature_points,
)
from .mesh_warp import TriangleMesh, delaunay_triangulate, neighbors_of, piecewise_affine_warp
from .pipeline import CloneJob, StageOutputs, clone, run_batch, run_clone

__all__ = [
    "CloneJob", "FeaturePoint", "FeaturePointSet", "Organ", "OrganBox", "StageOutputs",
    "TriangleMesh", "clone", "default_muscle_config_path", "delaunay_triangulate",
    "neighbors_of", "organ_bounding_box", "parse_feature_points", "piecewise_affine_warp",
    "run_batch", "run_clone", "serialize_feature_points",
]
__version__ = "0.1.0"


def default_muscle_config_path():
    from importlib.resources import files

    return str(files(__name__) / "data" / "default_muscles.txt")
