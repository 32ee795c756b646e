"""Elastic shape analysis of planar curves and aggregated pairwise classification."""
from .classify import (
    Classifier,
    ClassifierSpec,
    classify,
    classify_os,
    classify_rec,
    train,
)
from .curves import (
    CurveError,
    PlanarCurve,
    Srvf,
    from_srvf,
    inner,
    normalize,
    preprocess,
    resample_arclength,
    to_srvf,
)
from .io import OutlineFormatError, load_outlines, write_outlines
from .manifold import (
    KarcherMean,
    MeanConfig,
    PcBasis,
    PcCoords,
    TangentVector,
    exp_map,
    karcher_mean,
    log_map,
    pc_coords,
    tangent_matrix,
    tpca,
)
from .registration import (
    Alignment,
    Reparam,
    align,
    apply_reparam,
    geodesic_path,
    optimal_reparam,
    optimal_rotation,
    register,
    shape_distance,
)

__all__ = [
    "Alignment", "Classifier", "ClassifierSpec", "CurveError", "KarcherMean", "MeanConfig",
    "OutlineFormatError", "PcBasis", "PcCoords", "PlanarCurve", "Reparam", "Srvf", "TangentVector",
    "align", "apply_reparam", "classify", "classify_os", "classify_rec", "exp_map", "from_srvf",
    "geodesic_path", "inner", "karcher_mean", "load_outlines", "log_map", "normalize",
    "optimal_reparam", "optimal_rotation", "pc_coords", "preprocess", "register",
    "resample_arclength", "shape_distance", "tangent_matrix", "to_srvf", "tpca", "train",
    "write_outlines",
]
__version__ = "0.1.0"
