"""rfsquash: compress regression random forests into multinomial-logistic
leaf surrogates, with exact byte accounting for the size/accuracy trade-off."""

from .codec import decode, encode, measure_size
from .data import (
    Dataset,
    SplitPair,
    gen_axis_partition,
    gen_friedman1,
    load_csv,
    split,
    write_csv,
)
from .errors import (
    ChecksumMismatchError,
    CodecError,
    DataError,
    InvalidMagicError,
    NumericError,
    RfsquashError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)
from .forest import (
    DecisionTree,
    Forest,
    ForestConfig,
    fit_forest,
    fit_tree,
    forest_predict,
    forest_predict_batch,
    subsample,
    traverse,
    tree_predict,
)
from .mlr import (
    MlrFitConfig,
    MlrFitResult,
    MlrModel,
    class_probabilities,
    fit_mlr,
    multinomial_pmf,
    penalized_gradient,
    penalized_log_likelihood,
    predict_class,
)
from .surrogate import (
    LeafDataset,
    SurrogateForest,
    TreeSurrogate,
    extract_leaf_dataset,
    fit_surrogate,
    squash_forest,
    surrogate_forest_predict,
    surrogate_forest_predict_batch,
    surrogate_predict,
    with_prediction_mode,
)

__version__ = "0.1.0"

__all__ = [
    "ChecksumMismatchError",
    "CodecError",
    "DataError",
    "Dataset",
    "DecisionTree",
    "Forest",
    "ForestConfig",
    "InvalidMagicError",
    "LeafDataset",
    "MlrFitConfig",
    "MlrFitResult",
    "MlrModel",
    "NumericError",
    "RfsquashError",
    "SplitPair",
    "SurrogateForest",
    "TreeSurrogate",
    "TruncatedPayloadError",
    "UnsupportedVersionError",
    "class_probabilities",
    "decode",
    "encode",
    "extract_leaf_dataset",
    "fit_forest",
    "fit_mlr",
    "fit_surrogate",
    "fit_tree",
    "forest_predict",
    "forest_predict_batch",
    "gen_axis_partition",
    "gen_friedman1",
    "load_csv",
    "measure_size",
    "multinomial_pmf",
    "penalized_gradient",
    "penalized_log_likelihood",
    "predict_class",
    "split",
    "squash_forest",
    "subsample",
    "surrogate_forest_predict",
    "surrogate_forest_predict_batch",
    "surrogate_predict",
    "traverse",
    "tree_predict",
    "with_prediction_mode",
    "write_csv",
]
