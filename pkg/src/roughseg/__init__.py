"""Grid-density rough clustering and rough-set rule classification.

The pipeline segments a raster with pass-wise grid clustering, refines the
cluster boundaries pixel by pixel, induces minimal decision rules from
human-labeled clusters with LEM2, and classifies images against the rule
base. See the ``roughseg`` CLI for the file-level workflow.
"""

from roughseg._kernels import backend_name as kernel_backend
from roughseg.boundary import (
    BetaScore,
    BorderSet,
    beta_measure,
    find_border_cells,
    refine_boundaries,
)
from roughseg.classify import (
    Discretizer,
    LabelsFile,
    accuracy,
    build_decision_table,
    classify_image,
    classify_pixel,
    cluster_majority,
    load_rules_json,
    save_rules_json,
    save_rules_text,
)
from roughseg.colorspace import (
    ClusteringParams,
    HsiImage,
    HsiPixel,
    hsi_manhattan,
    rgb_to_hsi,
    similarity_flag,
)
from roughseg.exceptions import DataError, ParameterError, PpmFormatError, RoughsegError
from roughseg.grid import (
    ClusterInfo,
    ClusterMap,
    GridCell,
    PassRecord,
    PerfStats,
    build_grid,
    rough_cluster,
    rough_cluster_with_grid,
    score_cells,
    select_seed_cell,
    select_seed_pixel,
)
from roughseg.raster import (
    ImageRaster,
    LabelRaster,
    load_label_map,
    load_ppm,
    palette_color,
    save_label_map,
    save_ppm,
)
from roughseg.roughset import (
    AVPair,
    Block,
    Concept,
    DecisionTable,
    LocalCovering,
    Rule,
    boundary_region,
    compute_blocks,
    concepts,
    indiscernibility_classes,
    induce_rules,
    lem2_local_covering,
    lower_approx,
    upper_approx,
)

__version__ = "0.1.0"

__all__ = [
    "AVPair",
    "BetaScore",
    "Block",
    "BorderSet",
    "ClusterInfo",
    "ClusterMap",
    "ClusteringParams",
    "Concept",
    "DataError",
    "DecisionTable",
    "Discretizer",
    "GridCell",
    "HsiImage",
    "HsiPixel",
    "ImageRaster",
    "LabelRaster",
    "LabelsFile",
    "LocalCovering",
    "ParameterError",
    "PassRecord",
    "PerfStats",
    "PpmFormatError",
    "RoughsegError",
    "Rule",
    "accuracy",
    "beta_measure",
    "boundary_region",
    "build_decision_table",
    "build_grid",
    "classify_image",
    "classify_pixel",
    "cluster_majority",
    "compute_blocks",
    "concepts",
    "find_border_cells",
    "hsi_manhattan",
    "indiscernibility_classes",
    "induce_rules",
    "kernel_backend",
    "lem2_local_covering",
    "load_label_map",
    "load_ppm",
    "load_rules_json",
    "lower_approx",
    "palette_color",
    "refine_boundaries",
    "rgb_to_hsi",
    "rough_cluster",
    "rough_cluster_with_grid",
    "save_label_map",
    "save_ppm",
    "save_rules_json",
    "save_rules_text",
    "score_cells",
    "select_seed_cell",
    "select_seed_pixel",
    "similarity_flag",
    "upper_approx",
]
