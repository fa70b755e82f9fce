"""latentlab: point-cloud latent-label data engine.

Deterministic building blocks for semi-supervised LiDAR panoptic
segmentation pipelines: cylinder voxelization, Cylinder-Mix augmentation,
camera projection and instance heatmaps, BEV pooling/fusion, panoptic
decoding, and panoptic/semantic evaluation.
"""

from .bev_pool import FeatureGrid, bev_max_pool, fuse_bev
from .camera_projection import (
    CameraModel,
    InstanceBox,
    PixelMapping,
    instance_boxes,
    project_points,
)
from .cylinder_grid import CylinderGridSpec, in_bounds_mask, voxelize
from .cylinder_mix import MixSpec, cylinder_mix, mix_membership, pair_scans, region_index
from .dataset_io import (
    PointCloud,
    SplitManifest,
    TrainingManifest,
    fixed_interval_split,
    read_calibration,
    read_labels,
    read_scan,
    self_training_manifest,
    write_labels,
    write_scan,
)
from .ipsl_heatmap import (
    HeatmapSpec,
    box_heatmap,
    fuse_intermediate,
    image_heatmap,
    mask_heatmap,
    point_heatmap,
)
from .metrics import (
    BoundaryBins,
    LossWeights,
    PQReport,
    boundary_accuracy,
    mean_iou,
    panoptic_quality,
    segmentation_loss,
)
from .panoptic_decode import DecodeSpec, PanopticMap, assign_instances, find_centers, majority_semantic
from .tensorio import read_tensor, write_tensor

__version__ = "0.1.0"
