"""Z2 * Z_ell Kleinian groups, their limit sets and dimension estimates."""
from asdkit.kleinian.coordinates import critical_separation, in_schottky_region, t_from_z, z_from_t
from asdkit.kleinian.dimension import (
    DimensionEstimate, ScanResult, box_dimension, group_dimension, ray_path,
    scan_dimension_crossing, schoen_yau_sign,
)
from asdkit.kleinian.groups import (
    KleinianGroup, PointCloud, build_deformed, build_naive, enumerate_words, limit_points, word_count,
)
from asdkit.kleinian.hierarchy import Disk, Hierarchy, disk_hierarchy, hausdorff_upper_bound

__all__ = [
    "critical_separation", "in_schottky_region", "t_from_z", "z_from_t",
    "DimensionEstimate", "ScanResult", "box_dimension", "group_dimension", "ray_path",
    "scan_dimension_crossing", "schoen_yau_sign",
    "KleinianGroup", "PointCloud", "build_deformed", "build_naive", "enumerate_words",
    "limit_points", "word_count",
    "Disk", "Hierarchy", "disk_hierarchy", "hausdorff_upper_bound",
]
