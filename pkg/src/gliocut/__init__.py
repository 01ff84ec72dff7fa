"""Seed-driven radial graph-cut segmentation and volumetry for 3D volumes."""

from .evaluate import (Aggregates, DiceReport, PhantomSpec, compare_batch, dice,
                       generate_phantom, rater_stats)
from .flow import (CutResult, brute_force_min_surface, extract_cut_indices, max_flow,
                   parse_dimacs, surface_cost_offset)
from .graph import (CostField, FlowNetwork, RayGrid, SegmentationParams, assemble_graph,
                    cast_rays, estimate_mean_gray, node_costs, terminal_weights)
from .mesh import PolyhedronMesh, build_icosphere
from .segment import (SegmentationResult, compute_volume, segment, voxelize,
                      voxelize_radii)
from .volume import (Mask, Volume, load_volume, mask_from_volume, sample_trilinear,
                     save_mask, save_volume, voxel_to_world)

__version__ = "0.1.0"

__all__ = [
    "Aggregates", "CostField", "CutResult", "DiceReport", "FlowNetwork", "Mask",
    "PhantomSpec", "PolyhedronMesh", "RayGrid", "SegmentationParams",
    "SegmentationResult", "Volume", "assemble_graph", "brute_force_min_surface",
    "build_icosphere", "cast_rays", "compare_batch", "compute_volume", "dice",
    "estimate_mean_gray", "extract_cut_indices", "generate_phantom", "load_volume",
    "mask_from_volume", "max_flow", "node_costs", "parse_dimacs", "rater_stats",
    "sample_trilinear", "save_mask", "save_volume", "segment", "surface_cost_offset",
    "terminal_weights", "voxel_to_world", "voxelize", "voxelize_radii",
]
