"""End-to-end pipeline: seed + parameters -> minimal cut surface -> mask -> volume.

The cut surface of a ray lies between its outermost source-side sample and
the first sink-side sample; the reported cut radius is that of the first
sink-side sample, so a step profile whose plateau ends at sample k yields
the boundary at radius (k + 2) * step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .flow import extract_cut_indices, max_flow
from .graph import SegmentationParams, build_ray_graph
from .mesh import PolyhedronMesh, vertex_face_table
from .volume import Mask, Volume, containing_voxel, point_inside

_VOXEL_CHUNK = 262144


class SeedOutsideVolumeError(ValueError):
    pass


@dataclass
class SegmentationResult:
    cut_indices: np.ndarray
    cut_radii: np.ndarray            # mm, per ray
    mask: Mask
    volume_mm3: float
    mean_gray: float
    runtime_ms: dict = field(default_factory=dict)
    degenerate: bool = False         # constant image: anchored minimal surface
    flow_value: float = 0.0


def cut_radii_from_indices(cut_indices: np.ndarray, params: SegmentationParams) -> np.ndarray:
    """Boundary radius per ray: the radius of the first sink-side sample."""
    step = params.radial_step_mm
    return (np.asarray(cut_indices) + 2) * step


def compute_volume(mask: Mask) -> float:
    """Foreground voxel count times the voxel volume, in mm^3."""
    return float(np.count_nonzero(mask.data)) * mask.voxel_volume_mm3


class _RadiusInterpolator:
    """Boundary radius for unit directions, linear in the per-ray radii over
    the mesh triangle containing each direction (nearest vertex narrows the
    candidate triangles to its incident faces)."""

    def __init__(self, mesh: PolyhedronMesh, cut_radii: np.ndarray):
        verts = mesh.vertices
        self.faces = mesh.faces
        corner = np.stack([verts[self.faces[:, 0]], verts[self.faces[:, 1]],
                           verts[self.faces[:, 2]]], axis=2)
        self.inv = np.linalg.inv(corner)             # (F, 3, 3)
        self.table = vertex_face_table(mesh)         # (R, k)
        self.tree = cKDTree(verts)
        self.cut_radii = np.asarray(cut_radii, dtype=float)

    def __call__(self, units: np.ndarray) -> np.ndarray:
        _, nearest = self.tree.query(units)
        cand = self.table[nearest]                   # (M, k)
        safe = np.where(cand < 0, 0, cand)
        coords = np.einsum("mfij,mj->mfi", self.inv[safe], units)
        score = coords.min(axis=2)
        score[cand < 0] = -np.inf
        best = score.argmax(axis=1)
        rows = np.arange(len(units))
        bary = np.maximum(coords[rows, best], 0.0)
        norm = bary.sum(axis=1)
        norm[norm == 0] = 1.0
        bary /= norm[:, None]
        tri = self.faces[safe[rows, best]]
        return (bary * self.cut_radii[tri]).sum(axis=1)


def voxelize_radii(cut_radii: np.ndarray, mesh: PolyhedronMesh, seed_mm, geometry: Volume | Mask) -> Mask:
    """Rasterize the star-shaped region bounded by per-ray radii.

    A voxel is kept when its center is no farther from the seed than the
    interpolated boundary radius along its direction. The seed voxel is always
    kept, and the result is reduced to the single 6-connected component that
    contains it.
    """
    cut_radii = np.asarray(cut_radii, dtype=float)
    seed = np.asarray(seed_mm, dtype=float)
    dims = np.asarray(geometry.dims)
    spacing = np.asarray(geometry.spacing)
    origin = np.asarray(geometry.origin)
    seed_vox = containing_voxel(geometry, seed)

    rmax = float(cut_radii.max())
    lo = np.maximum(np.floor((seed - origin - rmax) / spacing).astype(int) - 1, 0)
    hi = np.minimum(np.ceil((seed - origin + rmax) / spacing).astype(int) + 2, dims)
    mask = np.zeros(tuple(dims), dtype=np.uint8)

    axes = [np.arange(lo[k], hi[k]) for k in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    flat_idx = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    centers = origin + flat_idx * spacing
    delta = centers - seed
    dist = np.linalg.norm(delta, axis=1)
    near = dist <= rmax
    flat_idx = flat_idx[near]
    delta = delta[near]
    dist = dist[near]

    units = np.divide(delta, dist[:, None], out=np.zeros_like(delta), where=dist[:, None] > 0)
    interp = _RadiusInterpolator(mesh, cut_radii)
    inside = np.zeros(len(flat_idx), dtype=bool)
    for start in range(0, len(flat_idx), _VOXEL_CHUNK):
        stop = min(start + _VOXEL_CHUNK, len(flat_idx))
        rho = interp(units[start:stop])
        inside[start:stop] = dist[start:stop] <= rho
    kept = flat_idx[inside]
    mask[kept[:, 0], kept[:, 1], kept[:, 2]] = 1
    mask[seed_vox] = 1

    labels, _ = ndimage.label(mask, structure=ndimage.generate_binary_structure(3, 1))
    mask = (labels == labels[seed_vox]).astype(np.uint8)
    return Mask(dims=tuple(int(d) for d in dims), spacing=tuple(float(s) for s in spacing),
                origin=tuple(float(o) for o in origin), data=mask)


def voxelize(cut_indices: np.ndarray, mesh: PolyhedronMesh, seed_mm,
             params: SegmentationParams, geometry: Volume | Mask) -> Mask:
    """Mask of the cut surface given per-ray cut indices."""
    return voxelize_radii(cut_radii_from_indices(cut_indices, params), mesh, seed_mm, geometry)


def segment(volume: Volume, seed_mm, params: SegmentationParams | None = None) -> SegmentationResult:
    """Full segmentation at a seed point. Deterministic for fixed inputs.

    A constant image has no gray-value structure to cut along; the result is
    then the base-anchored minimal surface (all cut indices 0) flagged as
    degenerate instead of an error.
    """
    params = params or SegmentationParams()
    params.validate()
    if not point_inside(volume, seed_mm):
        raise SeedOutsideVolumeError(f"seed {tuple(seed_mm)} outside volume bounds")

    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    mesh, grid, costs, weights, network = build_ray_graph(volume, seed_mm, params)
    timings["graph_build_ms"] = (time.perf_counter() - t0) * 1000.0

    # No gray-value structure to cut along: a constant image (rays may still
    # leave it and see the background fill) or a uniform reachable neighborhood.
    degenerate = bool(
        volume.data.max() == volume.data.min()
        or grid.sample_values.max() == grid.sample_values.min()
    )
    if degenerate:
        cut_indices = np.zeros(mesh.vertex_count, dtype=np.int64)
        flow_value = 0.0
        timings["solve_ms"] = 0.0
    else:
        t0 = time.perf_counter()
        result = max_flow(network)
        cut_indices = extract_cut_indices(result, network)
        flow_value = result.flow_value
        timings["solve_ms"] = (time.perf_counter() - t0) * 1000.0

    cut_radii = cut_radii_from_indices(cut_indices, params)
    t0 = time.perf_counter()
    mask = voxelize_radii(cut_radii, mesh, seed_mm, volume)
    timings["voxelize_ms"] = (time.perf_counter() - t0) * 1000.0

    return SegmentationResult(
        cut_indices=cut_indices,
        cut_radii=cut_radii,
        mask=mask,
        volume_mm3=compute_volume(mask),
        mean_gray=costs.mean_gray,
        runtime_ms=timings,
        degenerate=degenerate,
        flow_value=flow_value,
    )
