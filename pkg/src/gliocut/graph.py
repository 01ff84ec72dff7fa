"""Radial ray sampling and construction of the directed flow network.

From a seed point, rays are cast through the vertices of a polyhedron mesh
and sampled at uniform radii. Each sample becomes a graph node. Two families
of infinite arcs shape the feasible cuts:

* along-ray arcs (r, z) -> (r, z-1): any finite cut keeps, per ray, a
  contiguous inner run of nodes on the source side;
* inter-ray arcs (r, z) -> (r_n, max(0, z - delta_r)) for each mesh neighbor
  r_n: cut heights of neighboring rays may differ by at most delta_r.

Terminal arcs carry per-node weights derived from the gray-value cost field,
so the minimum s-t cut selects the cheapest feasible closed surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import PolyhedronMesh, build_icosphere
from .volume import Volume, containing_voxel, point_inside, sample_trilinear_many


@dataclass(frozen=True)
class SegmentationParams:
    """Tunables of the radial graph. Defaults fit a ~5 cm lesion."""

    delta_r: int = 2              # max cut-height difference between neighbor rays
    samples_per_ray: int = 60     # Z
    max_radius_mm: float = 50.0
    subdivisions: int = 3         # icosphere level, R = 10*4**n + 2
    mean_region_d: int = 5        # cube edge (voxels) for the seed-region mean

    def validate(self) -> None:
        if self.delta_r < 0:
            raise ValueError("delta_r must be >= 0")
        if self.samples_per_ray < 2:
            raise ValueError("samples_per_ray must be >= 2")
        if self.delta_r >= self.samples_per_ray:
            raise ValueError("delta_r must be < samples_per_ray to constrain anything")
        if self.max_radius_mm <= 0:
            raise ValueError("max_radius_mm must be > 0")
        if not (0 <= self.subdivisions <= 7):
            raise ValueError("subdivisions must be in 0..7")
        if self.mean_region_d < 1 or self.mean_region_d % 2 == 0:
            raise ValueError("mean_region_d must be an odd integer >= 1")

    @property
    def radial_step_mm(self) -> float:
        return self.max_radius_mm / self.samples_per_ray

    def sample_radii(self) -> np.ndarray:
        """Radii of the Z samples; the innermost sits one step from the seed."""
        return (np.arange(self.samples_per_ray) + 1) * self.radial_step_mm


@dataclass(frozen=True)
class RayGrid:
    """R x Z interpolated gray values plus the ray neighborhood structure."""

    seed: tuple[float, float, float]
    sample_values: np.ndarray       # (R, Z)
    sample_positions: np.ndarray    # (R, Z, 3) mm
    adjacency: tuple
    radii: np.ndarray               # (Z,) mm, shared by all rays

    @property
    def ray_count(self) -> int:
        return self.sample_values.shape[0]

    @property
    def samples_per_ray(self) -> int:
        return self.sample_values.shape[1]


@dataclass(frozen=True)
class CostField:
    """Per-node cost: absolute distance of the sample gray value to the
    seed-region mean."""

    c: np.ndarray                   # (R, Z) non-negative
    mean_gray: float


@dataclass(frozen=True)
class FlowNetwork:
    """Directed capacitated graph with source and sink.

    Node (r, z) maps to index r * Z + z; source and sink are the last two
    indices. ``inf_capacity`` is the finite stand-in for infinity: strictly
    larger than the sum of all finite terminal capacities, so no infinite
    arc is ever saturated by a minimum cut.
    """

    node_count: int
    arcs_from: np.ndarray
    arcs_to: np.ndarray
    arcs_cap: np.ndarray            # float capacities; inf arcs carry inf_capacity
    source: int
    sink: int
    inf_capacity: float | None
    ray_count: int = 0
    samples_per_ray: int = 0
    adjacency: tuple | None = None
    delta_r: int = 0
    arc_kinds: np.ndarray | None = field(default=None, repr=False)  # 0=along-ray 1=inter-ray 2=terminal 3=anchor

    def node_index(self, r: int, z: int) -> int:
        return r * self.samples_per_ray + z

    def to_dimacs(self) -> str:
        """DIMACS max-flow rendering for debugging (capacities rounded to int)."""
        lines = [f"p max {self.node_count} {len(self.arcs_from)}",
                 f"n {self.source + 1} s", f"n {self.sink + 1} t"]
        for u, v, c in zip(self.arcs_from, self.arcs_to, self.arcs_cap):
            lines.append(f"a {int(u) + 1} {int(v) + 1} {int(round(float(c)))}")
        return "\n".join(lines) + "\n"


def estimate_mean_gray(volume: Volume, seed_mm, d: int) -> float:
    """Mean gray value of the d x d x d voxel cube centered on the seed voxel,
    clipped at the volume borders."""
    if d < 1 or d % 2 == 0:
        raise ValueError("d must be an odd integer >= 1")
    if not point_inside(volume, seed_mm):
        raise ValueError(f"seed {tuple(seed_mm)} outside volume")
    cx, cy, cz = containing_voxel(volume, seed_mm)
    h = d // 2
    lo = np.maximum([cx - h, cy - h, cz - h], 0)
    hi = np.minimum([cx + h + 1, cy + h + 1, cz + h + 1], volume.dims)
    block = volume.data[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
    return float(block.mean())


def cast_rays(volume: Volume, mesh: PolyhedronMesh, seed_mm, params: SegmentationParams) -> RayGrid:
    """Sample all rays at uniform radii (z+1) * max_radius / Z from the seed."""
    params.validate()
    if not point_inside(volume, seed_mm):
        raise ValueError(f"seed {tuple(seed_mm)} outside volume")
    seed = np.asarray(seed_mm, dtype=float)
    radii = params.sample_radii()
    positions = seed[None, None, :] + mesh.vertices[:, None, :] * radii[None, :, None]
    values = sample_trilinear_many(volume, positions.reshape(-1, 3)).reshape(
        mesh.vertex_count, params.samples_per_ray
    )
    return RayGrid(
        seed=(float(seed[0]), float(seed[1]), float(seed[2])),
        sample_values=values,
        sample_positions=positions,
        adjacency=mesh.adjacency,
        radii=radii,
    )


def node_costs(grid: RayGrid, mean_gray: float) -> CostField:
    """c(r, z) = |mean_gray - sample value|."""
    return CostField(c=np.abs(mean_gray - grid.sample_values), mean_gray=float(mean_gray))


def terminal_weights(costs: CostField) -> np.ndarray:
    """Per-node terminal weights.

    Weight equals the cost itself at the innermost and outermost sample of a
    ray, and the difference to the previous sample in between. Summed over an
    inner run 0..k (k < Z-1) the weights telescope back to c(r, k).
    """
    c = costs.c
    if c.shape[1] < 2:
        raise ValueError("need at least two samples per ray")
    w = np.empty_like(c)
    w[:, 0] = c[:, 0]
    w[:, 1:-1] = c[:, 1:-1] - c[:, :-2]
    w[:, -1] = c[:, -1]
    return w


def _adjacency_of(mesh_or_adjacency):
    if isinstance(mesh_or_adjacency, PolyhedronMesh):
        return mesh_or_adjacency.adjacency
    return tuple(tuple(a) for a in mesh_or_adjacency)


def assemble_graph(costs: CostField, weights: np.ndarray, mesh_or_adjacency, delta_r: int) -> FlowNetwork:
    """Build the flow network from node weights and the ray neighborhood.

    Arcs, in canonical order:
      1. along-ray: (r, z) -> (r, z-1) for z > 0, capacity inf;
      2. inter-ray: (r, z) -> (r_n, max(0, z - delta_r)) for each neighbor, inf;
      3. terminal: source -> node with capacity -w where w < 0, else
         node -> sink with capacity w (zero-capacity arcs are kept so the
         arc census matches the construction rules);
      4. anchor: source -> (r, 0) with inf for every ray, which forbids the
         empty cut (the innermost sample is taken to lie inside the object).

    inf is 1 + sum |w|, provably above any cut made of terminal arcs only.
    """
    if weights.shape != costs.c.shape:
        raise ValueError("weights dims must match costs dims")
    if delta_r < 0:
        raise ValueError("delta_r must be >= 0")
    adjacency = _adjacency_of(mesh_or_adjacency)
    R, Z = weights.shape
    if len(adjacency) != R:
        raise ValueError("adjacency length must equal ray count")
    inf_cap = float(np.abs(weights).sum()) + 1.0
    n_nodes = R * Z + 2
    source, sink = R * Z, R * Z + 1

    frm, to, cap, kind = [], [], [], []

    r_idx = np.repeat(np.arange(R), Z - 1)
    z_idx = np.tile(np.arange(1, Z), R)
    frm.append(r_idx * Z + z_idx)
    to.append(r_idx * Z + z_idx - 1)
    cap.append(np.full(r_idx.size, inf_cap))
    kind.append(np.zeros(r_idx.size, np.int8))

    deg = np.array([len(a) for a in adjacency], dtype=np.int64)
    if deg.sum() > 0:
        nbr = np.concatenate([np.asarray(a, dtype=np.int64) for a in adjacency if len(a)])
        src_r = np.repeat(np.arange(R), deg)
        rr = np.repeat(src_r, Z)
        nn = np.repeat(nbr, Z)
        zz = np.tile(np.arange(Z), src_r.size)
        frm.append(rr * Z + zz)
        to.append(nn * Z + np.maximum(0, zz - delta_r))
        cap.append(np.full(rr.size, inf_cap))
        kind.append(np.ones(rr.size, np.int8))

    flat = weights.ravel()
    nodes = np.arange(R * Z)
    neg = flat < 0
    frm.append(np.full(int(neg.sum()), source))
    to.append(nodes[neg])
    cap.append(-flat[neg])
    kind.append(np.full(int(neg.sum()), 2, np.int8))
    frm.append(nodes[~neg])
    to.append(np.full(int((~neg).sum()), sink))
    cap.append(flat[~neg])
    kind.append(np.full(int((~neg).sum()), 2, np.int8))

    frm.append(np.full(R, source))
    to.append(np.arange(R) * Z)
    cap.append(np.full(R, inf_cap))
    kind.append(np.full(R, 3, np.int8))

    return FlowNetwork(
        node_count=n_nodes,
        arcs_from=np.concatenate(frm),
        arcs_to=np.concatenate(to),
        arcs_cap=np.concatenate(cap),
        source=source,
        sink=sink,
        inf_capacity=inf_cap,
        ray_count=R,
        samples_per_ray=Z,
        adjacency=adjacency,
        delta_r=delta_r,
        arc_kinds=np.concatenate(kind),
    )


def build_ray_graph(volume: Volume, seed_mm, params: SegmentationParams):
    """Convenience pipeline front half: mesh, rays, costs, weights, network."""
    mesh = build_icosphere(params.subdivisions)
    mean_gray = estimate_mean_gray(volume, seed_mm, params.mean_region_d)
    grid = cast_rays(volume, mesh, seed_mm, params)
    costs = node_costs(grid, mean_gray)
    weights = terminal_weights(costs)
    network = assemble_graph(costs, weights, mesh, params.delta_r)
    return mesh, grid, costs, weights, network
