"""Subdivided icosahedron meshes used as ray direction sets.

Vertices are unit direction vectors; the mesh edge graph defines which rays
are neighbors for the surface smoothness constraint. Subdivision level n
yields 10 * 4**n + 2 vertices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_SUBDIVISIONS = 7  # 163842 vertices; beyond this graphs get unreasonably large


@dataclass(frozen=True)
class PolyhedronMesh:
    vertices: np.ndarray          # (R, 3) unit vectors
    faces: np.ndarray             # (F, 3) vertex indices, consistent order
    adjacency: tuple              # per vertex, sorted tuple of edge-sharing vertices

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2


def _icosahedron():
    phi = (1.0 + 5.0 ** 0.5) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    return [v for v in verts], faces


def build_icosphere(subdivisions: int) -> PolyhedronMesh:
    """Subdivide an icosahedron, projecting new vertices onto the unit sphere.

    Vertex order is deterministic for a given level: the 12 icosahedron
    vertices first, then midpoints in face-traversal order.
    """
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    if subdivisions > MAX_SUBDIVISIONS:
        raise ValueError(f"subdivisions {subdivisions} > {MAX_SUBDIVISIONS} refused (graph size guard)")
    verts, faces = _icosahedron()
    for _ in range(subdivisions):
        midpoint_of = {}

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            idx = midpoint_of.get(key)
            if idx is None:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                idx = len(verts) - 1
                midpoint_of[key] = idx
            return idx

        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces

    vertices = np.array(verts)
    face_arr = np.array(faces, dtype=np.int64)
    neighbor_sets = [set() for _ in range(len(vertices))]
    for a, b, c in faces:
        neighbor_sets[a].update((b, c))
        neighbor_sets[b].update((a, c))
        neighbor_sets[c].update((a, b))
    adjacency = tuple(tuple(sorted(s)) for s in neighbor_sets)
    return PolyhedronMesh(vertices=vertices, faces=face_arr, adjacency=adjacency)


def vertex_face_table(mesh: PolyhedronMesh) -> np.ndarray:
    """(R, k) table of face indices incident to each vertex, padded with -1."""
    lists = [[] for _ in range(mesh.vertex_count)]
    for fi, (a, b, c) in enumerate(mesh.faces):
        lists[a].append(fi)
        lists[b].append(fi)
        lists[c].append(fi)
    width = max(len(l) for l in lists)
    table = np.full((mesh.vertex_count, width), -1, dtype=np.int64)
    for v, l in enumerate(lists):
        table[v, : len(l)] = l
    return table
