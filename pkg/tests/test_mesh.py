import numpy as np
import pytest

from gliocut.mesh import build_icosphere, vertex_face_table


def euler_characteristic(mesh):
    return mesh.vertex_count - mesh.edge_count + len(mesh.faces)


class TestIcosphere:
    def test_level0_is_icosahedron(self):
        mesh = build_icosphere(0)
        assert mesh.vertex_count == 12
        assert all(len(a) == 5 for a in mesh.adjacency)
        assert euler_characteristic(mesh) == 2

    @pytest.mark.parametrize("level,expected", [(1, 42), (2, 162), (3, 642)])
    def test_vertex_counts(self, level, expected):
        mesh = build_icosphere(level)
        assert mesh.vertex_count == expected == 10 * 4 ** level + 2
        # closed surface of genus 0: V - E + F = 2
        assert euler_characteristic(mesh) == 2

    def test_unit_norm(self):
        mesh = build_icosphere(2)
        norms = np.linalg.norm(mesh.vertices, axis=1)
        assert np.abs(norms - 1.0).max() < 1e-9

    def test_adjacency_symmetric_no_self(self):
        mesh = build_icosphere(2)
        for v, neighbors in enumerate(mesh.adjacency):
            assert v not in neighbors
            for n in neighbors:
                assert v in mesh.adjacency[n]

    def test_degrees(self):
        # 12 original vertices keep degree 5, subdivision vertices have 6
        mesh = build_icosphere(2)
        degrees = np.array([len(a) for a in mesh.adjacency])
        assert (degrees[:12] == 5).all()
        assert (degrees[12:] == 6).all()

    def test_deterministic_order(self):
        a = build_icosphere(2)
        b = build_icosphere(2)
        assert np.array_equal(a.vertices, b.vertices)
        assert np.array_equal(a.faces, b.faces)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            build_icosphere(-1)
        with pytest.raises(ValueError):
            build_icosphere(8)

    def test_vertex_face_table_covers_faces(self):
        mesh = build_icosphere(1)
        table = vertex_face_table(mesh)
        for v in range(mesh.vertex_count):
            incident = set(table[v][table[v] >= 0].tolist())
            expected = {fi for fi, f in enumerate(mesh.faces) if v in f}
            assert incident == expected
