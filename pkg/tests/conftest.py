import numpy as np
import pytest

from gliocut import PhantomSpec, SegmentationParams, generate_phantom
from gliocut.flow import all_pairs_adjacency, max_flow
from gliocut.graph import CostField, assemble_graph


@pytest.fixture(scope="session")
def solver_warm():
    """Compile the flow kernel once so timed tests measure the algorithm."""
    w = np.array([[1.0, -2.0, 3.0]])
    costs = CostField(c=np.abs(w), mean_gray=0.0)
    network = assemble_graph(costs, w, all_pairs_adjacency(1), 0)
    max_flow(network)
    return True


@pytest.fixture(scope="session")
def ball_phantom():
    """Noiseless ball: radius 15 mm, 200 inside / 50 outside, 64^3, unit spacing."""
    spec = PhantomSpec(dims=(64, 64, 64), spacing=(1.0, 1.0, 1.0), shape="ball",
                       radius_mm=15.0, inside_value=200.0, outside_value=50.0)
    volume, truth = generate_phantom(spec, rng_seed=0)
    return spec, volume, truth


@pytest.fixture(scope="session")
def noisy_ball_phantom():
    spec = PhantomSpec(dims=(64, 64, 64), spacing=(1.0, 1.0, 1.0), shape="ball",
                       radius_mm=15.0, inside_value=200.0, outside_value=50.0,
                       noise_sigma=10.0)
    volume, truth = generate_phantom(spec, rng_seed=20100902)
    return spec, volume, truth


@pytest.fixture
def default_params():
    return SegmentationParams()
