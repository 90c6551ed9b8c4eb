import numpy as np
import pytest

from quadkit.heightfield import Heightfield
from quadkit.stability import CentroidalState, Contact, ContactSet


@pytest.fixture
def flat_terrain() -> Heightfield:
    return Heightfield.zeros(201, 201)  # 4 x 4 m tile, origin centered


@pytest.fixture
def square_contacts() -> ContactSet:
    return ContactSet(tuple(Contact((x, y, 0.0), friction_mu=10.0)
                            for x, y in [(0, 0), (1, 0), (1, 1), (0, 1)]))


@pytest.fixture
def square_state() -> CentroidalState:
    return CentroidalState(com_position=(0.5, 0.5, 0.5))


@pytest.fixture
def quad_contacts() -> ContactSet:
    return ContactSet(tuple(Contact((x, y, 0.0), friction_mu=0.6)
                            for x, y in [(0.35, 0.2), (0.35, -0.2),
                                         (-0.35, 0.2), (-0.35, -0.2)]))


@pytest.fixture
def quad_state() -> CentroidalState:
    return CentroidalState(com_position=(0.0, 0.0, 0.45))


def step_heightfield(step_x: float = 0.0, height: float = 0.1,
                     rows: int = 201, cols: int = 201) -> Heightfield:
    """Flat tile with a single height step at world x >= step_x."""
    hf = Heightfield.zeros(rows, cols)
    cells = hf.cells.copy()
    xs = hf.origin[0] + np.arange(cols) * hf.resolution
    code = int(round(height * 65535 / hf.z_scale))
    cells[:, xs >= step_x] = code
    return Heightfield(cells, hf.resolution, hf.z_scale, hf.origin)
