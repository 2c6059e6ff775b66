import numpy as np
import pytest

from tactile_sleeve.mapping import DepthFrame


@pytest.fixture
def uniform_frame():
    return DepthFrame.from_flat(10, 10, [1500] * 100)


@pytest.fixture
def invalid_frame():
    return DepthFrame.from_flat(10, 10, [0] * 100)


def make_hallway_frame(width=50, height=50):
    """Near depths at the left/right edges, far in the center."""
    col_depth = np.empty(width)
    band = width // 5
    for c in range(width):
        dist_from_edge = min(c, width - 1 - c)
        col_depth[c] = 800 + 1600 * min(dist_from_edge / (2 * band), 1.0)
    depths = np.tile(col_depth, (height, 1)).astype(np.uint16)
    return DepthFrame(width, height, depths)


@pytest.fixture
def hallway_frame():
    return make_hallway_frame()
