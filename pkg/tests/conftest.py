import numpy as np
import pytest

from hsti_indexer.geo_core import STObject, WorldBounds


def _objects(n, seed=0, distribution="uniform", world=None):
    world = world or WorldBounds()
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        xs = rng.uniform(0, world.x_max, n)
        ys = rng.uniform(0, world.y_max, n)
    else:
        centers = rng.uniform(0, world.x_max, size=(4, 2))
        owner = rng.integers(0, 4, n)
        xs = np.clip(centers[owner, 0] + rng.normal(0, 300, n), 0, world.x_max)
        ys = np.clip(centers[owner, 1] + rng.normal(0, 300, n), 0, world.y_max)
    ts = rng.uniform(0, world.t_max, n)
    return [STObject(i, float(x), float(y), float(t)) for i, (x, y, t) in enumerate(zip(xs, ys, ts))]


@pytest.fixture
def make_objects():
    """Factory for seeded synthetic objects in the default world."""
    return _objects
