import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_mask(shape, boxes):
    """Boolean mask from (r0, r1, c0, c1) half-open boxes."""
    data = np.zeros(shape, dtype=bool)
    for r0, r1, c0, c1 in boxes:
        data[r0:r1, c0:c1] = True
    return data


def random_blob(rng, shape, fill=0.45):
    return rng.random(shape) < fill


def random_convex_polygon(rng, n_points=8):
    """Convex hull of random points in [0.1, 0.9]^2, as normalized (n, 2)."""
    from scipy.spatial import ConvexHull

    pts = rng.uniform(0.1, 0.9, size=(n_points, 2))
    hull = ConvexHull(pts)
    return pts[hull.vertices]
