import math

import numpy as np
import pytest

from toruscodes import TorusSpec


def random_torus(rng, n, floor=0.2):
    """Random torus whose smallest coordinate radius stays bounded away from 0."""
    c = np.abs(rng.standard_normal(n)) + floor
    return TorusSpec(c / np.linalg.norm(c))


def random_primitive(rng, n, lo=-5, hi=5):
    while True:
        u = rng.integers(lo, hi + 1, size=n)
        g = 0
        for x in u:
            g = math.gcd(g, int(abs(x)))
        if g == 1:
            return u.astype(np.int64)


def brute_projection_shortest(c, u, box=3):
    """Oracle: min norm of projections of lattice points n*C onto u_hat-perp."""
    c = np.asarray(c, dtype=float)
    u = np.asarray(u, dtype=float)
    u_hat = c * u
    uu = float(u_hat @ u_hat)
    n = c.size
    grids = np.meshgrid(*([np.arange(-box, box + 1)] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1).astype(float) * c
    proj = pts - np.outer(pts @ u_hat, u_hat) / uu
    norms = np.linalg.norm(proj, axis=1)
    nonzero = norms > 1e-9
    return float(norms[nonzero].min())


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240)
