import numpy as np
import pytest

from acgeom.jets import Jet


def random_jet(rng, n, order, nterms=5, max_degree=None, dyadic=False, real=False):
    """Random sparse jet; dyadic coefficients keep small-integer products exact."""
    max_degree = order if max_degree is None else max_degree
    terms = {}
    for _ in range(nterms):
        d = int(rng.integers(0, max_degree + 1))
        exps = [0] * (2 * n)
        for _ in range(d):
            exps[int(rng.integers(0, 2 * n))] += 1
        if dyadic:
            c = complex(int(rng.integers(-256, 257)) / 256,
                        0 if real else int(rng.integers(-256, 257)) / 256)
        else:
            c = complex(rng.normal(), 0 if real else rng.normal())
        terms[(tuple(exps[:n]), tuple(exps[n:]))] = c
    return Jet(n, order, terms)


def random_point(rng, n, radius=0.05):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return radius * v / max(np.abs(v).max(), 1e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
